#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pstab/io.hpp"

using namespace pstab;

TEST_SUITE("io") {

TEST_CASE("mesh round trip") {
  for (const Domain& d : {Domain::interval(0.0, 2.0), Domain::polygon({{0, 0}, {2, 0}, {1, 1.5}})}) {
    const Mesh m = build_mesh(d, 2);
    std::stringstream ss;
    write_mesh(ss, m);
    const Mesh r = read_mesh(ss);
    REQUIRE(r.num_nodes() == m.num_nodes());
    CHECK(r.dim == m.dim);
    CHECK(r.elements == m.elements);
    CHECK(r.boundary == m.boundary);
    for (std::size_t i = 0; i < m.num_nodes(); ++i) CHECK((r.nodes[i] - m.nodes[i]).norm() == 0.0);
    CHECK(r.total_measure() == doctest::Approx(m.total_measure()).epsilon(1e-15));
    CHECK(validate_mesh(r, d).empty());
  }
}

TEST_CASE("malformed mesh files are rejected") {
  for (const char* text : {"", "DIM 3 NODES 2 ELEMS 1\n", "DIM 1 NODES 2 ELEMS 1\n0\n1\n0 5\n1 1\n",
                           "DIM 1 NODES 2 ELEMS 1\n0\n", "DIM 1 NODES 2 ELEMS 1\n0\n1\n0 1\n1 2\n"}) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_mesh(in), std::runtime_error);
  }
}

TEST_CASE("domain parsing") {
  const Domain a = parse_domain("interval:-1,1");
  CHECK(a.kind() == Domain::Kind::Interval);
  CHECK(a.diameter() == doctest::Approx(2.0));
  const Domain b = parse_domain("polygon:0,0;1,0;1,1;0,1");
  CHECK(b.kind() == Domain::Kind::Polygon);
  CHECK(b.measure() == doctest::Approx(1.0));
  const Domain c = parse_domain(R"({"polygon": [[0,0],[1,0],[0,1]]})");
  CHECK(c.vertices().size() == 3);
  const Domain d = domain_from_json(domain_to_json(b));
  CHECK(d.measure() == doctest::Approx(1.0));
  CHECK(parse_domain(domain_to_json(a).dump()).diameter() == doctest::Approx(2.0));

  for (const char* bad : {"interval:0", "interval:0,x", "disk:0,0,1", "polygon:0,0;1", "{not json", "{\"foo\":1}",
                          "interval:1e400,2"}) {
    CHECK_THROWS(parse_domain(bad));
  }
  CHECK_THROWS_AS(parse_domain("interval:1,0"), DomainError);
}

TEST_CASE("report serialization") {
  const C1Result c = c1_sharp(Exponent(3.0));
  const auto j = to_json(c);
  CHECK(j.at("c1").get<double>() == c.c1);
  CHECK(j.contains("r0"));
  GapReport g;
  g.verdict = "empirical";
  g.lambda2_is_upper_bound = true;
  const auto jg = to_json(g);
  CHECK(jg.at("verdict") == "empirical");
  CHECK(jg.at("lambda2_is_upper_bound") == true);
}

TEST_CASE("eigenpair serialization carries nodal values") {
  const Mesh m = build_mesh(Domain::interval(0.0, 1.0), 0);
  const EigenPair e = first_eigenpair(Exponent(2.0), m, Measure::lebesgue());
  const auto j = to_json(e, "run.mesh");
  CHECK(j.at("nodal_values").at("mesh_file") == "run.mesh");
  CHECK(j.at("nodal_values").at("values").size() == m.num_nodes());
  CHECK(j.at("residual_history").size() == e.residual_history.size());
  CHECK_FALSE(j.contains("cut"));
}

TEST_CASE("csv rows leave non-applicable fields empty") {
  CHECK(csv_header() == "p,diam,lambda1,lambda2,deficit,distance_p,bound,margin");
  CsvRow row;
  row.p = 2;
  row.diameter = 1;
  row.lambda1 = 9.5;
  const std::string line = csv_line(row);
  CHECK(line.rfind("2,1,9.5,,,,", 0) == 0);
  std::size_t commas = 0;
  for (char ch : line) commas += ch == ',' ? 1 : 0;
  CHECK(commas == 7);
}

}
