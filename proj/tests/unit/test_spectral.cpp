#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pstab/spectral.hpp"

using namespace pstab;

namespace {

const double kPi2 = std::numbers::pi * std::numbers::pi;

Domain unit_square() { return Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

bool monotone(const std::vector<double>& h) {
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i] > h[i - 1] * (1.0 + 1e-13)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("solver options validation") {
  SolverOptions o;
  CHECK_NOTHROW(o.validate());
  CHECK(o.epsilon_schedule.front() == doctest::Approx(1e-2));
  CHECK(o.epsilon_schedule.back() == doctest::Approx(1e-8));
  o.epsilon_schedule = {1e-2, 1e-1};
  CHECK_THROWS_AS(o.validate(), DomainError);
  o = {};
  o.epsilon_schedule.clear();
  CHECK_THROWS_AS(o.validate(), DomainError);
  o = {};
  o.max_iterations = 0;
  CHECK_THROWS_AS(o.validate(), DomainError);
}

TEST_CASE("Rayleigh quotient of a sine on the interval") {
  const Mesh m = build_mesh(Domain::interval(0.0, 1.0), 5);
  const Field u = Field::interpolate(m, [](const Point2& x) { return std::sin(std::numbers::pi * x.x()); });
  CHECK(rayleigh_quotient(Exponent(2.0), u, Measure::lebesgue()) == doctest::Approx(kPi2).epsilon(1e-3));
  CHECK_THROWS_AS(rayleigh_quotient(Exponent(2.0), Field::zero(m), Measure::lebesgue()), DomainError);
  Field v = u;
  normalize_lp(Exponent(3.0), v, Measure::lebesgue());
  CHECK(lp_power(Exponent(3.0), v, Measure::lebesgue()) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("distance initial guess is positive inside and zero on the boundary") {
  const Mesh m = build_mesh(unit_square(), 2);
  const Field g = distance_initial_guess(m);
  CHECK(g.has_zero_trace());
  for (std::size_t i = 0; i < m.num_nodes(); ++i) {
    if (!m.boundary[i]) CHECK(g.values()[static_cast<Eigen::Index>(i)] > 0.0);
  }
}

TEST_CASE("p = 2 interval eigenvalues against sine modes") {
  const Mesh m = build_mesh(Domain::interval(0.0, 1.0), 4);
  const EigenPair e1 = first_eigenpair(Exponent(2.0), m, Measure::lebesgue());
  CHECK(e1.converged);
  CHECK(e1.normalized);
  CHECK(monotone(e1.residual_history));
  CHECK(std::abs(e1.lambda - kPi2) / kPi2 < 1e-3);
  CHECK(e1.field.has_zero_trace());
  CHECK((e1.field.values().array() >= 0.0).all());
  const EigenPair e2 = second_eigenvalue(Exponent(2.0), m, Measure::lebesgue(), e1);
  CHECK(e2.estimator == SecondEstimator::Deflation);
  CHECK_FALSE(e2.is_upper_bound);
  CHECK(std::abs(e2.lambda - 4 * kPi2) / (4 * kPi2) < 1e-3);
}

TEST_CASE("scaling: lambda on (0, L) is lambda on (0, 1) / L^p") {
  for (double p : {2.0, 3.0}) {
    const double l1 = first_eigenpair(Exponent(p), build_mesh(Domain::interval(0.0, 1.0), 3), Measure::lebesgue()).lambda;
    const double l2 = first_eigenpair(Exponent(p), build_mesh(Domain::interval(0.0, 2.0), 3), Measure::lebesgue()).lambda;
    CHECK(l2 == doctest::Approx(l1 / std::pow(2.0, p)).epsilon(1e-9));
  }
}

TEST_CASE("p-Laplacian interval eigenvalues against the shooting oracle") {
  for (double p : {1.5, 3.0, 4.0}) {
    const Mesh m = build_mesh(Domain::interval(0.0, 1.0), 4);
    const EigenPair e = first_eigenpair(Exponent(p), m, Measure::lebesgue());
    CHECK(e.converged);
    CHECK(monotone(e.residual_history));
    const double ref = oracle::shooting_lambda1(p);
    CHECK(std::abs(e.lambda - ref) / ref < 1e-3);
  }
}

TEST_CASE("Gaussian interval eigenvalues") {
  const Mesh m = build_mesh(Domain::interval(-1.0, 1.0), 4);
  const EigenPair e2 = first_eigenpair(Exponent(2.0), m, Measure::gaussian());
  CHECK(e2.lambda == doctest::Approx(2.0).epsilon(1e-3));
  const EigenPair e3 = first_eigenpair(Exponent(3.0), m, Measure::gaussian());
  const double ref = oracle::shooting_lambda1(3.0, -1.0, 1.0, true);
  CHECK(std::abs(e3.lambda - ref) / ref < 1e-3);
}

TEST_CASE("unit square p = 2") {
  const Mesh m = build_mesh(unit_square(), 3);
  const EigenPair e1 = first_eigenpair(Exponent(2.0), m, Measure::lebesgue());
  CHECK(std::abs(e1.lambda - 2 * kPi2) / (2 * kPi2) < 0.02);
  CHECK(e1.lambda > 2 * kPi2);  // conforming P1 approximates from above
  const EigenPair e2 = second_eigenvalue(Exponent(2.0), m, Measure::lebesgue(), e1);
  CHECK(std::abs(e2.lambda - 5 * kPi2) / (5 * kPi2) < 0.03);
}

TEST_CASE("nodal cut estimator bounds lambda2 from above") {
  const Mesh m = build_mesh(Domain::interval(0.0, 1.0), 4);
  const EigenPair cut = nodal_cut_estimate(Exponent(2.0), m, Measure::lebesgue());
  CHECK(cut.is_upper_bound);
  CHECK(cut.estimator == SecondEstimator::NodalCut);
  CHECK(cut.cut_offset == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(cut.lambda >= 4 * kPi2 * (1 - 1e-6));
  CHECK(std::abs(cut.lambda - 4 * kPi2) / (4 * kPi2) < 1e-3);

  const Mesh m3 = build_mesh(Domain::interval(0.0, 1.0), 3);
  const EigenPair e1 = first_eigenpair(Exponent(3.0), m3, Measure::lebesgue());
  const EigenPair e2 = second_eigenvalue(Exponent(3.0), m3, Measure::lebesgue(), e1);
  CHECK(e2.is_upper_bound);
  // In 1D the second eigenfunction is two first eigenfunctions on the halves.
  CHECK(e2.lambda == doctest::Approx(e1.lambda * 8.0).epsilon(1e-3));
}

TEST_CASE("exhaustive and bisection cut sweeps agree") {
  const Mesh m = build_mesh(unit_square(), 2);
  CutSweepOptions fast;
  fast.directions = 8;
  CutSweepOptions full = fast;
  full.exhaustive = true;
  const double a = nodal_cut_estimate(Exponent(2.0), m, Measure::lebesgue(), {}, fast).lambda;
  const double b = nodal_cut_estimate(Exponent(2.0), m, Measure::lebesgue(), {}, full).lambda;
  CHECK(a <= b * (1 + 1e-2));
}

TEST_CASE("submesh extraction marks cut nodes as boundary") {
  const Mesh m = build_mesh(Domain::interval(0.0, 1.0), 0);
  std::vector<bool> keep(m.num_elements(), false);
  for (std::size_t e = 0; e < keep.size() / 2; ++e) keep[e] = true;
  const SubMesh s = extract_submesh(m, keep);
  CHECK(s.mesh.num_elements() == keep.size() / 2);
  CHECK(s.mesh.total_measure() == doctest::Approx(0.5));
  int boundary = 0;
  for (bool b : s.mesh.boundary) boundary += b ? 1 : 0;
  CHECK(boundary == 2);
}

TEST_CASE("degenerate inputs raise") {
  Mesh m;
  m.dim = 2;
  m.nodes = {{0, 0}, {1, 0}, {0, 1}};
  m.elements = {{0, 1, 2}};
  m.boundary = {true, true, true};
  m.finalize();
  CHECK_THROWS_AS(first_eigenpair(Exponent(2.0), m, Measure::lebesgue()), DomainError);
  SolverOptions tiny;
  tiny.max_iterations = 1;
  const Mesh m4 = build_mesh(Domain::interval(0.0, 1.0), 2);
  const EigenPair e = first_eigenpair(Exponent(3.0), m4, Measure::lebesgue(), tiny);
  CHECK_FALSE(e.converged);
  CHECK_THROWS_AS(second_eigenvalue(Exponent(3.0), m4, Measure::lebesgue(), e), SolverError);
}

}
