#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pstab/cpcore.hpp"
#include "pstab/verify.hpp"

using namespace pstab;

namespace {

const double kPi = std::numbers::pi;

Domain unit_square() { return Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("stability constant") {
  CHECK(stability_constant(Exponent(2.0), 1.0) == doctest::Approx(kPi * kPi).epsilon(1e-14));
  const double p3 = std::pow(pi_p(Exponent(3.0)) / 2.0, 3.0) / 2.0;
  CHECK(stability_constant(Exponent(3.0), 2.0) == doctest::Approx(p3).epsilon(1e-14));
}

TEST_CASE("random fields are seeded and zero-trace") {
  const Mesh m = build_mesh(unit_square(), 2);
  const Field a = random_zero_trace_field(m, 3);
  const Field b = random_zero_trace_field(m, 3);
  const Field c = random_zero_trace_field(m, 4);
  CHECK(a.has_zero_trace());
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
  CHECK(a.values().cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("distance to the eigenspace") {
  const Mesh m = build_mesh(Domain::interval(0.0, 1.0), 3);
  const Measure leb = Measure::lebesgue();
  const Field u1 = Field::interpolate(m, [](const Point2& x) { return std::sin(kPi * x.x()); });
  Field u = u1;
  u.values() *= -2.5;
  const DistanceResult d0 = distance_to_eigenspace(Exponent(3.0), u, u1, leb);
  CHECK(d0.c_star == doctest::Approx(-2.5).epsilon(1e-6));
  CHECK(d0.distance_p <= 1e-12);

  const Field v = Field::interpolate(m, [](const Point2& x) { return x.x() * (1 - x.x()) + 0.3 * std::sin(2 * kPi * x.x()); });
  // p = 2: orthogonal projection.
  const double uv = integrate(m, leb, [&](const QuadPoint& q) { return v.at(q) * u1.at(q); });
  const double uu = integrate(m, leb, [&](const QuadPoint& q) { return u1.at(q) * u1.at(q); });
  const DistanceResult d2 = distance_to_eigenspace(Exponent(2.0), v, u1, leb);
  CHECK(d2.c_star == doctest::Approx(uv / uu).epsilon(1e-9));
  // p = 3: dense scan.
  const DistanceResult d3 = distance_to_eigenspace(Exponent(3.0), v, u1, leb);
  double best = INFINITY;
  for (int i = 0; i <= 20000; ++i) {
    const double c = -1.0 + 2.0 * i / 20000;
    best = std::min(best, integrate(m, leb, [&](const QuadPoint& q) { return std::pow(std::abs(v.at(q) - c * u1.at(q)), 3.0); }));
  }
  CHECK(d3.distance_p <= best * (1 + 1e-12));
  CHECK(d3.distance_p >= best * (1 - 1e-6));
  CHECK(std::abs(d3.derivative) <= 1e-8);
}

TEST_CASE("deficit vanishes on the ground state") {
  const Mesh m = build_mesh(Domain::interval(0.0, 1.0), 4);
  const EigenPair e = first_eigenpair(Exponent(3.0), m, Measure::lebesgue());
  CHECK(std::abs(deficit(Exponent(3.0), e.field, e.lambda, Measure::lebesgue())) <= 1e-9);
}

TEST_CASE("deficit identity on the interval") {
  const Mesh m = build_mesh(Domain::interval(0.0, 1.0), 4);
  for (double p : {2.0, 3.0}) {
    const EigenPair e = first_eigenpair(Exponent(p), m, Measure::lebesgue());
    const Field u = Field::interpolate(m, [](const Point2& x) { return std::sin(2 * kPi * x.x()); });
    const IdentityResult r = identity_check(Exponent(p), u, e.field, e.lambda, Measure::lebesgue());
    CHECK(r.residual < 0.02);
    CHECK(r.remainder >= 0.0);
    const RemainderResult rem = cp_remainder(Exponent(p), u, e.field, Measure::lebesgue());
    CHECK(rem.value == doctest::Approx(r.remainder));
  }
}

TEST_CASE("stability check passes and an inflated constant fails") {
  const Domain d = Domain::interval(0.0, 1.0);
  const Mesh m = build_mesh(d, 3);
  const Field u = random_zero_trace_field(m, 9);
  const StabilityReport ok = stability_check(Exponent(3.0), d, m, u, Measure::lebesgue());
  CHECK(ok.passed);
  CHECK(ok.margin >= -ok.tol_quad);
  CHECK(ok.within_hypotheses);
  CHECK(ok.rhs == doctest::Approx(ok.constant * ok.distance_p));
  const StabilityReport bad = stability_check(Exponent(3.0), d, m, u, Measure::lebesgue(), nullptr, {}, 1e8);
  CHECK_FALSE(bad.passed);
  CHECK_THROWS_AS(stability_check(Exponent(1.5), d, m, u, Measure::lebesgue()), DomainError);

  const Domain sq = unit_square();
  const Mesh ms = build_mesh(sq, 2);
  const StabilityReport poly = stability_check(Exponent(2.0), sq, ms, random_zero_trace_field(ms, 1), Measure::lebesgue());
  CHECK_FALSE(poly.within_hypotheses);
  const StabilityReport gauss = stability_check(Exponent(2.0), sq, ms, random_zero_trace_field(ms, 1), Measure::gaussian());
  CHECK(gauss.within_hypotheses);
}

TEST_CASE("centering root matches a brute-force scan") {
  const Mesh m = build_mesh(Domain::interval(0.0, 1.0), 3);
  const Field f = Field::interpolate(m, [](const Point2& x) { return std::exp(2 * x.x()) + x.x(); });
  const Field w = Field::interpolate(m, [](const Point2& x) { return 1.0 + x.x(); });
  for (double p : {1.5, 2.0, 3.0}) {
    std::vector<double> fv, wv;
    for (const auto& q : m.quad) {
      fv.push_back(f.at(q));
      wv.push_back(q.weight * w.at(q));
    }
    const double ref = oracle::centering_scan(p, fv, wv);
    CHECK(centering_root(Exponent(p), f, w) == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("log-concavity test") {
  const Mesh m = build_mesh(Domain::interval(0.0, 1.0), 4);
  const Field good = Field::interpolate(m, [](const Point2& x) { return std::sin(kPi * x.x()); });
  const LogConcavityReport r = log_concavity_test(good, 1000, 1, m.mesh_size());
  CHECK(r.pairs == 1000);
  CHECK(r.failures == 0);
  const Field bimodal = Field::interpolate(m, [](const Point2& x) {
    const double t = x.x();
    return std::exp(-200 * (t - 0.25) * (t - 0.25)) + std::exp(-200 * (t - 0.75) * (t - 0.75));
  });
  const LogConcavityReport b = log_concavity_test(bimodal, 1000, 1, m.mesh_size());
  CHECK(b.failure_fraction > 0.01);
  CHECK(b.max_violation > 0.0);
}

TEST_CASE("weighted Poincare witness and weight rejection") {
  const Domain d = Domain::interval(0.0, 1.0);
  const Mesh m = build_mesh(d, 5);
  const Field f = Field::interpolate(m, [](const Point2& x) { return std::cos(kPi * x.x()); });
  const Field one = Field::interpolate(m, [](const Point2&) { return 1.0; });
  const WeightedPoincareReport r = weighted_poincare_check(Exponent(2.0), d, f, one);
  CHECK(r.t0 == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(r.ratio == doctest::Approx(kPi * kPi).epsilon(1e-3));
  CHECK(r.passed);
  const Field bimodal = Field::interpolate(m, [](const Point2& x) {
    const double t = x.x();
    return 1e-3 + std::exp(-200 * (t - 0.25) * (t - 0.25)) + std::exp(-200 * (t - 0.75) * (t - 0.75));
  });
  CHECK_THROWS_AS(weighted_poincare_check(Exponent(2.0), d, f, bimodal), DomainError);
  const Field lin = Field::interpolate(m, [](const Point2& x) { return x.x(); });
  const WeightedPoincareReport r3 = weighted_poincare_check(Exponent(3.0), d, lin, one);
  CHECK(r3.passed);
}

TEST_CASE("Picone identity against finite differences") {
  const auto u = [](std::array<double, 2> x) { return std::sin(kPi * x[0]) * (1 + 0.5 * x[1] * x[1]) + 0.2 * x[0] * x[1]; };
  const auto phi = [](std::array<double, 2> x) { return 1.5 + std::cos(x[0]) * std::exp(0.3 * x[1]); };
  for (double p : {2.0, 2.5, 3.0, 4.0}) {
    for (std::array<double, 2> x : {std::array<double, 2>{0.3, 0.4}, {0.7, -0.2}, {0.1, 0.9}}) {
      const double h = 1e-6;
      const std::array<double, 2> gu{(u({x[0] + h, x[1]}) - u({x[0] - h, x[1]})) / (2 * h),
                                     (u({x[0], x[1] + h}) - u({x[0], x[1] - h})) / (2 * h)};
      const std::array<double, 2> gp{(phi({x[0] + h, x[1]}) - phi({x[0] - h, x[1]})) / (2 * h),
                                     (phi({x[0], x[1] + h}) - phi({x[0], x[1] - h})) / (2 * h)};
      const double ratio = u(x) / phi(x);
      const std::vector<double> xi = {gu[0], gu[1]};
      const std::vector<double> eta = {gu[0] - ratio * gp[0], gu[1] - ratio * gp[1]};
      const double cp = cp_raw(p, xi, eta);
      const double rp = oracle::picone_rhs_fd(p, u, phi, x);
      CHECK(cp == doctest::Approx(rp).epsilon(1e-6).scale(std::pow(std::hypot(gu[0], gu[1]), p)));
    }
  }
}

TEST_CASE("Picone check on P1 fields") {
  const Mesh m = build_mesh(unit_square(), 2);
  const EigenPair e = first_eigenpair(Exponent(3.0), m, Measure::lebesgue());
  const Field u = random_zero_trace_field(m, 5);
  const PiconeReport r = picone_check(Exponent(3.0), u, e.field, 1000, 5);
  CHECK(r.samples + r.skipped == std::min<std::size_t>(1000, m.quad.size()));
  CHECK(r.max_scaled_residual <= 1e-8);
}

TEST_CASE("gap report on the interval at p = 2") {
  const Domain d = Domain::interval(0.0, 1.0);
  const Mesh m = build_mesh(d, 4);
  const GapReport g = gap_check(Exponent(2.0), d, m, Measure::lebesgue());
  CHECK(g.verdict == "verified");
  CHECK_FALSE(g.lambda2_is_upper_bound);
  CHECK(g.c_value == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(g.gap == doctest::Approx(3 * kPi * kPi).epsilon(1e-3));
  CHECK(g.passed);
  const EigenPair e1 = first_eigenpair(Exponent(2.0), m, Measure::lebesgue());
  const EigenPair e2 = second_eigenvalue(Exponent(2.0), m, Measure::lebesgue(), e1);
  CHECK_FALSE(gap_report(Exponent(2.0), d, e1, e2, Measure::lebesgue(), 10.0).passed);
}

}
