#include "pstab/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "pstab/cpcore.hpp"

namespace pstab {
namespace {

// Values of two fields and the measure weight at every quadrature point.
struct QuadSamples {
  std::vector<double> weight;  // quadrature weight * density
  std::vector<double> a;
  std::vector<double> b;

  QuadSamples(const Field& fa, const Field& fb, const Measure& measure) {
    const Mesh& mesh = fa.mesh();
    const auto rho = quad_densities(mesh, measure);
    weight.resize(mesh.quad.size());
    a.resize(mesh.quad.size());
    b.resize(mesh.quad.size());
    for (std::size_t i = 0; i < mesh.quad.size(); ++i) {
      weight[i] = mesh.quad[i].weight * rho[i];
      a[i] = fa.at(mesh.quad[i]);
      b[i] = fb.at(mesh.quad[i]);
    }
  }
};

// sign(x) |x|^{e}, with 0 at x = 0 for any e.
double signed_pow(double x, double e) {
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), e), x);
}

// Minimizes the convex phi(c) = sum_i w_i |a_i - c b_i|^p.
DistanceResult minimize_shift(double p, const std::vector<double>& w, const std::vector<double>& a,
                              const std::vector<double>& b) {
  auto phi = [&](double c) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::pow(std::abs(a[i] - c * b[i]), p);
    return s;
  };
  auto dphi = [&](double c) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s -= w[i] * signed_pow(a[i] - c * b[i], p - 1.0) * b[i];
    return p * s;
  };
  auto d2phi = [&](double c) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double r = std::abs(a[i] - c * b[i]);
      if (r > 0.0) s += w[i] * std::pow(r, p - 2.0) * b[i] * b[i];
    }
    return p * (p - 1.0) * s;
  };

  double norm_a = 0.0, norm_b = 0.0, ab = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    norm_a += w[i] * std::pow(std::abs(a[i]), p);
    norm_b += w[i] * std::pow(std::abs(b[i]), p);
    ab += w[i] * a[i] * b[i];
    bb += w[i] * b[i] * b[i];
  }
  DistanceResult out;
  if (!(norm_b > 0.0)) {
    out.distance_p = norm_a;
    return out;
  }
  // Hoelder bound on |phi'(0)|: the derivative scale.
  const double scale = p * std::pow(norm_a, (p - 1.0) / p) * std::pow(norm_b, 1.0 / p) +
                       std::numeric_limits<double>::min();
  double center = bb > 0.0 ? ab / bb : 0.0;
  double radius = std::max(1.0, std::abs(center)) * 0.5;

  // Bracket the minimizer: phi'(lo) <= 0 <= phi'(hi).
  double lo = center - radius;
  double hi = center + radius;
  for (int i = 0; i < 200 && dphi(lo) > 0.0; ++i) lo -= (radius *= 2.0);
  for (int i = 0; i < 200 && dphi(hi) < 0.0; ++i) hi += (radius *= 2.0);

  // Golden-section contraction.
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = phi(x1), f2 = phi(x2);
  for (int i = 0; i < 60 && (hi - lo) > 1e-6 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = phi(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = phi(x2);
    }
  }
  // Re-establish a derivative bracket around the golden-section interval.
  double c = 0.5 * (lo + hi);
  double width = std::max(hi - lo, 1e-12);
  lo = c - width;
  hi = c + width;
  for (int i = 0; i < 200 && dphi(lo) > 0.0; ++i) lo -= (width *= 2.0);
  for (int i = 0; i < 200 && dphi(hi) < 0.0; ++i) hi += (width *= 2.0);

  // Newton on phi' with bisection fallback.
  double d = dphi(c);
  for (int i = 0; i < 200 && std::abs(d) > 1e-10 * scale; ++i) {
    if (d > 0.0) hi = c; else lo = c;
    const double curvature = d2phi(c);
    double next = curvature > 0.0 ? c - d / curvature : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == c || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(c))) break;
    c = next;
    d = dphi(c);
  }
  out.c_star = c;
  out.derivative = d;
  out.distance_p = phi(c);
  return out;
}

}  // namespace

double stability_constant(Exponent p, double diameter) {
  const double pv = p.value();
  return std::pow(2.0, 2.0 - pv) * std::pow(pi_p(p) / diameter, pv);
}

double quadrature_tolerance(Exponent p, const Field& u, const Measure& measure) {
  return 1e-8 * gradient_energy(p, u, measure);
}

Field random_zero_trace_field(const Mesh& mesh, std::uint64_t seed, int smoothing_passes) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Field u = Field::zero(mesh);
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const double v = uniform(rng);
    if (!mesh.boundary[i]) u.values()[static_cast<Eigen::Index>(i)] = v;
  }
  if (smoothing_passes <= 0) return u;

  std::vector<std::set<int>> neighbours(mesh.num_nodes());
  const int npe = mesh.nodes_per_element();
  for (const auto& el : mesh.elements) {
    for (int i = 0; i < npe; ++i) {
      for (int j = 0; j < npe; ++j) {
        if (i != j) neighbours[el[i]].insert(el[j]);
      }
    }
  }
  for (int pass = 0; pass < smoothing_passes; ++pass) {
    Eigen::VectorXd next = u.values();
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
      if (mesh.boundary[i] || neighbours[i].empty()) continue;
      double sum = 0.0;
      for (int j : neighbours[i]) sum += u.values()[j];
      next[static_cast<Eigen::Index>(i)] = sum / static_cast<double>(neighbours[i].size());
    }
    u.values() = std::move(next);
  }
  return u;
}

DistanceResult distance_to_eigenspace(Exponent p, const Field& u, const Field& u1, const Measure& measure) {
  const QuadSamples s(u, u1, measure);
  return minimize_shift(p.value(), s.weight, s.a, s.b);
}

double deficit(Exponent p, const Field& u, double lambda1, const Measure& measure) {
  return gradient_energy(p, u, measure) - lambda1 * lp_power(p, u, measure);
}

RemainderResult cp_remainder(Exponent p, const Field& u, const Field& u1, const Measure& measure) {
  const Mesh& mesh = u.mesh();
  const double pv = p.value();
  const double floor = 1e-10 * u1.values().maxCoeff();
  const auto rho = quad_densities(mesh, measure);
  RemainderResult out;
  double total_mass = 0.0;
  double excluded_mass = 0.0;
  for (std::size_t qi = 0; qi < mesh.quad.size(); ++qi) {
    const auto& q = mesh.quad[qi];
    const double w = q.weight * rho[qi];
    total_mass += w;
    const double ground = u1.at(q);
    if (!(ground >= floor) || ground <= 0.0) {
      ++out.excluded_points;
      excluded_mass += w;
      continue;
    }
    const Point2 xi = u.gradient(q.element);
    // u1 grad(u/u1) = grad u - (u/u1) grad u1
    const Point2 eta = xi - (u.at(q) / ground) * u1.gradient(q.element);
    out.value += w * cp_raw(pv, std::span<const double>(xi.data(), mesh.dim),
                            std::span<const double>(eta.data(), mesh.dim));
  }
  out.excluded_mass_fraction = total_mass > 0.0 ? excluded_mass / total_mass : 0.0;
  out.boundary_layer_warning = out.excluded_mass_fraction > 0.01;
  return out;
}

IdentityResult identity_check(Exponent p, const Field& u, const Field& u1, double lambda1,
                              const Measure& measure) {
  IdentityResult out;
  out.deficit = deficit(p, u, lambda1, measure);
  const RemainderResult r = cp_remainder(p, u, u1, measure);
  out.remainder = r.value;
  out.boundary_layer_warning = r.boundary_layer_warning;
  const double tol = quadrature_tolerance(p, u, measure);
  const double denom = std::max(out.deficit, tol);
  out.residual = denom > 0.0 ? std::abs(out.deficit - out.remainder) / denom : 0.0;
  return out;
}

StabilityReport stability_check(Exponent p, const Domain& domain, const Mesh& mesh, const Field& u,
                                const Measure& measure, const EigenPair* cached, const SolverOptions& opts,
                                double constant_factor) {
  p.require_at_least_two("stability_check");
  EigenPair solved;
  if (cached == nullptr) {
    solved = first_eigenpair(p, mesh, measure, opts);
    if (!solved.converged) throw SolverError("first eigenpair did not converge");
    cached = &solved;
  }
  StabilityReport r;
  r.p = p.value();
  r.diameter = domain.diameter();
  r.lambda1 = cached->lambda;
  r.deficit = deficit(p, u, r.lambda1, measure);
  const DistanceResult d = distance_to_eigenspace(p, u, cached->field, measure);
  r.distance_p = d.distance_p;
  r.c_star = d.c_star;
  r.constant = constant_factor * stability_constant(p, r.diameter);
  r.rhs = r.constant * r.distance_p;
  r.margin = r.deficit - r.rhs;
  r.tol_quad = quadrature_tolerance(p, u, measure);
  r.passed = r.margin >= -r.tol_quad;
  r.measure = measure.name();
  r.within_hypotheses = !(domain.kind() == Domain::Kind::Polygon && measure.kind() == Measure::Kind::Lebesgue);
  return r;
}

double centering_root(Exponent p, const Field& f, const Field& weight, const Measure& measure) {
  const QuadSamples s(f, weight, measure);
  const double pv = p.value();
  auto g = [&](double t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < s.weight.size(); ++i) sum += s.weight[i] * s.b[i] * signed_pow(s.a[i] - t, pv - 1.0);
    return sum;
  };
  double lo = f.values().minCoeff();
  double hi = f.values().maxCoeff();
  if (lo == hi) return lo;
  double scale = 0.0;
  for (std::size_t i = 0; i < s.weight.size(); ++i) {
    scale += s.weight[i] * std::abs(s.b[i]) * std::pow(hi - lo, pv - 1.0);
  }
  // g is non-increasing with g(min f) >= 0 >= g(max f).
  double mid = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (std::abs(gm) <= 1e-10 * scale || hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
    if (gm > 0.0) lo = mid; else hi = mid;
  }
  return mid;
}

LogConcavityReport log_concavity_test(const Field& u, std::size_t pairs, std::uint64_t seed, double slack) {
  const Mesh& mesh = u.mesh();
  std::vector<int> positive;
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    if (u.values()[static_cast<Eigen::Index>(i)] > 0.0) positive.push_back(static_cast<int>(i));
  }
  LogConcavityReport out;
  out.slack = slack;
  if (positive.size() < 2) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, positive.size() - 1);
  for (std::size_t k = 0; k < pairs; ++k) {
    const int i = positive[pick(rng)];
    int j = positive[pick(rng)];
    while (j == i) j = positive[pick(rng)];
    const Point2 mid = 0.5 * (mesh.nodes[i] + mesh.nodes[j]);
    const double um = u.evaluate(mid);
    const double avg = 0.5 * (std::log(u.values()[i]) + std::log(u.values()[j]));
    const double violation = um > 0.0 ? avg - std::log(um) : std::numeric_limits<double>::infinity();
    ++out.pairs;
    if (violation > slack) ++out.failures;
    out.max_violation = std::max(out.max_violation, violation);
  }
  out.failure_fraction = static_cast<double>(out.failures) / static_cast<double>(out.pairs);
  return out;
}

WeightedPoincareReport weighted_poincare_check(Exponent p, const Domain& domain, const Field& f,
                                               const Field& omega, const Measure& measure, double log_slack) {
  const Mesh& mesh = f.mesh();
  const double pv = p.value();
  WeightedPoincareReport r;
  const double slack = log_slack < 0.0 ? mesh.mesh_size() : log_slack;
  r.weight_check = log_concavity_test(omega, 1000, 0x5eed, slack);
  if (r.weight_check.failure_fraction > 1e-3) {
    throw DomainError("weight fails the sampled log-concavity test");
  }

  r.t0 = centering_root(p, f, omega, measure);
  Field centered(mesh, f.values().array() - r.t0);

  const auto rho_quad = quad_densities(mesh, measure);
  for (std::size_t qi = 0; qi < mesh.quad.size(); ++qi) {
    const auto& q = mesh.quad[qi];
    r.lhs += q.weight * rho_quad[qi] * omega.at(q) * std::pow(centered.gradient(q.element).norm(), pv);
  }
  // inf_t int |f - t|^p omega = inf_c int |f - c * 1|^p omega.
  const Field one(mesh, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(mesh.num_nodes())));
  QuadSamples s(centered, one, measure);
  for (std::size_t qi = 0; qi < mesh.quad.size(); ++qi) s.weight[qi] *= omega.at(mesh.quad[qi]);
  const DistanceResult d = minimize_shift(pv, s.weight, s.a, s.b);
  r.inf_integral = d.distance_p;
  r.t_star = d.c_star + r.t0;
  r.constant = std::pow(pi_p(p) / domain.diameter(), pv);
  r.ratio = r.inf_integral > 0.0 ? r.lhs / r.inf_integral : std::numeric_limits<double>::infinity();
  r.margin = r.lhs - r.constant * r.inf_integral;
  r.tol_quad = 1e-8 * r.lhs;
  r.passed = r.margin >= -r.tol_quad;
  return r;
}

PiconeReport picone_check(Exponent p, const Field& u, const Field& phi, std::size_t samples, std::uint64_t seed) {
  const Mesh& mesh = u.mesh();
  const double pv = p.value();
  std::vector<std::size_t> order(mesh.quad.size());
  std::iota(order.begin(), order.end(), 0);
  if (samples < order.size()) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(samples);
  }
  const double floor = 1e-10 * phi.values().cwiseAbs().maxCoeff();
  PiconeReport out;
  for (std::size_t qi : order) {
    const auto& q = mesh.quad[qi];
    const double uq = u.at(q);
    const double fq = phi.at(q);
    if (!(std::abs(fq) >= floor) || fq == 0.0) {
      ++out.skipped;
      continue;
    }
    const Point2 gu = u.gradient(q.element);
    const Point2 gf = phi.gradient(q.element);
    const Point2 eta = gu - (uq / fq) * gf;
    const double c = cp_raw(pv, std::span<const double>(gu.data(), mesh.dim),
                            std::span<const double>(eta.data(), mesh.dim));

    // grad(|u|^p / h) with h = |phi|^{p-2} phi, grad h = (p-1)|phi|^{p-2} grad phi.
    const double h = signed_pow(fq, pv - 1.0);
    const Point2 grad_ratio = (pv * signed_pow(uq, pv - 1.0) / h) * gu -
                              ((pv - 1.0) * std::pow(std::abs(uq), pv) * std::pow(std::abs(fq), pv - 2.0) / (h * h)) * gf;
    const double gf_norm = gf.norm();
    const double pairing_weight = gf_norm > 0.0 ? std::pow(gf_norm, pv - 2.0) : 0.0;
    const double rp = std::pow(gu.norm(), pv) - pairing_weight * grad_ratio.dot(gf);

    const double residual = std::abs(c - rp);
    const double scale = std::pow(gu.norm(), pv) + std::pow((gu - eta).norm(), pv);
    ++out.samples;
    out.max_abs_residual = std::max(out.max_abs_residual, residual);
    if (scale > 0.0) out.max_scaled_residual = std::max(out.max_scaled_residual, residual / scale);
  }
  return out;
}

GapReport gap_report(Exponent p, const Domain& domain, const EigenPair& first, const EigenPair& second,
                     const Measure& measure, double constant_factor) {
  GapReport r;
  r.p = p.value();
  r.diameter = domain.diameter();
  r.lambda1 = first.lambda;
  r.lambda2 = second.lambda;
  r.lambda2_is_upper_bound = second.is_upper_bound;
  r.estimator = to_string(second.estimator);
  r.c_value = distance_to_eigenspace(p, second.field, first.field, measure).distance_p;
  r.constant = constant_factor * stability_constant(p, r.diameter);
  r.bound = r.constant * r.c_value;
  r.gap = r.lambda2 - r.lambda1;
  r.margin = r.gap - r.bound;
  r.tol = 1e-8 * std::max(r.lambda2, 1.0);
  r.passed = r.margin >= -r.tol;
  r.verdict = r.lambda2_is_upper_bound ? "empirical" : "verified";
  r.measure = measure.name();
  return r;
}

GapReport gap_check(Exponent p, const Domain& domain, const Mesh& mesh, const Measure& measure,
                    const SolverOptions& opts, const CutSweepOptions& cuts) {
  const EigenPair first = first_eigenpair(p, mesh, measure, opts);
  if (!first.converged) throw SolverError("first eigenpair did not converge");
  const EigenPair second = second_eigenvalue(p, mesh, measure, first, opts, cuts);
  return gap_report(p, domain, first, second, measure);
}

}  // namespace pstab
