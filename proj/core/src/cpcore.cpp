#include "pstab/cpcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace pstab {
namespace {

// Nodes and weights of the n-point Gauss-Legendre rule on [0, 1].
void gauss_legendre_unit(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    x[i] = 0.5 * (1.0 - z);
    x[n - 1 - i] = 0.5 * (1.0 + z);
    w[i] = 0.5 * weight;
    w[n - 1 - i] = 0.5 * weight;
  }
}

template <class F>
double gauss_legendre_sum(const std::vector<double>& x, const std::vector<double>& w, F&& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * f(x[i]);
  return sum;
}

// (1 + q)^{p/2} - 1 - p s with q = t^2 + s^2 + 2 s, accurate near the origin.
double ratio_numerator(double p, double s, double t) {
  const double q = t * t + s * s + 2.0 * s;
  return std::expm1(0.5 * p * std::log1p(q)) - p * s;
}

using Point = SamplingGrid::Point;

// Compass search on `objective` starting at `start`; returns the best value
// seen. `sign` = +1 minimizes, -1 maximizes.
template <class F>
double compass_refine(F&& objective, Point& best, double best_value, double sign,
                      std::size_t& evaluations) {
  double radius = std::hypot(best.s, best.t);
  double step = 0.25 * std::max(radius, 1e-6);
  const double floor_step = 1e-12 * std::max(radius, 1e-6);
  static constexpr double dirs[8][2] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1},
                                        {1, 1},  {1, -1}, {-1, 1}, {-1, -1}};
  for (int iter = 0; iter < 4000 && step > floor_step; ++iter) {
    bool moved = false;
    for (const auto& d : dirs) {
      const Point trial{best.s + step * d[0], best.t + step * d[1]};
      if (trial.s == 0.0 && trial.t == 0.0) continue;
      const double value = objective(trial.s, trial.t);
      ++evaluations;
      if (std::isfinite(value) && sign * value < sign * best_value) {
        best_value = value;
        best = trial;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  return best_value;
}

void check_grid(const SamplingGrid& grid) {
  if (grid.points.empty()) throw DomainError("sampling grid is empty");
  for (const auto& pt : grid.points) {
    if (pt.s == 0.0 && pt.t == 0.0) throw DomainError("sampling grid contains the origin");
  }
}

}  // namespace

double pi_p(Exponent p) {
  const double pv = p.value();
  return 2.0 * std::numbers::pi * std::pow(pv - 1.0, 1.0 / pv) /
         (pv * std::sin(std::numbers::pi / pv));
}

double pi_p_quadrature(Exponent p, double tol) {
  const double pv = p.value();
  // int_0^1 ds / (1 + s^p/(p-1))  +  int_0^1 dw / (1 + (p-1) w^{p/(p-1)}),
  // the second from s = 1/v, v = w^{1/(p-1)} applied to the tail [1, inf).
  const double tail_exponent = pv / (pv - 1.0);
  auto evaluate = [&](int order) {
    std::vector<double> x, w;
    gauss_legendre_unit(order, x, w);
    const double head =
        gauss_legendre_sum(x, w, [&](double s) { return 1.0 / (1.0 + std::pow(s, pv) / (pv - 1.0)); });
    const double tail = gauss_legendre_sum(
        x, w, [&](double v) { return 1.0 / (1.0 + (pv - 1.0) * std::pow(v, tail_exponent)); });
    return 2.0 * (head + tail);
  };
  double previous = evaluate(8);
  for (int order = 16; order <= 8192; order *= 2) {
    const double current = evaluate(order);
    if (std::abs(current - previous) <= tol) return current;
    previous = current;
  }
  std::ostringstream msg;
  msg << "pi_p quadrature did not reach tolerance " << tol << " for p = " << pv;
  throw SolverError(msg.str());
}

C1Result c1_sharp(Exponent p) {
  p.require_at_least_two("c1_sharp");
  const double pv = p.value();
  C1Result out;
  out.lower = std::pow(2.0, 2.0 - pv);
  out.upper = (pv - 1.0) * out.lower;
  if (pv == 2.0) {
    // The root equation degenerates to 0 = 0; r0 and k0 are reported as 0.
    out.c1 = 1.0;
    out.c1_k0_form = 1.0;
    return out;
  }

  auto f = [pv](double r) { return std::pow(r, pv - 1.0) - (pv - 1.0) * r - (pv - 2.0); };
  auto df = [pv](double r) { return (pv - 1.0) * (std::pow(r, pv - 2.0) - 1.0); };

  // f(1) = 2(2-p) < 0 and f is increasing on (1, inf).
  double lo = 1.0;
  double hi = 2.0;
  while (f(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  double r = std::clamp(pv, lo, hi);
  if (r == lo || r == hi) r = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fr = f(r);
    const double dfr = df(r);
    if (std::abs(fr) <= 1e-12 * std::max(1.0, dfr)) break;
    if (fr < 0.0) lo = r; else hi = r;
    double next = (dfr > 0.0) ? r - fr / dfr : lo - 1.0;
    if (next <= lo || next >= hi) {
      next = 0.5 * (lo + hi);
      ++out.bisection_steps;
    } else {
      ++out.newton_steps;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      r = next;
      break;
    }
    r = next;
  }
  out.r0 = r;
  out.root_residual = f(r);
  out.k0 = r / (1.0 + r);
  out.c1 = (pv - 1.0) * std::pow(r + 1.0, 2.0 - pv);
  const double one_minus_k = 1.0 / (1.0 + r);
  out.c1_k0_form = (pv - 1.0) * std::pow(one_minus_k, pv) +
                   pv * out.k0 * std::pow(one_minus_k, pv - 1.0) + std::pow(out.k0, pv);
  return out;
}

SamplingGrid SamplingGrid::log_polar(int radii, int angles, double rmin, double rmax) {
  if (radii < 1 || angles < 1 || !(rmin > 0.0) || !(rmax >= rmin)) {
    throw DomainError("log-polar grid needs radii, angles >= 1 and 0 < rmin <= rmax");
  }
  SamplingGrid grid;
  grid.points.reserve(static_cast<std::size_t>(radii) * angles);
  const double log_ratio = std::log(rmax / rmin);
  for (int i = 0; i < radii; ++i) {
    const double r = radii == 1 ? rmin : rmin * std::exp(log_ratio * i / (radii - 1));
    for (int j = 0; j < angles; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / angles;
      grid.points.push_back({r * std::cos(theta), r * std::sin(theta)});
    }
  }
  return grid;
}

SamplingGrid SamplingGrid::tensor(std::span<const double> values) {
  SamplingGrid grid;
  grid.refine = false;
  for (double s : values) {
    for (double t : values) {
      if (s == 0.0 && t == 0.0) continue;
      grid.points.push_back({s, t});
    }
  }
  return grid;
}

SamplingGrid SamplingGrid::single(double s, double t) {
  SamplingGrid grid;
  grid.refine = false;
  grid.points.push_back({s, t});
  return grid;
}

double c1_ratio(double p, double s, double t) {
  const double r2 = s * s + t * t;
  return ratio_numerator(p, s, t) / std::pow(r2, 0.5 * p);
}

double c23_ratio(double p, double s, double t) {
  const double r2 = s * s + t * t;
  const double q = t * t + s * s + 2.0 * s;
  const double denom = std::pow(std::sqrt(std::max(0.0, 1.0 + q)) + 1.0, p - 2.0) * r2;
  return ratio_numerator(p, s, t) / denom;
}

VariationalResult c1_variational(Exponent p, const SamplingGrid& grid) {
  p.require_at_least_two("c1_variational");
  check_grid(grid);
  const double pv = p.value();
  VariationalResult out;
  out.value = std::numeric_limits<double>::infinity();
  for (const auto& pt : grid.points) {
    const double v = c1_ratio(pv, pt.s, pt.t);
    ++out.evaluations;
    if (v < out.value) {
      out.value = v;
      out.s = pt.s;
      out.t = pt.t;
    }
  }
  if (grid.refine) {
    Point best{out.s, out.t};
    out.value = compass_refine([pv](double s, double t) { return c1_ratio(pv, s, t); }, best,
                               out.value, 1.0, out.evaluations);
    out.s = best.s;
    out.t = best.t;
  }
  return out;
}

C23Estimate c2_c3_estimate(Exponent p, const SamplingGrid& grid) {
  p.require_below_two("c2_c3_estimate");
  check_grid(grid);
  const double pv = p.value();
  C23Estimate out;
  out.c2_est = std::numeric_limits<double>::infinity();
  out.c3_est = -std::numeric_limits<double>::infinity();
  auto visit = [&](const Point& pt) {
    const double v = c23_ratio(pv, pt.s, pt.t);
    ++out.evaluations;
    if (!std::isfinite(v)) return;
    if (v < out.c2_est) {
      out.c2_est = v;
      out.c2_at = pt;
    }
    if (v > out.c3_est) {
      out.c3_est = v;
      out.c3_at = pt;
    }
  };
  for (const auto& pt : grid.points) visit(pt);
  if (grid.refine) {
    const auto far = SamplingGrid::log_polar(6, 256, 1e4, 1e9);
    for (const auto& pt : far.points) visit(pt);
    auto ratio = [pv](double s, double t) { return c23_ratio(pv, s, t); };
    Point lo = out.c2_at;
    out.c2_est = compass_refine(ratio, lo, out.c2_est, 1.0, out.evaluations);
    out.c2_at = lo;
    Point hi = out.c3_at;
    out.c3_est = compass_refine(ratio, hi, out.c3_est, -1.0, out.evaluations);
    out.c3_at = hi;
  }
  return out;
}

double cp_raw(double p, std::span<const double> xi, std::span<const double> eta) {
  double xi2 = 0.0;
  double diff2 = 0.0;
  double pairing = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double a = xi[i] - eta[i];
    xi2 += xi[i] * xi[i];
    diff2 += a * a;
    pairing += a * eta[i];
  }
  const double xi_p = std::pow(xi2, 0.5 * p);
  if (diff2 == 0.0) return xi_p;
  return xi_p - std::pow(diff2, 0.5 * p) - p * std::pow(diff2, 0.5 * (p - 2.0)) * pairing;
}

namespace {

CpValue clamp_cp(double value, double scale) {
  CpValue out{value, false};
  if (value < 0.0 && value > -1e-12 * std::max(scale, std::numeric_limits<double>::min())) {
    out.value = 0.0;
    out.clamped = true;
  }
  return out;
}

}  // namespace

CpValue cp_eval(Exponent p, std::span<const double> xi, std::span<const double> eta) {
  if (xi.size() != eta.size()) throw DomainError("cp_eval: xi and eta differ in dimension");
  double xi2 = 0.0;
  double eta2 = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    xi2 += xi[i] * xi[i];
    eta2 += eta[i] * eta[i];
  }
  const double pv = p.value();
  const double scale = std::pow(xi2, 0.5 * pv) + std::pow(eta2, 0.5 * pv);
  return clamp_cp(cp_raw(pv, xi, eta), scale);
}

CpValue cp_eval(Exponent p, std::span<const std::complex<double>> xi,
                std::span<const std::complex<double>> eta) {
  if (xi.size() != eta.size()) throw DomainError("cp_eval: xi and eta differ in dimension");
  // C^n as R^{2n}: Re(a conj(b)) = Re a Re b + Im a Im b.
  std::vector<double> x(2 * xi.size());
  std::vector<double> e(2 * xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    x[2 * i] = xi[i].real();
    x[2 * i + 1] = xi[i].imag();
    e[2 * i] = eta[i].real();
    e[2 * i + 1] = eta[i].imag();
  }
  return cp_eval(p, std::span<const double>(x), std::span<const double>(e));
}

}  // namespace pstab
