#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oracle {

double pi_p_double_exponential(double p) {
  // s = exp(pi/2 sinh t) maps R onto (0, inf).
  const double h = 1.0 / 64.0;
  const auto integrand = [p](double s) { return 1.0 / (1.0 + std::pow(s, p) / (p - 1.0)); };
  double sum = 0.0;
  for (int k = -640; k <= 640; ++k) {
    const double t = k * h;
    const double arg = 0.5 * std::numbers::pi * std::sinh(t);
    if (arg > 700.0 || arg < -700.0) continue;
    const double s = std::exp(arg);
    const double ds = s * 0.5 * std::numbers::pi * std::cosh(t);
    sum += integrand(s) * ds;
  }
  return 2.0 * h * sum;
}

double gaussian_mass_1d(double a, double b) {
  return 0.5 * (std::erf(b / std::numbers::sqrt2) - std::erf(a / std::numbers::sqrt2));
}

double gaussian_mass_box(double a1, double b1, double a2, double b2) {
  return gaussian_mass_1d(a1, b1) * gaussian_mass_1d(a2, b2);
}

namespace {

// State (u, w) with w = rho |u'|^{p-2} u', so u' = sign(w)|w/rho|^{1/(p-1)} and w' = -lambda rho |u|^{p-2} u.
struct State {
  double u;
  double w;
};

double density(double x, bool gaussian) {
  return gaussian ? std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi) : 1.0;
}

State rhs(double p, double lambda, bool gaussian, double x, State s) {
  const double rho = density(x, gaussian);
  const double du = std::copysign(std::pow(std::abs(s.w) / rho, 1.0 / (p - 1.0)), s.w);
  const double dw = -lambda * rho * std::copysign(std::pow(std::abs(s.u), p - 1.0), s.u);
  return {du, dw};
}

// True when u changes sign inside (a, b], i.e. lambda lies above the first eigenvalue.
bool overshoots(double p, double lambda, double a, double b, bool gaussian, int steps) {
  const double h = (b - a) / steps;
  State s{0.0, density(a, gaussian)};
  for (int i = 0; i < steps; ++i) {
    const double x = a + i * h;
    const State k1 = rhs(p, lambda, gaussian, x, s);
    const State k2 = rhs(p, lambda, gaussian, x + 0.5 * h, {s.u + 0.5 * h * k1.u, s.w + 0.5 * h * k1.w});
    const State k3 = rhs(p, lambda, gaussian, x + 0.5 * h, {s.u + 0.5 * h * k2.u, s.w + 0.5 * h * k2.w});
    const State k4 = rhs(p, lambda, gaussian, x + h, {s.u + h * k3.u, s.w + h * k3.w});
    s.u += h / 6.0 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u);
    s.w += h / 6.0 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w);
    if (s.u < 0.0) return true;
  }
  return false;
}

}  // namespace

double shooting_lambda1(double p, double a, double b, bool gaussian, int steps) {
  double lo = 1e-6;
  double hi = 1.0;
  while (!overshoots(p, hi, a, b, gaussian, steps)) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (overshoots(p, mid, a, b, gaussian, steps) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double centering_scan(double p, const std::vector<double>& f, const std::vector<double>& w, int cells) {
  const auto g = [&](double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double d = f[i] - t;
      s += w[i] * std::copysign(std::pow(std::abs(d), p - 1.0), d);
    }
    return s;
  };
  const double fmin = *std::min_element(f.begin(), f.end());
  const double fmax = *std::max_element(f.begin(), f.end());
  double a = fmin;
  double ga = g(a);
  for (int i = 1; i <= cells; ++i) {
    double b = fmin + (fmax - fmin) * i / cells;
    const double gb = g(b);
    if (ga == 0.0) return a;
    if ((ga > 0.0) != (gb > 0.0)) {
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if ((gm > 0.0) == (ga > 0.0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      return 0.5 * (a + b);
    }
    a = b;
    ga = gb;
  }
  return fmax;
}

double picone_rhs_fd(double p, const std::function<double(std::array<double, 2>)>& u,
                     const std::function<double(std::array<double, 2>)>& phi, std::array<double, 2> x,
                     double h) {
  const auto psi = [&](std::array<double, 2> y) {
    const double ph = phi(y);
    return std::pow(std::abs(u(y)), p) / (std::pow(std::abs(ph), p - 2.0) * ph);
  };
  const auto grad = [&](const std::function<double(std::array<double, 2>)>& f) {
    std::array<double, 2> g{};
    for (int d = 0; d < 2; ++d) {
      auto at = [&](double off) {
        std::array<double, 2> y = x;
        y[d] += off;
        return f(y);
      };
      g[d] = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
    }
    return g;
  };
  const auto gu = grad(u);
  const auto gphi = grad(phi);
  const auto gpsi = grad(psi);
  const double nu = std::hypot(gu[0], gu[1]);
  const double nphi = std::hypot(gphi[0], gphi[1]);
  return std::pow(nu, p) - std::pow(nphi, p - 2.0) * (gpsi[0] * gphi[0] + gpsi[1] * gphi[1]);
}

double cp_direct(double p, std::array<double, 2> xi, std::array<double, 2> eta) {
  const double a0 = xi[0] - eta[0];
  const double a1 = xi[1] - eta[1];
  const double na = std::hypot(a0, a1);
  const double nx = std::hypot(xi[0], xi[1]);
  const double pair = a0 * eta[0] + a1 * eta[1];
  const double corr = na == 0.0 ? 0.0 : p * std::pow(na, p - 2.0) * pair;
  return std::pow(nx, p) - std::pow(na, p) - corr;
}

}  // namespace oracle
