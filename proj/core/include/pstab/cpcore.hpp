#pragma once

// Constants of the L^p-Poincare stability theory: the generalized pi_p, the
// sharp constant c1(p) for p >= 2, sampled c2(p)/c3(p) for 1 < p < 2, and the
// C_p functional itself.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "pstab/exponent.hpp"

namespace pstab {

/// pi_p = 2 pi (p-1)^{1/p} / (p sin(pi/p)).
double pi_p(Exponent p);

/// pi_p from its defining integral 2 int_0^inf (1 + s^p/(p-1))^{-1} ds.
/// The half-line is split at s = 1 and the tail mapped to [0,1]; both pieces
/// use Gauss-Legendre, doubling the order until two successive orders agree
/// to `tol`.
double pi_p_quadrature(Exponent p, double tol = 1e-10);

struct C1Result {
  double r0 = 0.0;  ///< root of r^{p-1} - (p-1) r - (p-2) = 0 (0 when p == 2)
  double k0 = 0.0;  ///< r0 / (1 + r0)
  double c1 = 0.0;  ///< (p-1)(r0+1)^{2-p}
  double c1_k0_form = 0.0;  ///< (p-1)(1-k0)^p + p k0 (1-k0)^{p-1} + k0^p
  double lower = 0.0;  ///< 2^{2-p}
  double upper = 0.0;  ///< (p-1) 2^{2-p}
  double root_residual = 0.0;
  int newton_steps = 0;
  int bisection_steps = 0;
};

/// Sharp constant of C_p(xi, eta) >= c1(p) |eta|^p. Requires p >= 2.
C1Result c1_sharp(Exponent p);

/// A finite set of sample points (s, t) in R^2 \ {0}.
struct SamplingGrid {
  struct Point {
    double s;
    double t;
  };
  std::vector<Point> points;
  /// Whether the variational searches may refine around their best sample.
  bool refine = true;

  /// Logarithmic-polar grid: `radii` radii log-spaced in [rmin, rmax] times
  /// `angles` equispaced angles.
  static SamplingGrid log_polar(int radii = 128, int angles = 256, double rmin = 1e-3,
                                double rmax = 1e3);
  /// Tensor grid {values} x {values}, origin dropped.
  static SamplingGrid tensor(std::span<const double> values);
  static SamplingGrid single(double s, double t);
};

struct VariationalResult {
  double value = 0.0;
  double s = 0.0;  ///< best sample
  double t = 0.0;
  std::size_t evaluations = 0;
};

/// [(t^2+s^2+2s+1)^{p/2} - 1 - p s] / (t^2+s^2)^{p/2}.
double c1_ratio(double p, double s, double t);
/// [(t^2+s^2+2s+1)^{p/2} - 1 - p s] / [(sqrt(t^2+s^2+2s+1)+1)^{p-2} (t^2+s^2)].
double c23_ratio(double p, double s, double t);

/// Sampled infimum of c1_ratio. An upper bound for c1(p) that converges to it
/// as the grid refines around the minimizer. Requires p >= 2.
VariationalResult c1_variational(Exponent p, const SamplingGrid& grid);

struct C23Estimate {
  double c2_est = 0.0;  ///< sampled inf: an upper bound for the true c2(p)
  double c3_est = 0.0;  ///< sampled sup: a lower bound for the true c3(p)
  SamplingGrid::Point c2_at{};
  SamplingGrid::Point c3_at{};
  bool c2_is_upper_bound = true;
  bool c3_is_lower_bound = true;
  std::size_t evaluations = 0;
};

/// Sampled inf/sup of c23_ratio for 1 < p < 2. When `grid.refine` is set the
/// search also probes |(s,t)| up to 1e9 to witness behaviour at infinity.
C23Estimate c2_c3_estimate(Exponent p, const SamplingGrid& grid);

struct CpValue {
  double value = 0.0;
  bool clamped = false;  ///< a rounding-level negative was reported as 0
};

/// C_p(xi, eta) = |xi|^p - |xi-eta|^p - p |xi-eta|^{p-2} <Re(xi-eta), conj(eta)>.
///
/// The pairing is sum_i Re(a_i conj(b_i)) with a = xi - eta, b = eta, i.e. the
/// real inner product of C^n viewed as R^{2n}. When xi == eta the whole
/// correction term is 0 (0^{p-2} * 0 := 0). Throws DomainError on size mismatch.
CpValue cp_eval(Exponent p, std::span<const std::complex<double>> xi,
                std::span<const std::complex<double>> eta);
CpValue cp_eval(Exponent p, std::span<const double> xi, std::span<const double> eta);

/// Unclamped real-vector kernel shared by the verification layer.
double cp_raw(double p, std::span<const double> xi, std::span<const double> eta);

}  // namespace pstab
