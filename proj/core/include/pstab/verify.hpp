#pragma once

// Numerical checks of the Poincare deficit identity, the stability
// inequalities (Lebesgue and Gaussian), the weighted Poincare step, the Picone
// identity and the fundamental-gap bounds.

#include <cstddef>
#include <cstdint>
#include <string>

#include "pstab/exponent.hpp"
#include "pstab/geometry.hpp"
#include "pstab/spectral.hpp"

namespace pstab {

/// 2^{2-p} (pi_p / diameter)^p.
double stability_constant(Exponent p, double diameter);

/// Quadrature slack 1e-8 * int |grad u|^p dmeasure.
double quadrature_tolerance(Exponent p, const Field& u, const Measure& measure);

/// Interior values i.i.d. uniform on [-1, 1] from `seed`, followed by
/// `smoothing_passes` Jacobi sweeps (each interior value replaced by the mean
/// of its mesh neighbours). Boundary values are 0.
Field random_zero_trace_field(const Mesh& mesh, std::uint64_t seed, int smoothing_passes = 2);

struct DistanceResult {
  double distance_p = 0.0;  ///< inf_c int |u - c u1|^p dmeasure
  double c_star = 0.0;
  double derivative = 0.0;  ///< d/dc at c_star
};

/// Minimizes the convex map c -> int |u - c u1|^p dmeasure: golden-section
/// bracketing, then a safeguarded Newton polish on the derivative.
DistanceResult distance_to_eigenspace(Exponent p, const Field& u, const Field& u1, const Measure& measure);

/// int |grad u|^p - lambda1 int |u|^p, both against `measure`.
double deficit(Exponent p, const Field& u, double lambda1, const Measure& measure);

struct RemainderResult {
  double value = 0.0;
  std::size_t excluded_points = 0;
  double excluded_mass_fraction = 0.0;
  bool boundary_layer_warning = false;  ///< excluded mass above 1%
};

/// int C_p(grad u, u1 grad(u/u1)) dmeasure. grad(u/u1) uses the quotient rule
/// on the P1 data at each quadrature point; points with u1 < 1e-10 max u1 are
/// skipped and their mass recorded.
RemainderResult cp_remainder(Exponent p, const Field& u, const Field& u1, const Measure& measure);

struct IdentityResult {
  double deficit = 0.0;
  double remainder = 0.0;
  double residual = 0.0;  ///< |deficit - remainder| / max(deficit, tol_quad)
  bool boundary_layer_warning = false;
};

IdentityResult identity_check(Exponent p, const Field& u, const Field& u1, double lambda1,
                              const Measure& measure);

struct StabilityReport {
  double p = 0.0;
  double diameter = 0.0;
  double lambda1 = 0.0;
  double deficit = 0.0;
  double distance_p = 0.0;
  double c_star = 0.0;
  double constant = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tol_quad = 0.0;
  bool passed = false;
  std::string measure;
  /// False for Lebesgue runs on polygons, which lie outside the smooth-boundary
  /// hypothesis of the Euclidean stability bound.
  bool within_hypotheses = true;
};

/// Full report for one trial field. Solves for (lambda1, u1) unless `cached`
/// is given. `constant_factor` scales the constant (1 in normal use).
StabilityReport stability_check(Exponent p, const Domain& domain, const Mesh& mesh, const Field& u,
                                const Measure& measure, const EigenPair* cached = nullptr,
                                const SolverOptions& opts = {}, double constant_factor = 1.0);

/// Root t0 of g(t) = int |f - t|^{p-2} (f - t) omega dmeasure, with omega the
/// P1 interpolant of `weight`, by bisection on [min f, max f].
double centering_root(Exponent p, const Field& f, const Field& weight,
                      const Measure& measure = Measure::lebesgue());

struct LogConcavityReport {
  std::size_t pairs = 0;
  std::size_t failures = 0;
  double failure_fraction = 0.0;
  double max_violation = 0.0;
  double slack = 0.0;
};

/// Midpoint test log u((x+y)/2) >= (log u(x) + log u(y))/2 - slack on random
/// pairs of nodes where u > 0; u is evaluated at the midpoint by P1
/// interpolation.
LogConcavityReport log_concavity_test(const Field& u, std::size_t pairs, std::uint64_t seed, double slack);

struct WeightedPoincareReport {
  double t0 = 0.0;
  double lhs = 0.0;           ///< int |grad f|^p omega
  double inf_integral = 0.0;  ///< inf_t int |f - t|^p omega
  double t_star = 0.0;
  double constant = 0.0;      ///< (pi_p / diam)^p
  double ratio = 0.0;         ///< lhs / inf_integral
  double margin = 0.0;        ///< lhs - constant * inf_integral
  double tol_quad = 0.0;
  bool passed = false;
  LogConcavityReport weight_check;
};

/// int |grad f|^p omega >= (pi_p/diam)^p inf_t int |f - t|^p omega, after
/// centering f by `centering_root`. Throws DomainError if omega fails the
/// sampled log-concavity test (more than 0.1% failing pairs at slack
/// `log_slack`; negative means the mesh size).
WeightedPoincareReport weighted_poincare_check(Exponent p, const Domain& domain, const Field& f,
                                               const Field& omega, const Measure& measure = Measure::lebesgue(),
                                               double log_slack = -1.0);

struct PiconeReport {
  double max_abs_residual = 0.0;
  double max_scaled_residual = 0.0;  ///< residual / (|xi|^p + |xi - eta|^p) per point
  std::size_t samples = 0;
  std::size_t skipped = 0;           ///< |phi| below floor
};

/// Compares C_p(xi, eta) with R_p = |grad u|^p - |grad phi|^{p-2}
/// <grad(|u|^p / (|phi|^{p-2} phi)), grad phi> at up to `samples` quadrature
/// points drawn with `seed`, where xi = grad u, eta = grad u - (grad phi/phi) u.
PiconeReport picone_check(Exponent p, const Field& u, const Field& phi, std::size_t samples,
                          std::uint64_t seed);

struct GapReport {
  double p = 0.0;
  double diameter = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool lambda2_is_upper_bound = false;
  std::string estimator;
  double c_value = 0.0;  ///< inf_c int |u2 - c u1|^p with normalized eigenfunctions
  double constant = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  double margin = 0.0;
  double tol = 0.0;
  bool passed = false;
  std::string verdict;  ///< "verified" or "empirical"
  std::string measure;
};

/// Gap report from precomputed normalized eigenpairs.
GapReport gap_report(Exponent p, const Domain& domain, const EigenPair& first, const EigenPair& second,
                     const Measure& measure, double constant_factor = 1.0);

/// Solves for both eigenpairs and reports lambda2 - lambda1 against
/// 2^{2-p} (pi_p/diam)^p C(p, Omega, u1, u2).
GapReport gap_check(Exponent p, const Domain& domain, const Mesh& mesh, const Measure& measure,
                    const SolverOptions& opts = {}, const CutSweepOptions& cuts = {});

}  // namespace pstab
