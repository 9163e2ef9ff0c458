#pragma once

// First and second Dirichlet eigenpairs of the (Gaussian) p-Laplacian on a
// P1 mesh by Rayleigh-quotient minimization.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pstab/exponent.hpp"
#include "pstab/geometry.hpp"

namespace pstab {

struct SolverOptions {
  /// Regularization schedule eps_k; the last entry is used once exhausted.
  std::vector<double> epsilon_schedule = default_epsilon_schedule();
  int max_iterations = 3000;
  /// Stop once the relative Rayleigh-quotient decrease falls below this
  /// (after the schedule has reached its floor).
  double rq_tolerance = 1e-12;
  double cg_tolerance = 1e-10;
  std::uint64_t seed = 1;

  /// eps_k = max(1e-8, 1e-2 * 2^{-k}).
  static std::vector<double> default_epsilon_schedule();
  /// Throws DomainError when the invariants do not hold.
  void validate() const;
};

enum class SecondEstimator { None, Deflation, NodalCut };

std::string to_string(SecondEstimator estimator);

struct EigenPair {
  double lambda = 0.0;
  Field field;
  std::vector<double> residual_history;  ///< Rayleigh quotient after each accepted step
  int iterations = 0;
  bool normalized = false;
  bool converged = false;
  SecondEstimator estimator = SecondEstimator::None;
  bool is_upper_bound = false;  ///< set when lambda only bounds the eigenvalue from above
  /// Nodal-cut estimator: the winning cut {x . direction = offset}.
  double cut_angle = 0.0;
  double cut_offset = 0.0;
};

/// int |grad u|^p dmeasure.
double gradient_energy(Exponent p, const Field& u, const Measure& measure);
/// int |u|^p dmeasure.
double lp_power(Exponent p, const Field& u, const Measure& measure);
/// int |grad u|^p / int |u|^p. Throws DomainError on a zero denominator.
double rayleigh_quotient(Exponent p, const Field& u, const Measure& measure);
/// Rescales u to unit L^p(measure) norm.
void normalize_lp(Exponent p, Field& u, const Measure& measure);

/// Nodal distance to the nearest boundary node; positive and zero-trace.
Field distance_initial_guess(const Mesh& mesh);

/// Lagged-diffusivity inverse iteration for lambda_1. Returns with
/// `converged == false` (and the history) if `max_iterations` is exhausted.
/// Throws DomainError when the mesh has no interior node.
EigenPair first_eigenpair(Exponent p, const Mesh& mesh, const Measure& measure,
                          const SolverOptions& opts = {});

/// Sub-mesh made of the elements flagged in `keep`; nodes shared with dropped
/// elements become boundary nodes. `node_map[i]` is the parent index of
/// sub-mesh node i.
struct SubMesh {
  Mesh mesh;
  std::vector<int> node_map;
};
SubMesh extract_submesh(const Mesh& mesh, const std::vector<bool>& keep);

struct CutSweepOptions {
  int directions = 32;
  int offsets = 64;
  /// false: locate the balanced cut per direction by bisection on the offset
  /// index (lambda of each side is monotone in the offset); true: evaluate
  /// every offset.
  bool exhaustive = false;
};

/// lambda_2. p == 2: inverse iteration deflated against u1 in the measure
/// inner product. Otherwise the nodal-cut estimator, an upper bound.
EigenPair second_eigenvalue(Exponent p, const Mesh& mesh, const Measure& measure,
                            const EigenPair& u1, const SolverOptions& opts = {},
                            const CutSweepOptions& cuts = {});

/// The nodal-cut estimator alone (also valid at p == 2).
EigenPair nodal_cut_estimate(Exponent p, const Mesh& mesh, const Measure& measure,
                             const SolverOptions& opts = {}, const CutSweepOptions& cuts = {});

}  // namespace pstab
