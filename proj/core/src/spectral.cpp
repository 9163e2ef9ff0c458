#include "pstab/spectral.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace pstab {
namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Maps mesh nodes to unknowns; boundary nodes map to -1.
struct DofMap {
  std::vector<int> index;
  std::vector<int> node;  // inverse map

  explicit DofMap(const Mesh& mesh) : index(mesh.num_nodes(), -1) {
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
      if (!mesh.boundary[i]) {
        index[i] = static_cast<int>(node.size());
        node.push_back(static_cast<int>(i));
      }
    }
  }
  Eigen::Index size() const { return static_cast<Eigen::Index>(node.size()); }

  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const {
    Eigen::VectorXd out(size());
    for (Eigen::Index k = 0; k < size(); ++k) out[k] = full[node[k]];
    return out;
  }
  Eigen::VectorXd extend(const Eigen::VectorXd& reduced, std::size_t n) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < size(); ++k) out[node[k]] = reduced[k];
    return out;
  }
};

// Precomputed per-mesh data shared across iterations.
struct Workspace {
  const Mesh& mesh;
  DofMap dofs;
  std::vector<double> rho_mass;  // int_e density
  std::vector<double> rho_quad;  // density at quadrature points

  Workspace(const Mesh& m, const Measure& measure)
      : mesh(m), dofs(m), rho_mass(element_density_mass(m, measure)), rho_quad(quad_densities(m, measure)) {}

  // int_e a_e grad(phi_i) . grad(phi_j) with a_e = element_weight[e] * rho_mass[e].
  SparseMatrix stiffness(const std::vector<double>& element_weight) const {
    std::vector<Triplet> triplets;
    const int npe = mesh.nodes_per_element();
    triplets.reserve(mesh.num_elements() * npe * npe);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      const auto& el = mesh.elements[e];
      const auto& g = mesh.geometry[e];
      const double a = element_weight[e] * rho_mass[e];
      for (int i = 0; i < npe; ++i) {
        const int ri = dofs.index[el[i]];
        if (ri < 0) continue;
        for (int j = 0; j < npe; ++j) {
          const int rj = dofs.index[el[j]];
          if (rj < 0) continue;
          triplets.emplace_back(ri, rj, a * g.grad_basis[i].dot(g.grad_basis[j]));
        }
      }
    }
    SparseMatrix k(dofs.size(), dofs.size());
    k.setFromTriplets(triplets.begin(), triplets.end());
    return k;
  }

  // Measure-weighted mass matrix from the element quadrature.
  SparseMatrix mass() const {
    std::vector<Triplet> triplets;
    const int npe = mesh.nodes_per_element();
    for (std::size_t qi = 0; qi < mesh.quad.size(); ++qi) {
      const auto& q = mesh.quad[qi];
      const auto& el = mesh.elements[q.element];
      const double w = q.weight * rho_quad[qi];
      for (int i = 0; i < npe; ++i) {
        const int ri = dofs.index[el[i]];
        if (ri < 0) continue;
        for (int j = 0; j < npe; ++j) {
          const int rj = dofs.index[el[j]];
          if (rj < 0) continue;
          triplets.emplace_back(ri, rj, w * q.bary[i] * q.bary[j]);
        }
      }
    }
    SparseMatrix m(dofs.size(), dofs.size());
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
  }

  // b_i = int |u|^{p-2} u phi_i dmeasure, restricted to unknowns.
  Eigen::VectorXd power_load(double p, const Field& u) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dofs.size());
    const int npe = mesh.nodes_per_element();
    for (std::size_t qi = 0; qi < mesh.quad.size(); ++qi) {
      const auto& q = mesh.quad[qi];
      const double uq = u.at(q);
      if (uq == 0.0) continue;
      const double f = q.weight * rho_quad[qi] * std::pow(std::abs(uq), p - 2.0) * uq;
      const auto& el = mesh.elements[q.element];
      for (int i = 0; i < npe; ++i) {
        const int ri = dofs.index[el[i]];
        if (ri >= 0) b[ri] += f * q.bary[i];
      }
    }
    return b;
  }

  double energy(double p, const Field& u) const {
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      sum += std::pow(u.gradient(static_cast<int>(e)).squaredNorm(), 0.5 * p) * rho_mass[e];
    }
    return sum;
  }

  double lp_power(double p, const Field& u) const {
    double sum = 0.0;
    for (std::size_t qi = 0; qi < mesh.quad.size(); ++qi) {
      sum += mesh.quad[qi].weight * rho_quad[qi] * std::pow(std::abs(u.at(mesh.quad[qi])), p);
    }
    return sum;
  }

  double rayleigh(double p, const Field& u) const { return energy(p, u) / lp_power(p, u); }

  void normalize(double p, Field& u) const { u.values() /= std::pow(lp_power(p, u), 1.0 / p); }
};

Eigen::VectorXd solve_spd(const SparseMatrix& a, const Eigen::VectorXd& b, const Eigen::VectorXd& guess,
                          double tol) {
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(std::max<Eigen::Index>(1000, 10 * a.rows()));
  cg.compute(a);
  Eigen::VectorXd x = cg.solveWithGuess(b, guess);
  if (cg.info() != Eigen::Success) throw SolverError("conjugate gradient did not converge");
  return x;
}

void sign_normalize(Field& u) {
  if (u.values().sum() < 0.0) u.values() = -u.values();
}

}  // namespace

std::vector<double> SolverOptions::default_epsilon_schedule() {
  std::vector<double> schedule;
  for (int k = 0;; ++k) {
    const double eps = std::max(1e-8, 1e-2 * std::ldexp(1.0, -k));
    schedule.push_back(eps);
    if (eps == 1e-8) break;
  }
  return schedule;
}

void SolverOptions::validate() const {
  if (epsilon_schedule.empty()) throw DomainError("epsilon schedule is empty");
  for (std::size_t i = 0; i < epsilon_schedule.size(); ++i) {
    if (!(epsilon_schedule[i] > 0.0)) throw DomainError("epsilon schedule must be positive");
    if (i > 0 && !(epsilon_schedule[i] < epsilon_schedule[i - 1])) {
      throw DomainError("epsilon schedule must be strictly decreasing");
    }
  }
  if (epsilon_schedule.back() < 1e-10) throw DomainError("epsilon floor must be >= 1e-10");
  if (max_iterations < 1) throw DomainError("max_iterations must be positive");
  if (!(rq_tolerance > 0.0) || !(cg_tolerance > 0.0)) throw DomainError("tolerances must be positive");
}

std::string to_string(SecondEstimator estimator) {
  switch (estimator) {
    case SecondEstimator::None: return "none";
    case SecondEstimator::Deflation: return "deflation";
    case SecondEstimator::NodalCut: return "nodal_cut";
  }
  return "unknown";
}

double gradient_energy(Exponent p, const Field& u, const Measure& measure) {
  const Mesh& mesh = u.mesh();
  const auto rho_mass = element_density_mass(mesh, measure);
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    sum += std::pow(u.gradient(static_cast<int>(e)).squaredNorm(), 0.5 * p.value()) * rho_mass[e];
  }
  return sum;
}

double lp_power(Exponent p, const Field& u, const Measure& measure) {
  const double pv = p.value();
  return integrate(u.mesh(), measure, [&](const QuadPoint& q) { return std::pow(std::abs(u.at(q)), pv); });
}

double rayleigh_quotient(Exponent p, const Field& u, const Measure& measure) {
  const double denom = lp_power(p, u, measure);
  if (!(denom > 0.0)) throw DomainError("Rayleigh quotient of the zero function");
  return gradient_energy(p, u, measure) / denom;
}

void normalize_lp(Exponent p, Field& u, const Measure& measure) {
  const double norm_p = lp_power(p, u, measure);
  if (!(norm_p > 0.0)) throw DomainError("cannot normalize the zero function");
  u.values() /= std::pow(norm_p, 1.0 / p.value());
}

Field distance_initial_guess(const Mesh& mesh) {
  std::vector<Point2> boundary_nodes;
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    if (mesh.boundary[i]) boundary_nodes.push_back(mesh.nodes[i]);
  }
  Field u = Field::zero(mesh);
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    if (mesh.boundary[i]) continue;
    double d = std::numeric_limits<double>::infinity();
    for (const auto& b : boundary_nodes) d = std::min(d, (mesh.nodes[i] - b).norm());
    u.values()[static_cast<Eigen::Index>(i)] = d;
  }
  return u;
}

EigenPair first_eigenpair(Exponent p, const Mesh& mesh, const Measure& measure, const SolverOptions& opts) {
  opts.validate();
  if (mesh.num_interior() == 0) throw DomainError("mesh has no interior node");
  const double pv = p.value();
  const Workspace ws(mesh, measure);

  EigenPair out;
  out.field = distance_initial_guess(mesh);
  ws.normalize(pv, out.field);
  double rq = ws.rayleigh(pv, out.field);
  out.residual_history.push_back(rq);

  const bool linear = pv == 2.0;
  const int floor_index = static_cast<int>(opts.epsilon_schedule.size()) - 1;
  Eigen::VectorXd guess = ws.dofs.restrict(out.field.values());

  for (int k = 0; k < opts.max_iterations; ++k) {
    const double eps = opts.epsilon_schedule[std::min(k, floor_index)];
    const bool at_floor = linear || k >= floor_index;

    std::vector<double> weight(mesh.num_elements(), 1.0);
    if (!linear) {
      for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double g2 = out.field.gradient(static_cast<int>(e)).squaredNorm();
        weight[e] = std::pow(g2 + eps * eps, 0.5 * (pv - 2.0));
      }
    }
    const SparseMatrix stiffness = ws.stiffness(weight);
    const Eigen::VectorXd load = ws.power_load(pv, out.field);
    const Eigen::VectorXd solution = solve_spd(stiffness, load, guess, opts.cg_tolerance);

    Field candidate(mesh, ws.dofs.extend(solution, mesh.num_nodes()));
    ws.normalize(pv, candidate);
    double candidate_rq = ws.rayleigh(pv, candidate);

    // Backtrack toward the current iterate until the quotient does not grow.
    if (!(candidate_rq <= rq)) {
      const Eigen::VectorXd direction = candidate.values() - out.field.values();
      bool improved = false;
      for (double alpha = 0.5; alpha > 1e-6; alpha *= 0.5) {
        Field trial(mesh, out.field.values() + alpha * direction);
        ws.normalize(pv, trial);
        const double trial_rq = ws.rayleigh(pv, trial);
        if (trial_rq <= rq) {
          candidate = std::move(trial);
          candidate_rq = trial_rq;
          improved = true;
          break;
        }
      }
      if (!improved) {
        out.iterations = k + 1;
        if (at_floor) {
          out.converged = true;
          break;
        }
        continue;
      }
    }

    const double decrease = (rq - candidate_rq) / rq;
    out.field = std::move(candidate);
    rq = candidate_rq;
    out.residual_history.push_back(rq);
    out.iterations = k + 1;
    guess = solution;
    if (at_floor && decrease <= opts.rq_tolerance) {
      out.converged = true;
      break;
    }
  }

  sign_normalize(out.field);
  ws.normalize(pv, out.field);
  out.lambda = ws.rayleigh(pv, out.field);
  out.normalized = true;
  return out;
}

SubMesh extract_submesh(const Mesh& mesh, const std::vector<bool>& keep) {
  SubMesh sub;
  sub.mesh.dim = mesh.dim;
  sub.mesh.refinement_level = mesh.refinement_level;
  std::vector<int> used(mesh.num_nodes(), 0);
  std::vector<bool> touches_dropped(mesh.num_nodes(), false);
  const int npe = mesh.nodes_per_element();
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    for (int i = 0; i < npe; ++i) {
      if (keep[e]) used[mesh.elements[e][i]] = 1;
      else touches_dropped[mesh.elements[e][i]] = true;
    }
  }
  std::vector<int> local(mesh.num_nodes(), -1);
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    if (!used[i]) continue;
    local[i] = static_cast<int>(sub.node_map.size());
    sub.node_map.push_back(static_cast<int>(i));
    sub.mesh.nodes.push_back(mesh.nodes[i]);
    sub.mesh.boundary.push_back(mesh.boundary[i] || touches_dropped[i]);
  }
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    if (!keep[e]) continue;
    const auto& el = mesh.elements[e];
    sub.mesh.elements.push_back({local[el[0]], local[el[1]], npe == 3 ? local[el[2]] : 0});
  }
  sub.mesh.finalize();
  return sub;
}

namespace {

struct CutResult {
  bool valid = false;
  double lambda_plus = std::numeric_limits<double>::infinity();
  double lambda_minus = std::numeric_limits<double>::infinity();
  Eigen::VectorXd glued;
  double value() const { return std::max(lambda_plus, lambda_minus); }
};

CutResult evaluate_cut(Exponent p, const Mesh& mesh, const Measure& measure, const SolverOptions& opts,
                       const Point2& direction, double offset) {
  CutResult out;
  std::vector<bool> plus(mesh.num_elements());
  std::vector<bool> minus(mesh.num_elements());
  std::size_t n_plus = 0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    plus[e] = mesh.geometry[e].centroid.dot(direction) > offset;
    minus[e] = !plus[e];
    n_plus += plus[e];
  }
  if (n_plus == 0) {
    out.lambda_plus = std::numeric_limits<double>::infinity();
    out.lambda_minus = 0.0;
    return out;
  }
  if (n_plus == mesh.num_elements()) {
    out.lambda_plus = 0.0;
    out.lambda_minus = std::numeric_limits<double>::infinity();
    return out;
  }
  const SubMesh sp = extract_submesh(mesh, plus);
  const SubMesh sm = extract_submesh(mesh, minus);
  // An empty side has lambda = +inf, a side with no unknowns likewise.
  if (sp.mesh.num_interior() == 0) {
    out.lambda_minus = 0.0;
    return out;
  }
  if (sm.mesh.num_interior() == 0) {
    out.lambda_plus = 0.0;
    return out;
  }
  const EigenPair ep = first_eigenpair(p, sp.mesh, measure, opts);
  const EigenPair em = first_eigenpair(p, sm.mesh, measure, opts);
  out.valid = true;
  out.lambda_plus = ep.lambda;
  out.lambda_minus = em.lambda;
  out.glued = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
  for (std::size_t i = 0; i < sp.node_map.size(); ++i) {
    out.glued[sp.node_map[i]] += ep.field.values()[static_cast<Eigen::Index>(i)];
  }
  for (std::size_t i = 0; i < sm.node_map.size(); ++i) {
    out.glued[sm.node_map[i]] -= em.field.values()[static_cast<Eigen::Index>(i)];
  }
  return out;
}

}  // namespace

EigenPair nodal_cut_estimate(Exponent p, const Mesh& mesh, const Measure& measure, const SolverOptions& opts,
                             const CutSweepOptions& cuts) {
  if (cuts.directions < 1 || cuts.offsets < 1) throw DomainError("cut sweep needs directions, offsets >= 1");
  // Cuts along theta and theta + pi coincide; a 1D mesh has one direction.
  const int n_dirs = mesh.dim == 1 ? 1 : cuts.directions;

  EigenPair best;
  best.estimator = SecondEstimator::NodalCut;
  best.is_upper_bound = true;
  best.lambda = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_glued;

  for (int d = 0; d < n_dirs; ++d) {
    const double angle = std::numbers::pi * d / n_dirs;
    const Point2 dir(std::cos(angle), std::sin(angle));
    double lo_proj = std::numeric_limits<double>::infinity();
    double hi_proj = -lo_proj;
    for (const auto& x : mesh.nodes) {
      lo_proj = std::min(lo_proj, x.dot(dir));
      hi_proj = std::max(hi_proj, x.dot(dir));
    }
    auto offset_at = [&](double k) { return lo_proj + (hi_proj - lo_proj) * (k + 1.0) / (cuts.offsets + 1.0); };

    auto consider = [&](const CutResult& r, double offset) {
      ++best.iterations;
      if (!r.valid || !(r.value() < best.lambda)) return;
      best.lambda = r.value();
      best.cut_angle = angle;
      best.cut_offset = offset;
      best_glued = r.glued;
    };

    if (cuts.exhaustive) {
      for (int k = 0; k < cuts.offsets; ++k) {
        const double tau = offset_at(k);
        consider(evaluate_cut(p, mesh, measure, opts, dir, tau), tau);
      }
      continue;
    }

    // lambda(plus side) grows with the offset and lambda(minus side) shrinks,
    // so the balanced cut is bracketed by bisection on the offset index.
    int lo = -1;
    int hi = cuts.offsets;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      const double tau = offset_at(mid);
      const CutResult r = evaluate_cut(p, mesh, measure, opts, dir, tau);
      consider(r, tau);
      if (r.lambda_plus < r.lambda_minus) lo = mid;
      else hi = mid;
    }
    // Continue bisecting on the continuous offset between the bracketing cuts.
    double tau_lo = lo < 0 ? lo_proj : offset_at(lo);
    double tau_hi = hi >= cuts.offsets ? hi_proj : offset_at(hi);
    for (int step = 0; step < 10; ++step) {
      const double tau = 0.5 * (tau_lo + tau_hi);
      const CutResult r = evaluate_cut(p, mesh, measure, opts, dir, tau);
      consider(r, tau);
      if (r.lambda_plus < r.lambda_minus) tau_lo = tau;
      else tau_hi = tau;
    }
  }
  if (!std::isfinite(best.lambda)) throw SolverError("no admissible cut produced two nonempty sub-domains");

  best.field = Field(mesh, std::move(best_glued));
  normalize_lp(p, best.field, measure);
  best.normalized = true;
  best.converged = true;
  best.residual_history.push_back(best.lambda);
  return best;
}

EigenPair second_eigenvalue(Exponent p, const Mesh& mesh, const Measure& measure, const EigenPair& u1,
                            const SolverOptions& opts, const CutSweepOptions& cuts) {
  opts.validate();
  if (!u1.converged) throw SolverError("second_eigenvalue needs a converged first eigenpair");
  if (p.value() != 2.0) return nodal_cut_estimate(p, mesh, measure, opts, cuts);

  const Workspace ws(mesh, measure);
  const SparseMatrix stiffness = ws.stiffness(std::vector<double>(mesh.num_elements(), 1.0));
  const SparseMatrix mass = ws.mass();
  Eigen::VectorXd ground = ws.dofs.restrict(u1.field.values());
  ground /= std::sqrt(ground.dot(mass * ground));
  const Eigen::VectorXd mass_ground = mass * ground;

  auto project = [&](Eigen::VectorXd& x) {
    x -= x.dot(mass_ground) * ground;
    x -= x.dot(mass_ground) * ground;
    x /= std::sqrt(x.dot(mass * x));
  };

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Eigen::VectorXd x(ws.dofs.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = uniform(rng);
  project(x);

  EigenPair out;
  out.estimator = SecondEstimator::Deflation;
  double rq = x.dot(stiffness * x);
  out.residual_history.push_back(rq);
  for (int k = 0; k < opts.max_iterations; ++k) {
    Eigen::VectorXd y = solve_spd(stiffness, mass * x, x, opts.cg_tolerance);
    project(y);
    const double next = y.dot(stiffness * y);
    const double decrease = (rq - next) / rq;
    x = std::move(y);
    out.iterations = k + 1;
    if (next <= rq) {
      rq = next;
      out.residual_history.push_back(rq);
    }
    if (k >= 2 && std::abs(decrease) <= opts.rq_tolerance) {
      out.converged = true;
      break;
    }
  }
  out.field = Field(mesh, ws.dofs.extend(x, mesh.num_nodes()));
  ws.normalize(2.0, out.field);
  out.lambda = ws.rayleigh(2.0, out.field);
  out.normalized = true;
  return out;
}

}  // namespace pstab
