#pragma once

// Convex domains, P1 simplicial meshes, element quadrature and the
// Lebesgue / Gaussian measures every integral is taken against.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pstab/exponent.hpp"

namespace pstab {

using Point2 = Eigen::Vector2d;

/// Interval (a, b) or a strictly convex polygon with counterclockwise vertices.
class Domain {
 public:
  enum class Kind { Interval, Polygon };

  static Domain interval(double a, double b);
  /// Validates convexity and reorders the vertices counterclockwise.
  static Domain polygon(std::vector<Point2> vertices);

  Kind kind() const noexcept { return kind_; }
  int dim() const noexcept { return kind_ == Kind::Interval ? 1 : 2; }
  double diameter() const noexcept { return diameter_; }
  /// Interval: {(a,0), (b,0)}. Polygon: counterclockwise vertices.
  const std::vector<Point2>& vertices() const noexcept { return vertices_; }
  double measure() const;  ///< length or area
  /// Distance from x to the boundary (0 outside).
  double distance_to_boundary(const Point2& x) const;

 private:
  Kind kind_ = Kind::Interval;
  std::vector<Point2> vertices_;
  double diameter_ = 0.0;
};

/// Element-wise geometry of a P1 mesh, cached at construction.
struct ElementGeometry {
  double measure = 0.0;  ///< length (1D) or area (2D)
  std::array<Point2, 3> grad_basis{};  ///< gradients of the local hat functions
  Point2 centroid = Point2::Zero();
};

/// One quadrature point of the mesh with its physical weight.
struct QuadPoint {
  int element = 0;
  Point2 x = Point2::Zero();
  std::array<double, 3> bary{};  ///< local P1 basis values at x
  double weight = 0.0;           ///< reference weight * element measure
};

enum class QuadratureRule { GaussLegendre4, Dunavant6 };

/// P1 mesh. 1D meshes store x in the first coordinate and use the first two
/// entries of each element.
struct Mesh {
  int dim = 1;
  std::vector<Point2> nodes;
  std::vector<std::array<int, 3>> elements;
  std::vector<bool> boundary;
  int refinement_level = 0;
  QuadratureRule rule = QuadratureRule::GaussLegendre4;

  std::vector<ElementGeometry> geometry;
  std::vector<QuadPoint> quad;  ///< all quadrature points, grouped by element
  std::vector<int> quad_offset;  ///< element e owns quad[quad_offset[e] .. quad_offset[e+1])

  int nodes_per_element() const noexcept { return dim + 1; }
  std::size_t num_nodes() const noexcept { return nodes.size(); }
  std::size_t num_elements() const noexcept { return elements.size(); }
  std::size_t num_interior() const;
  double mesh_size() const;  ///< largest element diameter
  double total_measure() const;

  /// Recompute `geometry`, `quad` and `quad_offset` from nodes and elements.
  void finalize();
  /// Element containing x and the local basis values there; -1 if outside.
  int locate(const Point2& x, std::array<double, 3>& bary) const;
};

/// Uniform 1D grid with 16 * 2^level intervals, or a centroid fan of the
/// polygon refined `level` times by 4-way splitting.
Mesh build_mesh(const Domain& domain, int level);

/// Checks the mesh invariants against the domain; returns a list of problems.
std::vector<std::string> validate_mesh(const Mesh& mesh, const Domain& domain);

class Measure {
 public:
  enum class Kind { Lebesgue, Gaussian };

  static Measure lebesgue() { return Measure(Kind::Lebesgue); }
  static Measure gaussian() { return Measure(Kind::Gaussian); }

  Kind kind() const noexcept { return kind_; }
  std::string name() const { return kind_ == Kind::Lebesgue ? "lebesgue" : "gaussian"; }
  /// Lebesgue: 1. Gaussian: (2 pi)^{-dim/2} exp(-|x|^2/2).
  double density(const Point2& x, int dim) const;

 private:
  explicit Measure(Kind kind) : kind_(kind) {}
  Kind kind_;
};

/// Nodal coefficients of a P1 function. The mesh must outlive the field.
class Field {
 public:
  Field() = default;
  Field(const Mesh& mesh, Eigen::VectorXd values);
  static Field zero(const Mesh& mesh);
  /// Nodal interpolant of f.
  static Field interpolate(const Mesh& mesh, const std::function<double(const Point2&)>& f);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::VectorXd& values() noexcept { return values_; }

  double at(const QuadPoint& q) const;
  Point2 gradient(int element) const;
  /// Value at an arbitrary point (0 outside the mesh).
  double evaluate(const Point2& x) const;
  bool has_zero_trace() const;
  /// Sets boundary nodal values to exactly 0.
  void enforce_zero_trace();

 private:
  const Mesh* mesh_ = nullptr;
  Eigen::VectorXd values_;
};

/// Sum over quadrature points of weight * density * integrand(point).
double integrate(const Mesh& mesh, const Measure& measure,
                 const std::function<double(const QuadPoint&)>& integrand);

/// Per-element integral of the density, sum_q weight * density.
std::vector<double> element_density_mass(const Mesh& mesh, const Measure& measure);
/// Density at every cached quadrature point, same order as mesh.quad.
std::vector<double> quad_densities(const Mesh& mesh, const Measure& measure);

}  // namespace pstab
