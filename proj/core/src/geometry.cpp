#include "pstab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

namespace pstab {
namespace {

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Point2& x, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (x - (a + t * ab)).norm();
}

struct ReferencePoint {
  std::array<double, 3> bary;
  double weight;
};

const std::vector<ReferencePoint>& reference_rule(QuadratureRule rule) {
  static const std::vector<ReferencePoint> gauss4 = [] {
    constexpr double x1 = 0.3399810435848562648;
    constexpr double x2 = 0.8611363115940525752;
    constexpr double w1 = 0.6521451548625461426;
    constexpr double w2 = 0.3478548451374538574;
    std::vector<ReferencePoint> pts;
    for (auto [z, w] : {std::pair{-x2, w2}, std::pair{-x1, w1}, std::pair{x1, w1}, std::pair{x2, w2}}) {
      const double s = 0.5 * (1.0 + z);
      pts.push_back({{1.0 - s, s, 0.0}, 0.5 * w});
    }
    return pts;
  }();
  // Symmetric 6-point rule, exact for polynomials of degree 4.
  static const std::vector<ReferencePoint> dunavant6 = [] {
    constexpr double a1 = 0.445948490915965;
    constexpr double b1 = 1.0 - 2.0 * a1;
    constexpr double w1 = 0.223381589678011;
    constexpr double a2 = 0.091576213509771;
    constexpr double b2 = 1.0 - 2.0 * a2;
    constexpr double w2 = 0.109951743655322;
    return std::vector<ReferencePoint>{
        {{b1, a1, a1}, w1}, {{a1, b1, a1}, w1}, {{a1, a1, b1}, w1},
        {{b2, a2, a2}, w2}, {{a2, b2, a2}, w2}, {{a2, a2, b2}, w2},
    };
  }();
  return rule == QuadratureRule::GaussLegendre4 ? gauss4 : dunavant6;
}

double signed_measure(const Mesh& mesh, int e) {
  const auto& el = mesh.elements[e];
  if (mesh.dim == 1) return mesh.nodes[el[1]].x() - mesh.nodes[el[0]].x();
  const Point2& a = mesh.nodes[el[0]];
  return 0.5 * cross(mesh.nodes[el[1]] - a, mesh.nodes[el[2]] - a);
}

}  // namespace

Domain Domain::interval(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    std::ostringstream msg;
    msg << "interval requires a < b (got a = " << a << ", b = " << b << ")";
    throw DomainError(msg.str());
  }
  Domain d;
  d.kind_ = Kind::Interval;
  d.vertices_ = {Point2(a, 0.0), Point2(b, 0.0)};
  d.diameter_ = b - a;
  return d;
}

Domain Domain::polygon(std::vector<Point2> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) throw DomainError("polygon needs at least 3 vertices");
  for (const auto& v : vertices) {
    if (!v.allFinite()) throw DomainError("polygon vertex is not finite");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (vertices[i] == vertices[j]) throw DomainError("polygon has repeated vertices");
    }
  }
  double area2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) area2 += cross(vertices[i], vertices[(i + 1) % n]);
  if (area2 < 0.0) std::reverse(vertices.begin(), vertices.end());

  double scale = 0.0;
  for (const auto& v : vertices) scale = std::max(scale, v.norm());
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 e0 = vertices[(i + 1) % n] - vertices[i];
    const Point2 e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
    if (!(cross(e0, e1) > 1e-14 * std::max(scale * scale, 1.0))) {
      throw DomainError("polygon is not strictly convex");
    }
  }

  Domain d;
  d.kind_ = Kind::Polygon;
  d.vertices_ = std::move(vertices);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d.diameter_ = std::max(d.diameter_, (d.vertices_[i] - d.vertices_[j]).norm());
    }
  }
  return d;
}

double Domain::measure() const {
  if (kind_ == Kind::Interval) return diameter_;
  double area2 = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    area2 += cross(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  }
  return 0.5 * area2;
}

double Domain::distance_to_boundary(const Point2& x) const {
  if (kind_ == Kind::Interval) {
    return std::max(0.0, std::min(x.x() - vertices_[0].x(), vertices_[1].x() - x.x()));
  }
  double dist = std::numeric_limits<double>::infinity();
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = vertices_[i];
    const Point2 edge = vertices_[(i + 1) % n] - a;
    const double signed_dist = cross(edge, x - a) / edge.norm();
    dist = std::min(dist, signed_dist);
  }
  return std::max(0.0, dist);
}

std::size_t Mesh::num_interior() const {
  return static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), false));
}

double Mesh::mesh_size() const {
  double h = 0.0;
  for (const auto& el : elements) {
    for (int i = 0; i < nodes_per_element(); ++i) {
      for (int j = i + 1; j < nodes_per_element(); ++j) {
        h = std::max(h, (nodes[el[i]] - nodes[el[j]]).norm());
      }
    }
  }
  return h;
}

double Mesh::total_measure() const {
  double sum = 0.0;
  for (const auto& g : geometry) sum += g.measure;
  return sum;
}

void Mesh::finalize() {
  rule = dim == 1 ? QuadratureRule::GaussLegendre4 : QuadratureRule::Dunavant6;
  const auto& ref = reference_rule(rule);
  geometry.assign(elements.size(), {});
  quad.clear();
  quad.reserve(elements.size() * ref.size());
  quad_offset.assign(elements.size() + 1, 0);
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& el = elements[e];
    ElementGeometry& g = geometry[e];
    if (dim == 1) {
      const double len = nodes[el[1]].x() - nodes[el[0]].x();
      g.measure = std::abs(len);
      g.grad_basis = {Point2(-1.0 / len, 0.0), Point2(1.0 / len, 0.0), Point2::Zero()};
      g.centroid = 0.5 * (nodes[el[0]] + nodes[el[1]]);
    } else {
      const Point2& a = nodes[el[0]];
      const Point2& b = nodes[el[1]];
      const Point2& c = nodes[el[2]];
      const double det = cross(b - a, c - a);
      g.measure = 0.5 * std::abs(det);
      // grad(lambda_i) = rot90(opposite edge) / det
      g.grad_basis = {Point2(b.y() - c.y(), c.x() - b.x()) / det,
                      Point2(c.y() - a.y(), a.x() - c.x()) / det,
                      Point2(a.y() - b.y(), b.x() - a.x()) / det};
      g.centroid = (a + b + c) / 3.0;
    }
    quad_offset[e] = static_cast<int>(quad.size());
    for (const auto& rp : ref) {
      QuadPoint q;
      q.element = static_cast<int>(e);
      q.bary = rp.bary;
      q.weight = rp.weight * g.measure;
      q.x = Point2::Zero();
      for (int i = 0; i < nodes_per_element(); ++i) q.x += rp.bary[i] * nodes[el[i]];
      quad.push_back(q);
    }
  }
  quad_offset[elements.size()] = static_cast<int>(quad.size());
}

int Mesh::locate(const Point2& x, std::array<double, 3>& bary) const {
  constexpr double tol = 1e-12;
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& el = elements[e];
    if (dim == 1) {
      const double a = nodes[el[0]].x();
      const double b = nodes[el[1]].x();
      const double s = (x.x() - a) / (b - a);
      if (s >= -tol && s <= 1.0 + tol) {
        bary = {1.0 - s, s, 0.0};
        return static_cast<int>(e);
      }
    } else {
      const auto& g = geometry[e];
      const Point2& a = nodes[el[0]];
      const double l1 = g.grad_basis[1].dot(x - a);
      const double l2 = g.grad_basis[2].dot(x - a);
      const double l0 = 1.0 - l1 - l2;
      if (l0 >= -tol && l1 >= -tol && l2 >= -tol) {
        bary = {l0, l1, l2};
        return static_cast<int>(e);
      }
    }
  }
  return -1;
}

Mesh build_mesh(const Domain& domain, int level) {
  if (level < 0) throw DomainError("mesh level must be >= 0");
  Mesh mesh;
  mesh.refinement_level = level;
  if (domain.kind() == Domain::Kind::Interval) {
    mesh.dim = 1;
    const int cells = 16 << level;
    const double a = domain.vertices()[0].x();
    const double b = domain.vertices()[1].x();
    mesh.nodes.reserve(cells + 1);
    for (int i = 0; i <= cells; ++i) {
      const double x = i == cells ? b : a + (b - a) * static_cast<double>(i) / cells;
      mesh.nodes.emplace_back(x, 0.0);
    }
    for (int i = 0; i < cells; ++i) mesh.elements.push_back({i, i + 1, 0});
    mesh.boundary.assign(cells + 1, false);
    mesh.boundary.front() = true;
    mesh.boundary.back() = true;
    mesh.finalize();
    return mesh;
  }

  mesh.dim = 2;
  const auto& verts = domain.vertices();
  const int nv = static_cast<int>(verts.size());
  mesh.nodes = verts;
  Point2 centroid = Point2::Zero();
  for (const auto& v : verts) centroid += v;
  centroid /= nv;
  mesh.nodes.push_back(centroid);
  mesh.boundary.assign(nv, true);
  mesh.boundary.push_back(false);

  // Boundary edges, keyed by sorted node pair, mapped to the polygon edge.
  std::map<std::pair<int, int>, int> boundary_edge;
  auto key = [](int a, int b) { return std::pair{std::min(a, b), std::max(a, b)}; };
  for (int i = 0; i < nv; ++i) {
    mesh.elements.push_back({nv, i, (i + 1) % nv});
    boundary_edge[key(i, (i + 1) % nv)] = i;
  }

  for (int round = 0; round < level; ++round) {
    std::map<std::pair<int, int>, int> midpoint;
    std::map<std::pair<int, int>, int> next_boundary;
    auto mid = [&](int a, int b) {
      const auto k = key(a, b);
      if (auto it = midpoint.find(k); it != midpoint.end()) return it->second;
      const int id = static_cast<int>(mesh.nodes.size());
      Point2 m = 0.5 * (mesh.nodes[a] + mesh.nodes[b]);
      bool on_boundary = false;
      if (auto be = boundary_edge.find(k); be != boundary_edge.end()) {
        const Point2& p0 = verts[be->second];
        const Point2 dir = verts[(be->second + 1) % nv] - p0;
        m = p0 + dir * ((m - p0).dot(dir) / dir.squaredNorm());
        on_boundary = true;
        next_boundary[key(a, id)] = be->second;
        next_boundary[key(id, b)] = be->second;
      }
      mesh.nodes.push_back(m);
      mesh.boundary.push_back(on_boundary);
      midpoint.emplace(k, id);
      return id;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(mesh.elements.size() * 4);
    for (const auto& el : mesh.elements) {
      const int a = el[0], b = el[1], c = el[2];
      const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      refined.push_back({a, ab, ca});
      refined.push_back({ab, b, bc});
      refined.push_back({ca, bc, c});
      refined.push_back({ab, bc, ca});
    }
    mesh.elements = std::move(refined);
    boundary_edge = std::move(next_boundary);
  }
  mesh.finalize();
  return mesh;
}

std::vector<std::string> validate_mesh(const Mesh& mesh, const Domain& domain) {
  std::vector<std::string> problems;
  const double scale = domain.diameter();
  const auto& verts = domain.vertices();
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    if (!mesh.boundary[i]) continue;
    double dist = std::numeric_limits<double>::infinity();
    if (domain.kind() == Domain::Kind::Interval) {
      dist = std::min(std::abs(mesh.nodes[i].x() - verts[0].x()),
                      std::abs(mesh.nodes[i].x() - verts[1].x()));
    } else {
      for (std::size_t k = 0; k < verts.size(); ++k) {
        dist = std::min(dist, segment_distance(mesh.nodes[i], verts[k], verts[(k + 1) % verts.size()]));
      }
    }
    if (dist > 1e-12 * std::max(scale, 1.0)) {
      problems.push_back("boundary node " + std::to_string(i) + " is off the boundary");
    }
  }
  const double min_measure = 1e-14 * std::pow(scale, mesh.dim);
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const double m = signed_measure(mesh, static_cast<int>(e));
    if (!(m > min_measure)) {
      problems.push_back("element " + std::to_string(e) + " is inverted or degenerate");
    }
    total += m;
  }
  const double expected = domain.measure();
  if (std::abs(total - expected) > 1e-10 * expected) {
    std::ostringstream msg;
    msg << "element measures sum to " << total << ", domain measure is " << expected;
    problems.push_back(msg.str());
  }
  return problems;
}

double Measure::density(const Point2& x, int dim) const {
  if (kind_ == Kind::Lebesgue) return 1.0;
  const double r2 = dim == 1 ? x.x() * x.x() : x.squaredNorm();
  return std::pow(2.0 * std::numbers::pi, -0.5 * dim) * std::exp(-0.5 * r2);
}

Field::Field(const Mesh& mesh, Eigen::VectorXd values) : mesh_(&mesh), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != mesh.num_nodes()) {
    throw DomainError("field size does not match the mesh node count");
  }
}

Field Field::zero(const Mesh& mesh) {
  return Field(mesh, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes())));
}

Field Field::interpolate(const Mesh& mesh, const std::function<double(const Point2&)>& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh.num_nodes()));
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) v[static_cast<Eigen::Index>(i)] = f(mesh.nodes[i]);
  return Field(mesh, std::move(v));
}

double Field::at(const QuadPoint& q) const {
  const auto& el = mesh_->elements[q.element];
  double v = 0.0;
  for (int i = 0; i < mesh_->nodes_per_element(); ++i) v += q.bary[i] * values_[el[i]];
  return v;
}

Point2 Field::gradient(int element) const {
  const auto& el = mesh_->elements[element];
  const auto& g = mesh_->geometry[element];
  Point2 grad = Point2::Zero();
  for (int i = 0; i < mesh_->nodes_per_element(); ++i) grad += values_[el[i]] * g.grad_basis[i];
  return grad;
}

double Field::evaluate(const Point2& x) const {
  std::array<double, 3> bary{};
  const int e = mesh_->locate(x, bary);
  if (e < 0) return 0.0;
  const auto& el = mesh_->elements[e];
  double v = 0.0;
  for (int i = 0; i < mesh_->nodes_per_element(); ++i) v += bary[i] * values_[el[i]];
  return v;
}

bool Field::has_zero_trace() const {
  for (std::size_t i = 0; i < mesh_->num_nodes(); ++i) {
    if (mesh_->boundary[i] && values_[static_cast<Eigen::Index>(i)] != 0.0) return false;
  }
  return true;
}

void Field::enforce_zero_trace() {
  for (std::size_t i = 0; i < mesh_->num_nodes(); ++i) {
    if (mesh_->boundary[i]) values_[static_cast<Eigen::Index>(i)] = 0.0;
  }
}

double integrate(const Mesh& mesh, const Measure& measure,
                 const std::function<double(const QuadPoint&)>& integrand) {
  double sum = 0.0;
  for (const auto& q : mesh.quad) sum += q.weight * measure.density(q.x, mesh.dim) * integrand(q);
  return sum;
}

std::vector<double> element_density_mass(const Mesh& mesh, const Measure& measure) {
  std::vector<double> mass(mesh.num_elements(), 0.0);
  for (const auto& q : mesh.quad) mass[q.element] += q.weight * measure.density(q.x, mesh.dim);
  return mass;
}

std::vector<double> quad_densities(const Mesh& mesh, const Measure& measure) {
  std::vector<double> rho(mesh.quad.size());
  for (std::size_t i = 0; i < mesh.quad.size(); ++i) rho[i] = measure.density(mesh.quad[i].x, mesh.dim);
  return rho;
}

}  // namespace pstab
