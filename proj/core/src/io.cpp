#include "pstab/io.hpp"

#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pstab {
namespace {

std::vector<double> parse_numbers(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("not a number: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw std::invalid_argument("trailing characters in number: '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

}  // namespace

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "DIM " << mesh.dim << " NODES " << mesh.num_nodes() << " ELEMS " << mesh.num_elements() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& x : mesh.nodes) {
    out << x.x();
    if (mesh.dim == 2) out << ' ' << x.y();
    out << '\n';
  }
  for (const auto& el : mesh.elements) {
    for (int i = 0; i < mesh.nodes_per_element(); ++i) out << (i ? " " : "") << el[i];
    out << '\n';
  }
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) out << (i ? " " : "") << (mesh.boundary[i] ? 1 : 0);
  out << '\n';
}

Mesh read_mesh(std::istream& in) {
  std::string dim_tag, nodes_tag, elems_tag;
  int dim = 0;
  long long n_nodes = 0, n_elems = 0;
  if (!(in >> dim_tag >> dim >> nodes_tag >> n_nodes >> elems_tag >> n_elems) || dim_tag != "DIM" ||
      nodes_tag != "NODES" || elems_tag != "ELEMS") {
    throw std::runtime_error("mesh header must read 'DIM n NODES k ELEMS m'");
  }
  if ((dim != 1 && dim != 2) || n_nodes < 2 || n_elems < 1) throw std::runtime_error("mesh header has invalid sizes");
  Mesh mesh;
  mesh.dim = dim;
  mesh.nodes.resize(static_cast<std::size_t>(n_nodes), Point2::Zero());
  for (auto& x : mesh.nodes) {
    if (!(in >> x.x())) throw std::runtime_error("truncated node coordinates");
    if (dim == 2 && !(in >> x.y())) throw std::runtime_error("truncated node coordinates");
  }
  mesh.elements.resize(static_cast<std::size_t>(n_elems), {0, 0, 0});
  for (auto& el : mesh.elements) {
    for (int i = 0; i < dim + 1; ++i) {
      if (!(in >> el[i])) throw std::runtime_error("truncated element list");
      if (el[i] < 0 || el[i] >= n_nodes) throw std::runtime_error("element references a missing node");
    }
  }
  mesh.boundary.resize(static_cast<std::size_t>(n_nodes));
  for (std::size_t i = 0; i < mesh.boundary.size(); ++i) {
    int flag = 0;
    if (!(in >> flag) || (flag != 0 && flag != 1)) throw std::runtime_error("boundary flags must be 0 or 1");
    mesh.boundary[i] = flag == 1;
  }
  mesh.finalize();
  return mesh;
}

Domain domain_from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw std::invalid_argument("domain spec must be a JSON object");
  if (spec.contains("interval")) {
    const auto& iv = spec.at("interval");
    if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
      throw std::invalid_argument("\"interval\" must be [a, b]");
    }
    return Domain::interval(iv[0].get<double>(), iv[1].get<double>());
  }
  if (spec.contains("polygon")) {
    const auto& poly = spec.at("polygon");
    if (!poly.is_array()) throw std::invalid_argument("\"polygon\" must be a list of [x, y]");
    std::vector<Point2> verts;
    for (const auto& v : poly) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw std::invalid_argument("polygon vertices must be [x, y] pairs");
      }
      verts.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
    return Domain::polygon(std::move(verts));
  }
  throw std::invalid_argument("domain spec needs an \"interval\" or \"polygon\" key");
}

nlohmann::json domain_to_json(const Domain& domain) {
  if (domain.kind() == Domain::Kind::Interval) {
    return {{"interval", {domain.vertices()[0].x(), domain.vertices()[1].x()}}};
  }
  nlohmann::json verts = nlohmann::json::array();
  for (const auto& v : domain.vertices()) verts.push_back({v.x(), v.y()});
  return {{"polygon", verts}};
}

Domain parse_domain(const std::string& text) {
  const auto first = text.find_first_not_of(" \t");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json spec;
    try {
      spec = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("domain JSON does not parse: ") + e.what());
    }
    return domain_from_json(spec);
  }
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("domain must look like 'interval:a,b' or 'polygon:x,y;x,y;...'");
  }
  const std::string kind = text.substr(0, colon);
  const std::string body = text.substr(colon + 1);
  if (kind == "interval") {
    const auto ab = parse_numbers(body, ',');
    if (ab.size() != 2) throw std::invalid_argument("interval needs exactly two numbers");
    return Domain::interval(ab[0], ab[1]);
  }
  if (kind == "polygon") {
    std::vector<Point2> verts;
    std::stringstream ss(body);
    std::string vertex;
    while (std::getline(ss, vertex, ';')) {
      const auto xy = parse_numbers(vertex, ',');
      if (xy.size() != 2) throw std::invalid_argument("polygon vertex needs two numbers: '" + vertex + "'");
      verts.emplace_back(xy[0], xy[1]);
    }
    return Domain::polygon(std::move(verts));
  }
  throw std::invalid_argument("unknown domain kind '" + kind + "'");
}

nlohmann::json to_json(const C1Result& c) {
  return {{"r0", c.r0},         {"k0", c.k0},
          {"c1", c.c1},         {"c1_k0_form", c.c1_k0_form},
          {"lower", c.lower},   {"upper", c.upper},
          {"root_residual", c.root_residual}};
}

nlohmann::json to_json(const C23Estimate& c) {
  return {{"c2_est", c.c2_est},
          {"c3_est", c.c3_est},
          {"c2_at", {c.c2_at.s, c.c2_at.t}},
          {"c3_at", {c.c3_at.s, c.c3_at.t}},
          {"c2_is_upper_bound", c.c2_is_upper_bound},
          {"c3_is_lower_bound", c.c3_is_lower_bound},
          {"evaluations", c.evaluations}};
}

nlohmann::json to_json(const StabilityReport& r) {
  return {{"p", r.p},
          {"diameter", r.diameter},
          {"lambda1", r.lambda1},
          {"deficit", r.deficit},
          {"distance_p", r.distance_p},
          {"c_star", r.c_star},
          {"constant", r.constant},
          {"rhs", r.rhs},
          {"margin", r.margin},
          {"tol_quad", r.tol_quad},
          {"passed", r.passed},
          {"measure", r.measure},
          {"within_hypotheses", r.within_hypotheses}};
}

nlohmann::json to_json(const GapReport& r) {
  return {{"p", r.p},
          {"diameter", r.diameter},
          {"lambda1", r.lambda1},
          {"lambda2", r.lambda2},
          {"lambda2_is_upper_bound", r.lambda2_is_upper_bound},
          {"estimator", r.estimator},
          {"C_value", r.c_value},
          {"constant", r.constant},
          {"bound", r.bound},
          {"gap", r.gap},
          {"margin", r.margin},
          {"tol", r.tol},
          {"passed", r.passed},
          {"verdict", r.verdict},
          {"measure", r.measure}};
}

nlohmann::json to_json(const IdentityResult& r) {
  return {{"deficit", r.deficit},
          {"remainder", r.remainder},
          {"residual", r.residual},
          {"boundary_layer_warning", r.boundary_layer_warning}};
}

nlohmann::json to_json(const LogConcavityReport& r) {
  return {{"pairs", r.pairs},
          {"failures", r.failures},
          {"failure_fraction", r.failure_fraction},
          {"max_violation", r.max_violation},
          {"slack", r.slack}};
}

nlohmann::json to_json(const WeightedPoincareReport& r) {
  return {{"t0", r.t0},
          {"lhs", r.lhs},
          {"inf_integral", r.inf_integral},
          {"t_star", r.t_star},
          {"constant", r.constant},
          {"ratio", r.ratio},
          {"margin", r.margin},
          {"tol_quad", r.tol_quad},
          {"passed", r.passed},
          {"weight_check", to_json(r.weight_check)}};
}

nlohmann::json to_json(const PiconeReport& r) {
  return {{"max_abs_residual", r.max_abs_residual},
          {"max_scaled_residual", r.max_scaled_residual},
          {"samples", r.samples},
          {"skipped", r.skipped}};
}

nlohmann::json to_json(const EigenPair& e, const std::string& mesh_file) {
  std::vector<double> values(e.field.values().data(), e.field.values().data() + e.field.values().size());
  nlohmann::json j = {{"lambda", e.lambda},
                      {"iterations", e.iterations},
                      {"converged", e.converged},
                      {"normalized", e.normalized},
                      {"residual_history", e.residual_history},
                      {"estimator", to_string(e.estimator)},
                      {"is_upper_bound", e.is_upper_bound},
                      {"nodal_values", {{"mesh_file", mesh_file}, {"values", values}}}};
  if (e.estimator == SecondEstimator::NodalCut) {
    j["cut"] = {{"angle", e.cut_angle}, {"offset", e.cut_offset}};
  }
  return j;
}

std::string csv_header() { return "p,diam,lambda1,lambda2,deficit,distance_p,bound,margin"; }

std::string csv_line(const CsvRow& row) {
  return format_double(row.p) + ',' + format_double(row.diameter) + ',' + format_double(row.lambda1) + ',' +
         format_double(row.lambda2) + ',' + format_double(row.deficit) + ',' + format_double(row.distance_p) +
         ',' + format_double(row.bound) + ',' + format_double(row.margin);
}

}  // namespace pstab
