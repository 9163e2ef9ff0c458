#pragma once

// Text mesh format, JSON serialization of reports and CSV rows.
//
// Mesh file:
//   DIM n NODES k ELEMS m
//   k coordinate lines (n numbers each)
//   m element lines (n+1 node indices each)
//   one line of k boundary flags (0/1)

#include <cmath>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "pstab/cpcore.hpp"
#include "pstab/geometry.hpp"
#include "pstab/spectral.hpp"
#include "pstab/verify.hpp"

namespace pstab {

void write_mesh(std::ostream& out, const Mesh& mesh);
/// Parses the text format and rebuilds the cached element data. Throws
/// std::runtime_error on malformed input.
Mesh read_mesh(std::istream& in);

/// {"interval":[a,b]} or {"polygon":[[x,y],...]}.
Domain domain_from_json(const nlohmann::json& spec);
nlohmann::json domain_to_json(const Domain& domain);
/// "interval:a,b", "polygon:x,y;x,y;...", or a JSON object as above.
Domain parse_domain(const std::string& text);

nlohmann::json to_json(const C1Result& c);
nlohmann::json to_json(const C23Estimate& c);
nlohmann::json to_json(const StabilityReport& r);
nlohmann::json to_json(const GapReport& r);
nlohmann::json to_json(const IdentityResult& r);
nlohmann::json to_json(const WeightedPoincareReport& r);
nlohmann::json to_json(const PiconeReport& r);
nlohmann::json to_json(const LogConcavityReport& r);
/// lambda, iterations, residual_history and the nodal values, tagged with
/// the mesh file they index.
nlohmann::json to_json(const EigenPair& e, const std::string& mesh_file);

/// Header of the plotting CSV.
std::string csv_header();
/// p, diam, lambda1, lambda2, deficit, distance_p, bound, margin. Fields that
/// do not apply are left empty.
struct CsvRow {
  double p = 0.0;
  double diameter = 0.0;
  double lambda1 = 0.0;
  double lambda2 = std::nan("");
  double deficit = std::nan("");
  double distance_p = std::nan("");
  double bound = 0.0;
  double margin = 0.0;
};
std::string csv_line(const CsvRow& row);

}  // namespace pstab
