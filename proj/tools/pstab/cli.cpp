#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "pstab/cpcore.hpp"
#include "pstab/geometry.hpp"
#include "pstab/io.hpp"
#include "pstab/verify.hpp"

namespace pstab::cli {
namespace {

const std::vector<std::string> kCommands = {"constants", "eigen", "stability", "gap", "picone", "battery"};

Measure parse_measure(const std::string& name) {
  if (name == "lebesgue") return Measure::lebesgue();
  if (name == "gaussian") return Measure::gaussian();
  throw std::invalid_argument("unknown measure '" + name + "' (expected lebesgue or gaussian)");
}

// Writes via a temporary file and rename so readers never see partial output.
void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    f << content;
    if (!f) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct Outcome {
  nlohmann::json results = nlohmann::json::array();
  std::vector<CsvRow> rows;
  bool passed = true;
};

EigenPair solve_first(Exponent p, const Mesh& mesh, const Measure& measure, const SolverOptions& opts) {
  EigenPair e = first_eigenpair(p, mesh, measure, opts);
  if (!e.converged) throw SolverError("first eigenpair did not converge within max_iterations");
  return e;
}

Outcome run_constants(const RunConfig& c) {
  Outcome o;
  for (double pv : c.p_list) {
    const Exponent p(pv);
    nlohmann::json r;
    r["p"] = pv;
    r["pi_p"] = pi_p(p);
    r["pi_p_quadrature"] = pi_p_quadrature(p);
    bool ok = std::abs(r["pi_p"].get<double>() - r["pi_p_quadrature"].get<double>()) <= 1e-8;
    if (pv >= 2.0) {
      const C1Result c1 = c1_sharp(p);
      r["c1"] = to_json(c1);
      const double rel = std::abs(c1.c1 - c1.c1_k0_form) / c1.c1;
      ok = ok && c1.lower <= c1.c1 && c1.c1 <= c1.upper && rel <= 1e-12;
    } else {
      const C23Estimate est = c2_c3_estimate(p, SamplingGrid::log_polar());
      r["c2_c3"] = to_json(est);
      ok = ok && est.c2_est > 0.0 && est.c2_est <= pv * (pv - 1.0) / std::pow(2.0, pv - 1.0) &&
           est.c3_est >= pv / std::pow(2.0, pv - 1.0) - 1e-9;
    }
    r["passed"] = ok;
    o.passed = o.passed && ok;
    o.results.push_back(std::move(r));
  }
  return o;
}

Outcome run_eigen(const RunConfig& c, const Domain& domain, const Mesh& mesh, const Measure& measure) {
  Outcome o;
  std::string mesh_file = c.mesh_out;
  if (mesh_file.empty() && !c.out.empty()) mesh_file = c.out + ".mesh";
  if (!mesh_file.empty()) {
    std::ostringstream os;
    write_mesh(os, mesh);
    write_atomically(mesh_file, os.str());
  }
  const std::string mesh_ref = mesh_file.empty() ? "" : std::filesystem::path(mesh_file).filename().string();
  for (double pv : c.p_list) {
    const Exponent p(pv);
    const EigenPair first = solve_first(p, mesh, measure, c.solver);
    const EigenPair second = second_eigenvalue(p, mesh, measure, first, c.solver);
    const bool ok = second.lambda > first.lambda;
    o.results.push_back({{"p", pv},
                         {"first", to_json(first, mesh_ref)},
                         {"second", to_json(second, mesh_ref)},
                         {"passed", ok}});
    o.rows.push_back({pv, domain.diameter(), first.lambda, second.lambda, std::nan(""), std::nan(""), std::nan(""),
                      std::nan("")});
    o.passed = o.passed && ok;
  }
  return o;
}

// Stability reports for `fields` seeded random trial fields per p.
void stability_cell(const RunConfig& c, const Domain& domain, const Mesh& mesh, const Measure& measure,
                    const std::string& domain_label, Outcome& o, bool per_field_results) {
  for (double pv : c.p_list) {
    const Exponent p(pv);
    p.require_at_least_two("stability");
    const EigenPair first = solve_first(p, mesh, measure, c.solver);
    std::size_t failures = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    nlohmann::json reports = nlohmann::json::array();
    for (int k = 0; k < c.fields; ++k) {
      const Field u = random_zero_trace_field(mesh, c.seed + static_cast<std::uint64_t>(k));
      const StabilityReport r =
          stability_check(p, domain, mesh, u, measure, &first, c.solver, c.constant_factor);
      failures += r.passed ? 0 : 1;
      min_margin = std::min(min_margin, r.margin);
      if (per_field_results) reports.push_back(to_json(r));
      o.rows.push_back({pv, r.diameter, r.lambda1, std::nan(""), r.deficit, r.distance_p, r.rhs, r.margin});
    }
    nlohmann::json cell = {{"p", pv},
                           {"domain", domain_label},
                           {"measure", measure.name()},
                           {"fields", c.fields},
                           {"failures", failures},
                           {"min_margin", min_margin},
                           {"lambda1", first.lambda},
                           {"passed", failures == 0}};
    if (per_field_results) cell["reports"] = std::move(reports);
    o.passed = o.passed && failures == 0;
    o.results.push_back(std::move(cell));
  }
}

Outcome run_gap(const RunConfig& c, const Domain& domain, const Mesh& mesh, const Measure& measure) {
  Outcome o;
  for (double pv : c.p_list) {
    const Exponent p(pv);
    const EigenPair first = solve_first(p, mesh, measure, c.solver);
    const EigenPair second = second_eigenvalue(p, mesh, measure, first, c.solver);
    const GapReport r = gap_report(p, domain, first, second, measure, c.constant_factor);
    o.results.push_back(to_json(r));
    o.rows.push_back({pv, r.diameter, r.lambda1, r.lambda2, std::nan(""), std::nan(""), r.bound, r.margin});
    o.passed = o.passed && r.passed;
  }
  return o;
}

Outcome run_picone(const RunConfig& c, const Mesh& mesh, const Measure& measure) {
  Outcome o;
  for (double pv : c.p_list) {
    const Exponent p(pv);
    const EigenPair first = solve_first(p, mesh, measure, c.solver);
    const Field u = random_zero_trace_field(mesh, c.seed);
    const PiconeReport r = picone_check(p, u, first.field, 1000, c.seed);
    const bool ok = r.max_scaled_residual <= 1e-8;
    nlohmann::json j = to_json(r);
    j["p"] = pv;
    j["passed"] = ok;
    o.results.push_back(std::move(j));
    o.passed = o.passed && ok;
  }
  return o;
}

std::string render_csv(const std::vector<CsvRow>& rows) {
  std::string text = csv_header() + "\n";
  for (const auto& row : rows) text += csv_line(row) + "\n";
  return text;
}

}  // namespace

void RunConfig::validate() const {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
    throw std::invalid_argument("unknown command '" + command + "'");
  }
  if (p_list.empty()) throw std::invalid_argument("p-list is empty");
  for (double p : p_list) {
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("every p must satisfy p > 1");
  }
  if (level < 0 || level > 7) throw std::invalid_argument("level must lie in [0, 7]");
  if (fields < 1) throw std::invalid_argument("fields must be >= 1");
  if (!(constant_factor > 0.0)) throw std::invalid_argument("constant factor must be positive");
  solver.validate();
}

void apply_config_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (j.contains("command")) c.command = j.at("command").get<std::string>();
  if (j.contains("p")) {
    const auto& p = j.at("p");
    c.p_list = p.is_array() ? p.get<std::vector<double>>() : std::vector<double>{p.get<double>()};
  }
  if (j.contains("domain")) {
    const auto& d = j.at("domain");
    c.domain = d.is_string() ? d.get<std::string>() : d.dump();
  }
  if (j.contains("measure")) c.measure = j.at("measure").get<std::string>();
  if (j.contains("level")) c.level = j.at("level").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("fields")) c.fields = j.at("fields").get<int>();
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  if (j.contains("csv")) c.csv = j.at("csv").get<std::string>();
  if (j.contains("mesh_out")) c.mesh_out = j.at("mesh_out").get<std::string>();
  if (j.contains("no_timestamp")) c.no_timestamp = j.at("no_timestamp").get<bool>();
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (s.contains("epsilon_schedule")) c.solver.epsilon_schedule = s.at("epsilon_schedule").get<std::vector<double>>();
    if (s.contains("max_iterations")) c.solver.max_iterations = s.at("max_iterations").get<int>();
    if (s.contains("rq_tolerance")) c.solver.rq_tolerance = s.at("rq_tolerance").get<double>();
    if (s.contains("cg_tolerance")) c.solver.cg_tolerance = s.at("cg_tolerance").get<double>();
  }
  if (j.contains("battery")) {
    const auto& b = j.at("battery");
    if (b.contains("domains")) {
      c.battery_domains.clear();
      for (const auto& d : b.at("domains")) c.battery_domains.push_back(d.is_string() ? d.get<std::string>() : d.dump());
    }
    if (b.contains("measures")) c.battery_measures = b.at("measures").get<std::vector<std::string>>();
  }
}

int run(const RunConfig& config, std::ostream& out) {
  config.validate();
  nlohmann::json report;
  report["schema"] = 1;
  report["command"] = config.command;
  report["config"] = {{"p", config.p_list},  {"domain", config.domain}, {"measure", config.measure},
                      {"level", config.level}, {"seed", config.seed},   {"fields", config.fields}};

  Outcome o;
  if (config.command == "constants") {
    o = run_constants(config);
  } else if (config.command == "battery") {
    const auto domains = config.battery_domains.empty() ? std::vector<std::string>{config.domain}
                                                        : config.battery_domains;
    const auto measures = config.battery_measures.empty() ? std::vector<std::string>{config.measure}
                                                          : config.battery_measures;
    for (const auto& dspec : domains) {
      const Domain domain = parse_domain(dspec);
      const Mesh mesh = build_mesh(domain, config.level);
      for (const auto& mname : measures) {
        stability_cell(config, domain, mesh, parse_measure(mname), dspec, o, false);
      }
    }
  } else {
    const Domain domain = parse_domain(config.domain);
    const Measure measure = parse_measure(config.measure);
    const Mesh mesh = build_mesh(domain, config.level);
    report["diameter"] = domain.diameter();
    report["domain"] = domain_to_json(domain);
    if (config.command == "eigen") o = run_eigen(config, domain, mesh, measure);
    else if (config.command == "stability") stability_cell(config, domain, mesh, measure, config.domain, o, true);
    else if (config.command == "gap") o = run_gap(config, domain, mesh, measure);
    else o = run_picone(config, mesh, measure);
  }
  report["results"] = std::move(o.results);
  report["passed"] = o.passed;
  if (!config.no_timestamp) report["generated_at"] = utc_timestamp();

  const std::string text = report.dump(2) + "\n";
  if (config.out.empty()) out << text;
  else write_atomically(config.out, text);
  if (!config.csv.empty()) write_atomically(config.csv, render_csv(o.rows));
  return o.passed ? kExitPassed : kExitFailed;
}

int main_entry(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Poincare stability constants, p-Laplacian eigenproblems and inequality checks"};
  app.require_subcommand(1, 1);

  RunConfig config;
  std::string config_file;
  std::vector<double> p_list;
  std::string domain, measure, out_path, csv_path, mesh_out;
  int level = 0, fields = 1;
  std::uint64_t seed = 1;
  bool no_timestamp = false;
  double constant_factor = 1.0;

  for (const auto& name : kCommands) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " command");
    sub->add_option("--config", config_file, "JSON config file (flags override it)");
    sub->add_option("--p", p_list, "exponent(s) p > 1");
    sub->add_option("--domain", domain, "interval:a,b | polygon:x,y;x,y;... | JSON object");
    sub->add_option("--measure", measure, "lebesgue or gaussian");
    sub->add_option("--level", level, "mesh refinement level in [0, 7]");
    sub->add_option("--seed", seed, "seed for random trial fields");
    sub->add_option("--fields", fields, "random trial fields per cell (stability, battery)");
    sub->add_option("--out", out_path, "JSON report path (default: stdout)");
    sub->add_option("--csv", csv_path, "CSV rows for plotting");
    sub->add_option("--mesh-out", mesh_out, "mesh file written by eigen");
    sub->add_flag("--no-timestamp", no_timestamp, "omit generated_at for byte-identical reports");
    sub->add_option("--inject-constant-factor", constant_factor)->group("");
  }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPassed : kExitError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    config.command = sub->get_name();
    if (!config_file.empty()) {
      std::ifstream f(config_file);
      if (!f) throw std::invalid_argument("cannot read config file '" + config_file + "'");
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config file does not parse: ") + e.what());
      }
      apply_config_json(j, config);
      config.command = sub->get_name();
    }
    if (sub->count("--p")) config.p_list = p_list;
    if (sub->count("--domain")) config.domain = domain;
    if (sub->count("--measure")) config.measure = measure;
    if (sub->count("--level")) config.level = level;
    if (sub->count("--seed")) config.seed = seed;
    if (sub->count("--fields")) config.fields = fields;
    if (sub->count("--out")) config.out = out_path;
    if (sub->count("--csv")) config.csv = csv_path;
    if (sub->count("--mesh-out")) config.mesh_out = mesh_out;
    if (no_timestamp) config.no_timestamp = true;
    if (sub->count("--inject-constant-factor")) config.constant_factor = constant_factor;
    // Fail on a malformed domain before any solve starts.
    (void)parse_domain(config.domain);
    for (const auto& d : config.battery_domains) (void)parse_domain(d);
    for (const auto& m : config.battery_measures) (void)parse_measure(m);
    (void)parse_measure(config.measure);
    return run(config, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace pstab::cli
