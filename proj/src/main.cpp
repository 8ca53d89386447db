// qca-critic: command-line front end. Subcommands: evolve, scan, meanfield,
// lindblad-compare, analyze, plot. Exit codes: 0 ok, 1 validation/usage,
// 2 capacity, 3 numerical, 4 I/O.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qca/common.hpp"
#include "qca/criticality.hpp"
#include "qca/dense.hpp"
#include "qca/gates.hpp"
#include "qca/lindblad.hpp"
#include "qca/meanfield.hpp"
#include "qca/mps.hpp"
#include "qca/scan.hpp"
#include "qca/svg.hpp"
#include "qca/timeseries.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qca;

namespace {

// ---------------------------------------------------------------- helpers

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw validation_error("cannot parse " + what + ": '" + s + "'");
  }
}

// Grid spec: either "lo:hi:count" (inclusive linspace) or a comma list
// "v1,v2,...". A bare number is a one-point grid.
std::vector<double> parse_grid(const std::string& spec,
                               const std::string& what) {
  if (spec.empty()) throw validation_error(what + " grid spec is empty");
  std::vector<double> grid;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) {
      throw validation_error(what + " range must be lo:hi:count, got '" +
                             spec + "'");
    }
    const double lo = to_double(parts[0], what + " lo");
    const double hi = to_double(parts[1], what + " hi");
    const double count_d = to_double(parts[2], what + " count");
    const long count = std::lround(count_d);
    if (count < 1 || count_d != static_cast<double>(count)) {
      throw validation_error(what + " count must be a positive integer");
    }
    if (count == 1) {
      if (lo != hi) {
        throw validation_error(what + " count=1 needs lo == hi");
      }
      return {lo};
    }
    grid.reserve(count);
    for (long i = 0; i < count; ++i) {
      grid.push_back(lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(count - 1));
    }
    return grid;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    grid.push_back(to_double(item, what + " entry"));
  }
  if (grid.empty()) throw validation_error(what + " grid spec is empty");
  return grid;
}

criticality::Window parse_window(const std::string& spec,
                                 const std::string& what) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw validation_error(what + " window must be lo:hi, got '" + spec + "'");
  }
  criticality::Window w;
  w.lo = to_double(spec.substr(0, colon), what + " lo");
  w.hi = to_double(spec.substr(colon + 1), what + " hi");
  if (!(w.lo <= w.hi)) throw validation_error(what + " window needs lo <= hi");
  return w;
}

int jobs_default() {
  if (const char* env = std::getenv("QCA_CRITIC_JOBS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (const std::exception&) {
    }
    throw validation_error("QCA_CRITIC_JOBS must be a positive integer");
  }
  return 1;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create " + dir + ": " + ec.message());
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << text;
  if (!f.good()) throw io_error("write failed: " + path);
}

void write_manifest(const std::string& dir, const std::string& command,
                    const json& config, const std::vector<std::string>& files) {
  json manifest;
  manifest["version"] = kVersion;
  manifest["command"] = command;
  manifest["timestamp"] = scan::manifest_timestamp();
  manifest["config"] = config;
  manifest["outputs"] = files;
  write_text_file((fs::path(dir) / "manifest.json").string(),
                  manifest.dump(2) + "\n");
}

// Per-subcommand map from config-file key to a setter on the bound options;
// unknown keys are an error so typos cannot silently change a run.
struct ConfigBinder {
  std::map<std::string, std::function<void(const json&)>> setters;

  template <typename T>
  void add(const std::string& key, T& target) {
    setters[key] = [&target](const json& v) { target = v.get<T>(); };
  }

  // grid-valued key: accepts a spec string or an explicit number array
  void add_grid(const std::string& key, std::string& spec) {
    setters[key] = [&spec, key](const json& v) {
      if (v.is_array()) {
        std::string joined;
        for (const auto& e : v) {
          if (!joined.empty()) joined += ',';
          joined += format_double(e.get<double>());
        }
        spec = joined;
      } else {
        spec = v.get<std::string>();
      }
    };
  }

  void apply(const json& cfg, const std::string& command) const {
    if (!cfg.is_object()) {
      throw validation_error("config for " + command +
                             " must be a JSON object");
    }
    for (const auto& [key, value] : cfg.items()) {
      const auto it = setters.find(key);
      if (it == setters.end()) {
        throw validation_error("unknown config key for " + command + ": " +
                               key);
      }
      try {
        it->second(value);
      } catch (const json::exception& e) {
        throw validation_error("bad config value for " + key + ": " +
                               e.what());
      }
    }
  }
};

json load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open config: " + path);
  try {
    json cfg;
    f >> cfg;
    return cfg;
  } catch (const json::parse_error& e) {
    throw io_error("config parse failure in " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------- evolve

struct EvolveCmd {
  scan::EvolveJob job;
  std::string out = ".";
};

json evolve_config_json(const scan::EvolveJob& job) {
  json j;
  j["backend"] = job.backend;
  j["l"] = job.l;
  j["p1"] = job.p1;
  j["p2"] = job.p2;
  j["steps"] = job.steps;
  j["initial"] = job.initial;
  j["record_sites"] = job.record_sites;
  j["record_transverse"] = job.record_transverse;
  if (job.backend == "mps") {
    j["chi_max"] = job.chi_max;
    j["cutoff"] = job.cutoff;
  }
  return j;
}

void run_evolve_cmd(const EvolveCmd& cmd) {
  ensure_dir(cmd.out);
  scan::run_evolve_to_dir(cmd.job, cmd.out);
  std::vector<std::string> files = {"series.csv"};
  if (cmd.job.backend == "mps") files.push_back("diagnostics.csv");
  write_manifest(cmd.out, "evolve", evolve_config_json(cmd.job), files);
  std::cout << "wrote " << (fs::path(cmd.out) / "series.csv").string() << "\n";
}

// ---------------------------------------------------------------- scan

struct ScanCmd {
  scan::EvolveJob base;
  std::string p1_spec;
  std::string p2_spec;
  int jobs = 0;   // 0 = resolve from env at run time
  std::string out;
};

int run_scan_cmd(const ScanCmd& cmd) {
  scan::ScanConfig cfg;
  cfg.base = cmd.base;
  cfg.p1_grid = parse_grid(cmd.p1_spec, "p1");
  cfg.p2_grid = parse_grid(cmd.p2_spec, "p2");
  cfg.jobs = cmd.jobs > 0 ? cmd.jobs : jobs_default();
  cfg.out_dir = cmd.out;
  const scan::ScanOutcome outcome = scan::run_scan(cfg);
  std::cout << outcome.points.size() - outcome.failures << "/"
            << outcome.points.size() << " grid points ok under " << cmd.out
            << "\n";
  if (outcome.failures > 0) {
    for (const auto& pt : outcome.points) {
      if (!pt.ok) {
        std::cerr << "failed " << pt.rel_dir << ": " << pt.error << "\n";
      }
    }
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------- meanfield

struct MeanFieldCmd {
  std::string p1_spec = "0:1:41";
  std::string p2_spec = "0:1:41";
  long max_iter = 10000;
  double tol = 1e-12;
  double threshold = 10.0;
  int jobs = 0;
  bool emit_svg = false;
  std::string out;
};

void run_meanfield_cmd(const MeanFieldCmd& cmd) {
  ensure_dir(cmd.out);
  meanfield::PhaseDiagramConfig cfg;
  cfg.max_iter = cmd.max_iter;
  cfg.tol = cmd.tol;
  cfg.jobs = cmd.jobs > 0 ? cmd.jobs : jobs_default();
  const std::vector<double> p1_grid = parse_grid(cmd.p1_spec, "p1");
  const std::vector<double> p2_grid = parse_grid(cmd.p2_spec, "p2");
  const meanfield::PhaseDiagram pd =
      meanfield::mf_phase_diagram(p1_grid, p2_grid, cfg);
  write_text_file((fs::path(cmd.out) / "phase_diagram.json").string(),
                  meanfield::phase_diagram_to_json(pd) + "\n");
  meanfield::write_phase_diagram_csv(
      pd, (fs::path(cmd.out) / "phase_diagram.csv").string());
  std::vector<std::string> files = {"phase_diagram.json", "phase_diagram.csv"};

  if (p2_grid.size() >= 3) {
    const auto line = meanfield::mf_critical_line(pd, cmd.threshold);
    write_text_file((fs::path(cmd.out) / "critical_line.json").string(),
                    meanfield::critical_line_to_json(line) + "\n");
    files.push_back("critical_line.json");
  }

  if (cmd.emit_svg) {
    svg::HeatmapOptions hopt;
    hopt.title = "stationary density";
    hopt.x_label = "p2";
    hopt.y_label = "p1";
    svg::write_svg_file(
        svg::heatmap(pd.p2_grid, pd.p1_grid, pd.n_stationary, hopt),
        (fs::path(cmd.out) / "phase_diagram.svg").string());
    files.push_back("phase_diagram.svg");
  }

  json cfg_json;
  cfg_json["p1_grid"] = p1_grid;
  cfg_json["p2_grid"] = p2_grid;
  cfg_json["max_iter"] = cmd.max_iter;
  cfg_json["tol"] = cmd.tol;
  cfg_json["threshold"] = cmd.threshold;
  write_manifest(cmd.out, "meanfield", cfg_json, files);
  std::cout << "phase diagram " << p1_grid.size() << "x" << p2_grid.size()
            << " under " << cmd.out << "\n";
}

// ---------------------------------------------------- lindblad-compare

struct LindbladCmd {
  int l = 4;
  double omega_over_gamma = 5.75;
  std::string gamma_dt_spec = "0.01";
  double t_final = 10.0;
  std::string rate_convention = "theta-sq-eq-gamma-dt";
  std::string out;
};

void run_lindblad_cmd(const LindbladCmd& cmd) {
  ensure_dir(cmd.out);
  const std::vector<double> gamma_dts =
      parse_grid(cmd.gamma_dt_spec, "gamma-dt");
  const lindblad::RateConvention rc =
      lindblad::rate_convention_from_string(cmd.rate_convention);

  std::vector<std::string> files;
  std::ostringstream table;
  table << "gamma_dt,p1,p2,max_abs_diff,terminal_abs_diff\n";
  std::vector<double> log_dt, log_diff;
  for (double gdt : gamma_dts) {
    const lindblad::ComparisonRecord rec = lindblad::compare_qca_to_lindblad(
        cmd.l, cmd.omega_over_gamma, gdt, cmd.t_final, rc);
    const std::string tag = scan::grid_dirname("gamma_dt", gdt);
    write_text_file((fs::path(cmd.out) / (tag + ".json")).string(),
                    lindblad::comparison_to_json(rec) + "\n");
    files.push_back(tag + ".json");

    svg::Series qca_s, lind_s;
    qca_s.label = "discrete map";
    lind_s.label = "master equation";
    for (std::size_t i = 0; i < rec.qca.t.size(); ++i) {
      qca_s.x.push_back(static_cast<double>(i) * gdt);
      qca_s.y.push_back(rec.qca.n_mean[i]);
    }
    for (std::size_t i = 0; i < rec.lindblad.t.size(); ++i) {
      lind_s.x.push_back(static_cast<double>(i) * gdt);
      lind_s.y.push_back(rec.lindblad.n_mean[i]);
    }
    svg::LinePlotOptions lopt;
    lopt.title = "discrete map vs master equation, " + tag;
    lopt.x_label = "gamma t";
    lopt.y_label = "n_mean";
    svg::write_svg_file(svg::line_plot({qca_s, lind_s}, lopt),
                        (fs::path(cmd.out) / (tag + ".svg")).string());
    files.push_back(tag + ".svg");

    table << format_double(gdt) << ',' << format_double(rec.p1) << ','
          << format_double(rec.p2) << ',' << format_double(rec.max_abs_diff)
          << ',' << format_double(rec.terminal_abs_diff) << "\n";
    std::cout << tag << ": max |dn| = " << rec.max_abs_diff << "\n";
    if (gdt > 0.0 && rec.max_abs_diff > 0.0) {
      log_dt.push_back(std::log(gdt));
      log_diff.push_back(std::log(rec.max_abs_diff));
    }
  }
  write_text_file((fs::path(cmd.out) / "discrepancies.csv").string(),
                  table.str());
  files.push_back("discrepancies.csv");

  json cfg_json;
  cfg_json["l"] = cmd.l;
  cfg_json["omega_over_gamma"] = cmd.omega_over_gamma;
  cfg_json["gamma_dt"] = gamma_dts;
  cfg_json["t_final"] = cmd.t_final;
  cfg_json["rate_convention"] = cmd.rate_convention;

  if (log_dt.size() >= 2) {
    // least-squares slope of log(max diff) vs log(gamma dt)
    const double n = static_cast<double>(log_dt.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < log_dt.size(); ++i) {
      sx += log_dt[i];
      sy += log_diff[i];
      sxx += log_dt[i] * log_dt[i];
      sxy += log_dt[i] * log_diff[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom != 0.0) {
      const double slope = (n * sxy - sx * sy) / denom;
      cfg_json["discrepancy_loglog_slope"] = slope;
      std::cout << "log-log slope of max |dn| vs gamma*dt: " << slope << "\n";
    }
  }
  write_manifest(cmd.out, "lindblad-compare", cfg_json, files);
}

// ---------------------------------------------------------------- analyze

struct AnalyzeCmd {
  std::string in;
  std::string method = "both";   // r2 | flat-alpha | both
  std::string fit_window_spec = "10:100";
  std::string avg_window_spec = "80:100";
  double restrict_above = std::numeric_limits<double>::quiet_NaN();
  std::string out;
};

std::optional<double> try_alpha(const criticality::SeriesFamily& fam,
                                std::size_t idx,
                                const criticality::Window& avg_window) {
  if (idx >= fam.entries.size()) return std::nullopt;
  try {
    return criticality::estimate_alpha(fam.entries[idx].second, avg_window);
  } catch (const numerical_error&) {
    return std::nullopt;
  }
}

criticality::CriticalEstimate single_estimate(
    const criticality::SeriesFamily& fam, const criticality::SlicePick& pick,
    const criticality::Window& avg_window, const std::string& method) {
  criticality::CriticalEstimate est;
  est.p1 = fam.p1;
  est.p2_crit = pick.p2_crit;
  est.p2_err = pick.grid_err;
  est.alpha = criticality::estimate_alpha(fam.entries[pick.index].second,
                                          avg_window);
  est.method = method;
  const std::optional<double> below =
      pick.index > 0 ? try_alpha(fam, pick.index - 1, avg_window)
                     : std::nullopt;
  const std::optional<double> above =
      try_alpha(fam, pick.index + 1, avg_window);
  // No half-L/half-chi companion runs in a single tree: those components stay
  // zero and the budget reduces to the neighbor-grid term.
  est.components = criticality::error_budget(est.alpha, std::nullopt,
                                             std::nullopt, above, below);
  est.alpha_err = est.components->combined;
  return est;
}

void run_analyze_cmd(const AnalyzeCmd& cmd) {
  const scan::ScanTree tree = scan::load_scan_tree(cmd.in);
  ensure_dir(cmd.out);

  const criticality::Window fit_req =
      parse_window(cmd.fit_window_spec, "fit");
  const criticality::Window avg_req =
      parse_window(cmd.avg_window_spec, "avg");
  const int t_max = tree.steps;
  const criticality::Window fit_eff =
      criticality::rescale_window(fit_req, t_max);
  const criticality::Window avg_eff =
      criticality::rescale_window(avg_req, t_max);

  // group tree entries into per-p1 families, preserving grid order
  std::vector<criticality::SeriesFamily> families;
  for (const scan::ScanEntry& entry : tree.entries) {
    if (!entry.ok) {
      std::cerr << "skipping failed grid point " << entry.rel_dir << "\n";
      continue;
    }
    const std::string path =
        (fs::path(tree.root) / entry.rel_dir / "series.csv").string();
    TimeSeries series = read_csv_file(path);
    if (families.empty() || families.back().p1 != entry.p1) {
      criticality::SeriesFamily fam;
      fam.p1 = entry.p1;
      fam.provenance = tree.backend;
      families.push_back(std::move(fam));
    }
    families.back().entries.emplace_back(entry.p2, std::move(series));
  }
  if (families.empty()) {
    throw validation_error("no usable grid points in " + cmd.in);
  }

  const std::optional<double> restrict =
      std::isnan(cmd.restrict_above) ? std::nullopt
                                     : std::optional<double>(cmd.restrict_above);

  std::vector<criticality::CriticalEstimate> all;
  std::vector<std::string> files;
  for (const criticality::SeriesFamily& fam : families) {
    std::optional<criticality::CriticalEstimate> est_r2, est_flat;
    if (cmd.method == "r2" || cmd.method == "both") {
      const auto pick = criticality::critical_by_r2(fam, fit_eff);
      est_r2 = single_estimate(fam, pick, avg_eff, "r2-fit");
      all.push_back(*est_r2);
    }
    if (cmd.method == "flat-alpha" || cmd.method == "both") {
      const auto pick =
          criticality::critical_by_flat_alpha(fam, avg_eff, restrict);
      est_flat = single_estimate(fam, pick, avg_eff, "flat-alpha");
      all.push_back(*est_flat);
    }
    if (est_r2 && est_flat) {
      all.push_back(criticality::combine_methods(*est_r2, *est_flat));
    }

    // one effective-exponent figure per family
    std::vector<svg::Series> curves;
    for (const auto& [p2, series] : fam.entries) {
      const auto pts = criticality::effective_exponent(series);
      if (pts.empty()) continue;
      svg::Series s;
      s.label = scan::grid_dirname("p2", p2);
      s.markers = true;
      for (const auto& pt : pts) {
        s.x.push_back(pt.t);
        s.y.push_back(pt.alpha);
      }
      curves.push_back(std::move(s));
    }
    if (!curves.empty()) {
      svg::LinePlotOptions lopt;
      lopt.title = "effective exponent, " +
                   scan::grid_dirname("p1", fam.p1);
      lopt.x_label = "t";
      lopt.y_label = "alpha(t)";
      lopt.ref_lines = {{criticality::kAlphaDp, "DP 0.159464"},
                        {criticality::kAlphaQcp, "QCP 0.32"}};
      const std::string name =
          "alpha_" + scan::grid_dirname("p1", fam.p1) + ".svg";
      svg::write_svg_file(svg::line_plot(curves, lopt),
                          (fs::path(cmd.out) / name).string());
      files.push_back(name);
    }
  }

  json out_json;
  out_json["t_max"] = t_max;
  out_json["fit_window"] = {fit_req.lo, fit_req.hi};
  out_json["avg_window"] = {avg_req.lo, avg_req.hi};
  out_json["fit_window_effective"] = {fit_eff.lo, fit_eff.hi};
  out_json["avg_window_effective"] = {avg_eff.lo, avg_eff.hi};
  out_json["method"] = cmd.method;
  json est_array = json::array();
  for (const auto& est : all) {
    est_array.push_back(json::parse(criticality::estimate_to_json(est)));
  }
  out_json["estimates"] = est_array;
  write_text_file((fs::path(cmd.out) / "estimates.json").string(),
                  out_json.dump(2) + "\n");
  write_text_file((fs::path(cmd.out) / "estimates.csv").string(),
                  criticality::estimates_to_csv(all));
  files.insert(files.begin(), {"estimates.json", "estimates.csv"});

  json cfg_json;
  cfg_json["in"] = cmd.in;
  cfg_json["method"] = cmd.method;
  cfg_json["fit_window"] = {fit_req.lo, fit_req.hi};
  cfg_json["avg_window"] = {avg_req.lo, avg_req.hi};
  cfg_json["fit_window_effective"] = {fit_eff.lo, fit_eff.hi};
  cfg_json["avg_window_effective"] = {avg_eff.lo, avg_eff.hi};
  if (restrict) cfg_json["restrict_above"] = *restrict;
  write_manifest(cmd.out, "analyze", cfg_json, files);
  for (const auto& est : all) {
    std::cout << "p1=" << est.p1 << " [" << est.method
              << "] p2_crit=" << est.p2_crit << " +/- " << est.p2_err
              << ", alpha=" << est.alpha << " +/- " << est.alpha_err << "\n";
  }
}

// ---------------------------------------------------------------- plot

struct PlotCmd {
  std::string kind;
  std::vector<std::string> inputs;
  std::string out;
  std::string title;
  bool log_x = false;
  bool log_y = false;
};

std::string series_label(const std::string& path) {
  const fs::path p(path);
  if (p.filename() == "series.csv" && p.has_parent_path()) {
    return p.parent_path().filename().string();
  }
  return p.stem().string();
}

void run_plot_cmd(const PlotCmd& cmd) {
  if (cmd.inputs.empty()) throw validation_error("plot needs input files");
  std::string markup;
  if (cmd.kind == "phase-diagram") {
    if (cmd.inputs.size() != 1) {
      throw validation_error("phase-diagram plot takes exactly one JSON input");
    }
    std::ifstream f(cmd.inputs[0]);
    if (!f) throw io_error("cannot open " + cmd.inputs[0]);
    std::stringstream buf;
    buf << f.rdbuf();
    const meanfield::PhaseDiagram pd =
        meanfield::phase_diagram_from_json(buf.str());
    svg::HeatmapOptions hopt;
    hopt.title = cmd.title.empty() ? "stationary density" : cmd.title;
    hopt.x_label = "p2";
    hopt.y_label = "p1";
    markup = svg::heatmap(pd.p2_grid, pd.p1_grid, pd.n_stationary, hopt);
  } else if (cmd.kind == "series" || cmd.kind == "effective-exponent") {
    std::vector<svg::Series> curves;
    for (const std::string& input : cmd.inputs) {
      const TimeSeries ts = read_csv_file(input);
      svg::Series s;
      s.label = series_label(input);
      if (cmd.kind == "series") {
        for (std::size_t i = 0; i < ts.t.size(); ++i) {
          s.x.push_back(ts.t[i]);
          s.y.push_back(ts.n_mean[i]);
        }
      } else {
        s.markers = true;
        for (const auto& pt : criticality::effective_exponent(ts)) {
          s.x.push_back(pt.t);
          s.y.push_back(pt.alpha);
        }
      }
      curves.push_back(std::move(s));
    }
    svg::LinePlotOptions lopt;
    lopt.log_x = cmd.log_x;
    lopt.log_y = cmd.log_y;
    if (cmd.kind == "series") {
      lopt.title = cmd.title.empty() ? "density decay" : cmd.title;
      lopt.x_label = "t";
      lopt.y_label = "n_mean";
    } else {
      lopt.title = cmd.title.empty() ? "effective exponent" : cmd.title;
      lopt.x_label = "t";
      lopt.y_label = "alpha(t)";
      lopt.ref_lines = {{criticality::kAlphaDp, "DP 0.159464"},
                        {criticality::kAlphaQcp, "QCP 0.32"}};
    }
    markup = svg::line_plot(curves, lopt);
  } else {
    throw validation_error("unknown plot kind: " + cmd.kind);
  }
  if (cmd.out.empty()) throw validation_error("plot needs --out");
  if (fs::path(cmd.out).has_parent_path()) {
    ensure_dir(fs::path(cmd.out).parent_path().string());
  }
  svg::write_svg_file(markup, cmd.out);
  std::cout << "wrote " << cmd.out << "\n";
}

// ---------------------------------------------------------------- wiring

void bind_evolve_flags(CLI::App* cmd, scan::EvolveJob& job) {
  cmd->add_option("--backend", job.backend,
                  "dense | mps | ancilla (two-row dense variant)")
      ->check(CLI::IsMember({"dense", "mps", "ancilla"}));
  cmd->add_option("--L", job.l, "chain length");
  cmd->add_option("--T", job.steps, "number of time steps");
  cmd->add_option("--initial", job.initial,
                  "full | vacuum | mixed | bit pattern (dense only)");
  cmd->add_option("--chi", job.chi_max, "bond dimension cap (mps)");
  cmd->add_option("--cutoff", job.cutoff, "relative singular-value floor");
  cmd->add_flag("--record-sites", job.record_sites, "emit per-site densities");
  cmd->add_flag("--record-transverse", job.record_transverse,
                "emit transverse means");
}

void bind_evolve_config(ConfigBinder& b, scan::EvolveJob& job) {
  b.add("backend", job.backend);
  b.add("l", job.l);
  b.add("steps", job.steps);
  b.add("initial", job.initial);
  b.add("chi_max", job.chi_max);
  b.add("cutoff", job.cutoff);
  b.add("record_sites", job.record_sites);
  b.add("record_transverse", job.record_transverse);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reduced-dynamics cellular-automaton simulator and "
               "nonequilibrium-criticality toolkit"};
  app.require_subcommand(1);

  EvolveCmd evolve_cmd;
  ScanCmd scan_cmd;
  MeanFieldCmd mf_cmd;
  LindbladCmd lb_cmd;
  AnalyzeCmd an_cmd;
  PlotCmd plot_cmd;
  std::string config_path;

  // evolve
  auto* evolve = app.add_subcommand("evolve", "run one trajectory to CSV");
  bind_evolve_flags(evolve, evolve_cmd.job);
  evolve->add_option("--p1", evolve_cmd.job.p1, "branching probability");
  evolve->add_option("--p2", evolve_cmd.job.p2, "decay probability");
  evolve->add_option("--out", evolve_cmd.out, "output directory");
  evolve->add_option("--config", config_path, "JSON config; flags override");
  evolve->callback([&] { run_evolve_cmd(evolve_cmd); });

  // scan
  auto* scan_sub =
      app.add_subcommand("scan", "grid of trajectories with a worker pool");
  bind_evolve_flags(scan_sub, scan_cmd.base);
  scan_sub->add_option("--p1", scan_cmd.p1_spec,
                       "p1 grid: lo:hi:count or comma list")
      ->required();
  scan_sub->add_option("--p2", scan_cmd.p2_spec,
                       "p2 grid: lo:hi:count or comma list")
      ->required();
  scan_sub->add_option("--jobs", scan_cmd.jobs,
                       "worker count (default: QCA_CRITIC_JOBS or 1)");
  scan_sub->add_option("--out", scan_cmd.out, "output tree root")->required();
  scan_sub->add_option("--config", config_path, "JSON config; flags override");
  int scan_exit = 0;
  scan_sub->callback([&] { scan_exit = run_scan_cmd(scan_cmd); });

  // meanfield
  auto* mf = app.add_subcommand(
      "meanfield", "product-state phase diagram and transition classifier");
  mf->add_option("--p1", mf_cmd.p1_spec, "p1 grid: lo:hi:count or comma list");
  mf->add_option("--p2", mf_cmd.p2_spec, "p2 grid: lo:hi:count or comma list");
  mf->add_option("--max-iter", mf_cmd.max_iter, "iteration cap per point");
  mf->add_option("--tol", mf_cmd.tol, "fixed-point tolerance");
  mf->add_option("--threshold", mf_cmd.threshold,
                 "|gradient| threshold for the discontinuity flag (at the "
                 "2001-point reference resolution)");
  mf->add_option("--jobs", mf_cmd.jobs,
                 "worker count (default: QCA_CRITIC_JOBS or 1)");
  mf->add_flag("--svg", mf_cmd.emit_svg, "also write a heatmap SVG");
  mf->add_option("--out", mf_cmd.out, "output directory")->required();
  mf->add_option("--config", config_path, "JSON config; flags override");
  mf->callback([&] { run_meanfield_cmd(mf_cmd); });

  // lindblad-compare
  auto* lb = app.add_subcommand(
      "lindblad-compare",
      "discrete map vs continuous-time master equation");
  lb->add_option("--L", lb_cmd.l, "chain length (dense, <= 6)");
  lb->add_option("--omega-over-gamma", lb_cmd.omega_over_gamma,
                 "branching-to-decay rate ratio");
  lb->add_option("--gamma-dt", lb_cmd.gamma_dt_spec,
                 "gamma*dt values: comma list or lo:hi:count");
  lb->add_option("--t-final", lb_cmd.t_final, "horizon in units of 1/gamma");
  lb->add_option("--rate-convention", lb_cmd.rate_convention,
                 "theta-sq-eq-gamma-dt | theta-sq-eq-half-gamma-dt")
      ->check(CLI::IsMember(
          {"theta-sq-eq-gamma-dt", "theta-sq-eq-half-gamma-dt"}));
  lb->add_option("--out", lb_cmd.out, "output directory")->required();
  lb->add_option("--config", config_path, "JSON config; flags override");
  lb->callback([&] { run_lindblad_cmd(lb_cmd); });

  // analyze
  auto* an = app.add_subcommand(
      "analyze", "critical-point and exponent estimates from a scan tree");
  an->add_option("--in", an_cmd.in, "scan tree root (with manifest.json)")
      ->required();
  an->add_option("--method", an_cmd.method, "r2 | flat-alpha | both")
      ->check(CLI::IsMember({"r2", "flat-alpha", "both"}));
  an->add_option("--fit-window", an_cmd.fit_window_spec,
                 "log-log fit window lo:hi (at the T=100 reference scale)");
  an->add_option("--avg-window", an_cmd.avg_window_spec,
                 "exponent averaging window lo:hi (bounds apply to 2t)");
  an->add_option("--restrict-above", an_cmd.restrict_above,
                 "exclude slices with p2 <= this bound (flat-alpha method)");
  an->add_option("--out", an_cmd.out, "output directory")->required();
  an->add_option("--config", config_path, "JSON config; flags override");
  an->callback([&] { run_analyze_cmd(an_cmd); });

  // plot
  auto* plot = app.add_subcommand("plot", "render CSV/JSON results to SVG");
  plot->add_option("--kind", plot_cmd.kind,
                   "phase-diagram | series | effective-exponent")
      ->required();
  plot->add_option("inputs", plot_cmd.inputs, "input files");
  plot->add_option("--out", plot_cmd.out, "output SVG path")->required();
  plot->add_option("--title", plot_cmd.title, "figure title");
  plot->add_flag("--log-x", plot_cmd.log_x, "logarithmic x axis");
  plot->add_flag("--log-y", plot_cmd.log_y, "logarithmic y axis");
  plot->add_option("--config", config_path, "JSON config; flags override");
  plot->callback([&] { run_plot_cmd(plot_cmd); });

  try {
    // Config file values land on the bound structs before the real parse, so
    // explicit flags always win; unknown keys are rejected per subcommand.
    std::string sub;
    if (argc >= 2 && argv[1][0] != '-') sub = argv[1];
    std::string pre_config;
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      if (a == "--config" && i + 1 < argc) pre_config = argv[i + 1];
      if (a.rfind("--config=", 0) == 0) pre_config = a.substr(9);
    }
    if (!pre_config.empty()) {
      const json cfg = load_config_file(pre_config);
      ConfigBinder binder;
      if (sub == "evolve") {
        bind_evolve_config(binder, evolve_cmd.job);
        binder.add("p1", evolve_cmd.job.p1);
        binder.add("p2", evolve_cmd.job.p2);
        binder.add("out", evolve_cmd.out);
      } else if (sub == "scan") {
        bind_evolve_config(binder, scan_cmd.base);
        binder.add_grid("p1", scan_cmd.p1_spec);
        binder.add_grid("p2", scan_cmd.p2_spec);
        binder.add("jobs", scan_cmd.jobs);
        binder.add("out", scan_cmd.out);
      } else if (sub == "meanfield") {
        binder.add_grid("p1", mf_cmd.p1_spec);
        binder.add_grid("p2", mf_cmd.p2_spec);
        binder.add("max_iter", mf_cmd.max_iter);
        binder.add("tol", mf_cmd.tol);
        binder.add("threshold", mf_cmd.threshold);
        binder.add("jobs", mf_cmd.jobs);
        binder.add("svg", mf_cmd.emit_svg);
        binder.add("out", mf_cmd.out);
      } else if (sub == "lindblad-compare") {
        binder.add("l", lb_cmd.l);
        binder.add("omega_over_gamma", lb_cmd.omega_over_gamma);
        binder.add_grid("gamma_dt", lb_cmd.gamma_dt_spec);
        binder.add("t_final", lb_cmd.t_final);
        binder.add("rate_convention", lb_cmd.rate_convention);
        binder.add("out", lb_cmd.out);
      } else if (sub == "analyze") {
        binder.add("in", an_cmd.in);
        binder.add("method", an_cmd.method);
        binder.add("fit_window", an_cmd.fit_window_spec);
        binder.add("avg_window", an_cmd.avg_window_spec);
        binder.add("restrict_above", an_cmd.restrict_above);
        binder.add("out", an_cmd.out);
      } else if (sub == "plot") {
        binder.add("kind", plot_cmd.kind);
        binder.add("inputs", plot_cmd.inputs);
        binder.add("out", plot_cmd.out);
        binder.add("title", plot_cmd.title);
        binder.add("log_x", plot_cmd.log_x);
        binder.add("log_y", plot_cmd.log_y);
      } else {
        throw validation_error("--config requires a known subcommand");
      }
      binder.apply(cfg, sub.empty() ? "(none)" : sub);
    }

    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const capacity_error& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 2;
  } catch (const std::bad_alloc&) {
    std::cerr << "capacity error: allocation failed\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const io_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 4;
  }
  return scan_exit;
}
