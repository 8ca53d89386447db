#include "qca/scan.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "qca/dense.hpp"

namespace fs = std::filesystem;

namespace qca::scan {

namespace {

dense::RowState dense_initial(const EvolveJob& job) {
  if (job.initial == "full") {
    return dense::initial_state(job.l, dense::StateKind::FullyOccupied);
  }
  if (job.initial == "vacuum") {
    return dense::initial_state(job.l, dense::StateKind::Vacuum);
  }
  std::vector<dense::Bloch> sites;
  if (job.initial == "mixed") {
    sites.assign(job.l, dense::Bloch{0.0, 0.0, 0.0});
    return dense::initial_state_product(sites);
  }
  if (static_cast<int>(job.initial.size()) == job.l &&
      job.initial.find_first_not_of("01") == std::string::npos) {
    for (char c : job.initial) {
      sites.push_back(dense::Bloch{0.0, 0.0, c == '1' ? 1.0 : -1.0});
    }
    return dense::initial_state_product(sites);
  }
  throw validation_error("unrecognized initial state: " + job.initial);
}

mps::ProductKind mps_initial_kind(const std::string& name) {
  if (name == "full") return mps::ProductKind::FullyOccupied;
  if (name == "vacuum") return mps::ProductKind::Vacuum;
  if (name == "mixed") return mps::ProductKind::MaximallyMixed;
  throw validation_error(
      "matrix-product backend supports initial states full|vacuum|mixed, got " +
      name);
}

nlohmann::json job_json(const EvolveJob& job) {
  nlohmann::json j;
  j["backend"] = job.backend;
  j["l"] = job.l;
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

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << text;
  if (!f.good()) throw io_error("write failed: " + path);
}

}  // namespace

TimeSeries run_evolve(const EvolveJob& job,
                      std::vector<mps::StepDiagnostics>* diagnostics) {
  const LocalOperators ops =
      build_local_operators(make_gate_params(job.p1, job.p2));
  if (job.backend == "dense" || job.backend == "ancilla") {
    dense::EvolveOptions opt;
    opt.steps = job.steps;
    opt.record_sites = job.record_sites;
    opt.record_transverse = job.record_transverse;
    opt.backend = job.backend == "ancilla" ? "ancilla" : "kraus";
    return dense::evolve(dense_initial(job), ops, opt);
  }
  if (job.backend == "mps") {
    mps::MpsEvolveOptions opt;
    opt.steps = job.steps;
    opt.record_sites = job.record_sites;
    opt.record_transverse = job.record_transverse;
    mps::MpsEvolveResult res = mps::mps_evolve(
        mps::mps_from_product(job.l, mps_initial_kind(job.initial),
                              job.chi_max, job.cutoff),
        ops, opt);
    if (diagnostics) *diagnostics = std::move(res.diagnostics);
    return std::move(res.series);
  }
  throw validation_error("unknown backend: " + job.backend);
}

void run_evolve_to_dir(const EvolveJob& job, const std::string& dir) {
  std::vector<mps::StepDiagnostics> diag;
  const TimeSeries ts = run_evolve(job, &diag);
  write_csv_file(ts, (fs::path(dir) / "series.csv").string());
  if (job.backend == "mps") {
    mps::write_diagnostics_csv(diag,
                               (fs::path(dir) / "diagnostics.csv").string());
  }
}

std::string grid_dirname(const std::string& key, double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return key + "=" + buf;
}

std::string manifest_timestamp() {
  if (const char* epoch = std::getenv("QCA_CRITIC_EPOCH")) {
    return epoch;
  }
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

ScanOutcome run_scan(const ScanConfig& cfg) {
  if (cfg.p1_grid.empty() || cfg.p2_grid.empty()) {
    throw validation_error("scan grids must be non-empty");
  }
  for (const auto* grid : {&cfg.p1_grid, &cfg.p2_grid}) {
    for (std::size_t i = 1; i < grid->size(); ++i) {
      if (!((*grid)[i] > (*grid)[i - 1])) {
        throw validation_error("scan grids must be strictly increasing");
      }
    }
  }
  if (cfg.out_dir.empty()) throw validation_error("scan needs an output dir");
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw io_error("cannot create " + cfg.out_dir + ": " + ec.message());

  const std::size_t total = cfg.p1_grid.size() * cfg.p2_grid.size();
  ScanOutcome outcome;
  outcome.points.resize(total);

  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = cursor.fetch_add(1);
      if (idx >= total) return;
      PointOutcome& pt = outcome.points[idx];
      pt.p1 = cfg.p1_grid[idx / cfg.p2_grid.size()];
      pt.p2 = cfg.p2_grid[idx % cfg.p2_grid.size()];
      pt.rel_dir =
          grid_dirname("p1", pt.p1) + "/" + grid_dirname("p2", pt.p2);
      try {
        const fs::path dir = fs::path(cfg.out_dir) / pt.rel_dir;
        fs::create_directories(dir);
        EvolveJob job = cfg.base;
        job.p1 = pt.p1;
        job.p2 = pt.p2;
        run_evolve_to_dir(job, dir.string());
        pt.ok = true;
      } catch (const std::exception& e) {
        pt.ok = false;
        pt.error = e.what();
      }
    }
  };
  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const PointOutcome& pt : outcome.points) {
    if (!pt.ok) ++outcome.failures;
  }

  // manifest assembled in grid order after the pool drains, so the bytes do
  // not depend on scheduling (worker count deliberately left out)
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["command"] = "scan";
  manifest["timestamp"] = manifest_timestamp();
  manifest["config"] = job_json(cfg.base);
  manifest["config"]["p1_grid"] = cfg.p1_grid;
  manifest["config"]["p2_grid"] = cfg.p2_grid;
  nlohmann::json entries = nlohmann::json::array();
  for (const PointOutcome& pt : outcome.points) {
    nlohmann::json e;
    e["p1"] = pt.p1;
    e["p2"] = pt.p2;
    e["path"] = pt.rel_dir;
    e["status"] = pt.ok ? "ok" : "failed";
    if (!pt.ok) e["error"] = pt.error;
    entries.push_back(e);
  }
  manifest["entries"] = entries;
  write_text((fs::path(cfg.out_dir) / "manifest.json").string(),
             manifest.dump(2) + "\n");
  return outcome;
}

ScanTree load_scan_tree(const std::string& dir) {
  const fs::path manifest_path = fs::path(dir) / "manifest.json";
  std::ifstream f(manifest_path);
  if (!f) throw io_error("cannot open " + manifest_path.string());
  nlohmann::json manifest;
  try {
    f >> manifest;
  } catch (const nlohmann::json::parse_error& e) {
    throw io_error("manifest parse failure: " + std::string(e.what()));
  }
  ScanTree tree;
  tree.root = dir;
  try {
    tree.backend = manifest.at("config").at("backend").get<std::string>();
    tree.steps = manifest.at("config").at("steps").get<int>();
    for (const auto& e : manifest.at("entries")) {
      ScanEntry entry;
      entry.p1 = e.at("p1").get<double>();
      entry.p2 = e.at("p2").get<double>();
      entry.rel_dir = e.at("path").get<std::string>();
      entry.ok = e.at("status").get<std::string>() == "ok";
      tree.entries.push_back(entry);
    }
  } catch (const nlohmann::json::exception& e) {
    throw io_error("manifest missing fields: " + std::string(e.what()));
  }
  return tree;
}

}  // namespace qca::scan
