#pragma once

// Grid-scan orchestration: one evolve job per (p1, p2) grid point, executed
// on a bounded worker pool, persisted under a deterministic directory layout
// with a manifest that suffices to re-run the job.

#include <optional>
#include <string>
#include <vector>

#include "qca/mps.hpp"
#include "qca/timeseries.hpp"

namespace qca::scan {

struct EvolveJob {
  std::string backend = "dense";   // "dense" | "mps"
  int l = 4;
  double p1 = 0.0;
  double p2 = 0.0;
  int steps = 100;
  // "full", "vacuum", "mixed", or (dense only) an explicit occupation
  // pattern like "1010"
  std::string initial = "full";
  int chi_max = 64;
  double cutoff = 1e-12;
  bool record_sites = false;
  bool record_transverse = false;
};

// Run one job; MPS diagnostics returned when the backend produces them.
TimeSeries run_evolve(const EvolveJob& job,
                      std::vector<mps::StepDiagnostics>* diagnostics);

// Run and persist series.csv (+ diagnostics.csv for the MPS backend) into
// an existing directory.
void run_evolve_to_dir(const EvolveJob& job, const std::string& dir);

struct ScanConfig {
  EvolveJob base;                  // template; p1/p2 overwritten per point
  std::vector<double> p1_grid;
  std::vector<double> p2_grid;
  int jobs = 1;
  std::string out_dir;
};

struct PointOutcome {
  double p1 = 0.0;
  double p2 = 0.0;
  std::string rel_dir;
  bool ok = false;
  std::string error;
};

struct ScanOutcome {
  std::vector<PointOutcome> points;   // row-major grid order
  int failures = 0;
};

// Executes every grid point (failures recorded, scan continues), writes the
// tree and its manifest.json.  Output bytes are independent of `jobs`.
ScanOutcome run_scan(const ScanConfig& cfg);

// Directory-name component for one grid value, e.g. "p1=0.25".
std::string grid_dirname(const std::string& key, double v);

// ISO-8601 UTC timestamp, overridden verbatim by QCA_CRITIC_EPOCH so reruns
// can be made byte-identical.
std::string manifest_timestamp();

struct ScanEntry {
  double p1 = 0.0;
  double p2 = 0.0;
  std::string rel_dir;
  bool ok = false;
};

struct ScanTree {
  std::string root;
  int steps = 0;
  std::string backend;
  std::vector<ScanEntry> entries;
};

// Read back a scan tree through its manifest.
ScanTree load_scan_tree(const std::string& dir);

}  // namespace qca::scan
