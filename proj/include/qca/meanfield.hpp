#pragma once

// Translation-invariant product-state (mean-field) dynamics: the one-site
// update is the exact three-site reduced map, iterated for stationary states
// and the phase diagram, with the gradient-based transition classifier.

#include <string>
#include <vector>

#include "qca/common.hpp"
#include "qca/gates.hpp"

namespace qca::meanfield {

struct MeanFieldState {
  double n = 0.0;
  double sx = 0.0;
  double sy = 0.0;
};

// One update via the three-site contraction: two control copies of the
// product state plus an empty target, conjugated by the local gate, controls
// traced out.  This contraction is the definition of the map; see
// mf_step_transcribed for the divergent closed-form transcription.
MeanFieldState mf_step(const MeanFieldState& s, const GateParams& params);

// Literal transcription of a published closed form of the same update.  It
// disagrees with the contraction in two places (the n-update bracket enters
// with the wrong overall sign, and the sx-update coefficient linear in n
// carries a spurious factor 2); kept verbatim for documentation and tests.
// Never used by the pipeline.
MeanFieldState mf_step_transcribed(const MeanFieldState& s,
                                   const GateParams& params);

struct StationaryResult {
  MeanFieldState state;
  bool converged = false;
  long iterations = 0;
};

StationaryResult mf_stationary(const GateParams& params,
                               const MeanFieldState& s0, long max_iter = 10000,
                               double tol = 1e-12);

// Newton refinement of (n, sx) on the sy = 0 section, seeded from an
// iterated result; cross-check utility only.
StationaryResult mf_refine_fixed_point(const GateParams& params,
                                       const MeanFieldState& seed);

// Stationary density branch at p1 = 1: max(0, 3/2 + 1/(p2-1)).
double mf_p1_one_closed_form(double p2);

struct PhaseDiagram {
  std::vector<double> p1_grid;
  std::vector<double> p2_grid;
  std::vector<double> n_stationary;   // row-major, |p1_grid| x |p2_grid|
  long max_iter = 10000;
  double tol = 1e-12;

  double at(std::size_t i1, std::size_t i2) const {
    return n_stationary[i1 * p2_grid.size() + i2];
  }
};

struct PhaseDiagramConfig {
  long max_iter = 10000;
  double tol = 1e-12;
  int jobs = 1;
};

// Stationary density per grid point from the fully occupied start (1,0,0).
PhaseDiagram mf_phase_diagram(const std::vector<double>& p1_grid,
                              const std::vector<double>& p2_grid,
                              const PhaseDiagramConfig& config = {});

struct CriticalLinePoint {
  double p1 = 0.0;
  double p2_crit = 0.0;
  double max_abs_gradient = 0.0;
  bool discontinuous = false;
  bool degenerate = false;   // all-zero slice; p2_crit meaningless
};

// Per-p1 slice: central-difference gradient of n* over p2, p2_crit at the
// maximum |gradient|, discontinuous iff that maximum exceeds the threshold.
// `gradient_threshold` is quoted at the reference resolution of 2001 samples
// spanning [0,1] and is rescaled linearly with the actual sample density.
std::vector<CriticalLinePoint> mf_critical_line(
    const PhaseDiagram& diagram, double gradient_threshold = 10.0);

std::string phase_diagram_to_json(const PhaseDiagram& pd);
PhaseDiagram phase_diagram_from_json(const std::string& text);
void write_phase_diagram_csv(const PhaseDiagram& pd, const std::string& path);
std::string critical_line_to_json(const std::vector<CriticalLinePoint>& line);

}  // namespace qca::meanfield
