#pragma once

// Critical-point and decay-exponent estimation from families of density time
// series: doubling-ratio effective exponents, log-log fits, the two slice
// selectors, and the error budget.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qca/common.hpp"
#include "qca/timeseries.hpp"

namespace qca::criticality {

// Reference decay exponents used for plot annotation only (never as priors):
// one-dimensional directed percolation and the one-dimensional quantum
// contact process (two published estimates).
inline constexpr double kAlphaDp = 0.159464;
inline constexpr double kAlphaDpErr = 0.000006;
inline constexpr double kAlphaQcp = 0.32;
inline constexpr double kAlphaQcpErr = 0.01;
inline constexpr double kAlphaQcpAlt = 0.36;
inline constexpr double kAlphaQcpAltErr = 0.08;

struct AlphaPoint {
  int t = 0;
  double alpha = 0.0;
};

// alpha(t) = -log2(n(2t)/n(t)) for integer t >= 1 with 2t <= T; points with
// non-positive density at t or 2t are omitted.
std::vector<AlphaPoint> effective_exponent(const TimeSeries& series);

// Closed windows; for the averaging window the bound applies to the later
// time 2t of each alpha sample, matching the doubling construction.
struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

// Proportional rescale for runs shorter/longer than the reference horizon.
Window rescale_window(const Window& w, int t_max, int t_ref = 100);

struct LoglogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Least squares of log n on log t over t in [window.lo, window.hi]; needs at
// least 3 positive points; zero-variance response has r2 = 0 by convention.
LoglogFit loglog_fit(const TimeSeries& series, const Window& window);

struct SeriesFamily {
  double p1 = 0.0;
  std::vector<std::pair<double, TimeSeries>> entries;   // (p2, series), p2 asc
  std::string provenance;
};

struct SlicePick {
  double p2_crit = 0.0;
  double grid_err = 0.0;
  std::size_t index = 0;
};

// Slice whose log-log fit has the highest r2 over the window.
SlicePick critical_by_r2(const SeriesFamily& family,
                         const Window& window = {10.0, 100.0});

// Slice whose mean-shifted alpha(t) is flattest over the averaging window
// (smallest mean |first difference|); slices with p2 <= restrict_above are
// excluded when the restriction is set.
SlicePick critical_by_flat_alpha(
    const SeriesFamily& family, const Window& avg_window = {80.0, 100.0},
    std::optional<double> restrict_above = std::nullopt);

// Mean of alpha(t) over the averaging window.
double estimate_alpha(const TimeSeries& series,
                      const Window& avg_window = {80.0, 100.0});

struct ErrorBudget {
  double combined = 0.0;
  double finite_size = 0.0;
  double finite_chi = 0.0;
  double grid = 0.0;
  bool absolute_fallback = false;   // alpha_ref was 0, combined absolutely
};

// finite_size = |ref - half_L|, finite_chi = |ref - half_chi|, grid = max
// deviation over available neighbor estimates; combined as root sum of
// squares of the fractional components (missing inputs contribute zero).
ErrorBudget error_budget(double alpha_ref, std::optional<double> alpha_half_l,
                         std::optional<double> alpha_half_chi,
                         std::optional<double> alpha_neighbor_above,
                         std::optional<double> alpha_neighbor_below);

struct CriticalEstimate {
  double p1 = 0.0;
  double p2_crit = 0.0;
  double p2_err = 0.0;
  double alpha = 0.0;
  double alpha_err = 0.0;
  std::string method;   // "r2-fit" | "flat-alpha" | "averaged"
  std::optional<ErrorBudget> components;
};

// Arithmetic means of the values, root-sum-of-square errors; inputs must
// share p1.
CriticalEstimate combine_methods(const CriticalEstimate& est_r2,
                                 const CriticalEstimate& est_flat);

std::string estimate_to_json(const CriticalEstimate& est);
std::string estimates_to_csv(const std::vector<CriticalEstimate>& ests);

}  // namespace qca::criticality
