#include "qca/criticality.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

namespace qca::criticality {

namespace {

std::map<int, double> density_by_time(const TimeSeries& series) {
  std::map<int, double> by_t;
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    by_t[series.t[i]] = series.n_mean[i];
  }
  return by_t;
}

// alpha samples whose later time 2t falls inside the closed window
std::vector<AlphaPoint> alpha_in_window(const TimeSeries& series,
                                        const Window& w) {
  std::vector<AlphaPoint> pts;
  for (const AlphaPoint& p : effective_exponent(series)) {
    const double later = 2.0 * p.t;
    if (later >= w.lo && later <= w.hi) pts.push_back(p);
  }
  return pts;
}

double slice_grid_err(const SeriesFamily& family, std::size_t idx) {
  const auto& e = family.entries;
  double err = 0.0;
  if (idx > 0) err = std::max(err, e[idx].first - e[idx - 1].first);
  if (idx + 1 < e.size()) err = std::max(err, e[idx + 1].first - e[idx].first);
  return err;
}

void check_family(const SeriesFamily& family) {
  if (family.entries.empty()) {
    throw validation_error("series family is empty");
  }
  for (std::size_t i = 1; i < family.entries.size(); ++i) {
    if (family.entries[i].first <= family.entries[i - 1].first) {
      throw validation_error("family p2 values must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<AlphaPoint> effective_exponent(const TimeSeries& series) {
  const auto by_t = density_by_time(series);
  std::vector<AlphaPoint> pts;
  const int t_max = series.steps();
  for (int t = 1; 2 * t <= t_max; ++t) {
    const auto a = by_t.find(t);
    const auto b = by_t.find(2 * t);
    if (a == by_t.end() || b == by_t.end()) continue;
    if (a->second <= 0.0 || b->second <= 0.0) continue;   // omitted point
    pts.push_back({t, -std::log2(b->second / a->second)});
  }
  return pts;
}

Window rescale_window(const Window& w, int t_max, int t_ref) {
  const double f = static_cast<double>(t_max) / t_ref;
  return Window{w.lo * f, w.hi * f};
}

LoglogFit loglog_fit(const TimeSeries& series, const Window& window) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < series.t.size(); ++i) {
    const int t = series.t[i];
    if (t < 1 || t < window.lo || t > window.hi) continue;
    if (series.n_mean[i] <= 0.0) continue;
    xs.push_back(std::log(static_cast<double>(t)));
    ys.push_back(std::log(series.n_mean[i]));
  }
  if (xs.size() < 3) {
    throw numerical_error("log-log fit needs at least 3 positive points, got " +
                          std::to_string(xs.size()));
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw numerical_error("degenerate time window in fit");
  LoglogFit fit;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  double ss_res = 0, ss_tot = 0;
  const double ymean = sy / m;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double pred = fit.intercept + fit.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
  }
  // constant response carries no power-law evidence
  fit.r2 = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 0.0;
  return fit;
}

SlicePick critical_by_r2(const SeriesFamily& family, const Window& window) {
  check_family(family);
  double best_r2 = -1.0;
  std::size_t best_idx = 0;
  bool any = false;
  for (std::size_t i = 0; i < family.entries.size(); ++i) {
    double r2;
    try {
      r2 = loglog_fit(family.entries[i].second, window).r2;
    } catch (const numerical_error&) {
      continue;   // unusable slice (too few positive points)
    }
    any = true;
    if (r2 > best_r2) {
      best_r2 = r2;
      best_idx = i;
    }
  }
  if (!any) {
    throw numerical_error("no usable slice in the family for the r2 method");
  }
  return SlicePick{family.entries[best_idx].first,
                   slice_grid_err(family, best_idx), best_idx};
}

SlicePick critical_by_flat_alpha(const SeriesFamily& family,
                                 const Window& avg_window,
                                 std::optional<double> restrict_above) {
  check_family(family);
  double best_score = 0.0;
  std::size_t best_idx = 0;
  bool any = false;
  for (std::size_t i = 0; i < family.entries.size(); ++i) {
    const double p2 = family.entries[i].first;
    if (restrict_above && p2 <= *restrict_above) continue;
    const auto pts = alpha_in_window(family.entries[i].second, avg_window);
    if (pts.size() < 2) continue;   // no gradient sample available
    double mean = 0.0;
    for (const AlphaPoint& p : pts) mean += p.alpha;
    mean /= pts.size();
    // mean |first difference| of the shifted curve over the sample index
    double score = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) {
      score += std::abs((pts[k].alpha - mean) - (pts[k - 1].alpha - mean));
    }
    score /= static_cast<double>(pts.size() - 1);
    if (!any || score < best_score) {
      any = true;
      best_score = score;
      best_idx = i;
    }
  }
  if (!any) {
    throw numerical_error(
        "no usable slice in the family for the flat-exponent method");
  }
  return SlicePick{family.entries[best_idx].first,
                   slice_grid_err(family, best_idx), best_idx};
}

double estimate_alpha(const TimeSeries& series, const Window& avg_window) {
  const auto pts = alpha_in_window(series, avg_window);
  if (pts.empty()) {
    throw numerical_error("no effective-exponent samples in the window");
  }
  double mean = 0.0;
  for (const AlphaPoint& p : pts) mean += p.alpha;
  return mean / pts.size();
}

ErrorBudget error_budget(double alpha_ref, std::optional<double> alpha_half_l,
                         std::optional<double> alpha_half_chi,
                         std::optional<double> alpha_neighbor_above,
                         std::optional<double> alpha_neighbor_below) {
  ErrorBudget eb;
  if (alpha_half_l) eb.finite_size = std::abs(alpha_ref - *alpha_half_l);
  if (alpha_half_chi) eb.finite_chi = std::abs(alpha_ref - *alpha_half_chi);
  if (alpha_neighbor_above) {
    eb.grid = std::max(eb.grid, std::abs(alpha_ref - *alpha_neighbor_above));
  }
  if (alpha_neighbor_below) {
    eb.grid = std::max(eb.grid, std::abs(alpha_ref - *alpha_neighbor_below));
  }
  // |ref| * sqrt(sum (c/|ref|)^2) collapses to the plain root sum of squares;
  // the fractional reading only fails to parse at ref = 0, which we flag.
  eb.absolute_fallback = alpha_ref == 0.0;
  eb.combined = std::sqrt(eb.finite_size * eb.finite_size +
                          eb.finite_chi * eb.finite_chi + eb.grid * eb.grid);
  return eb;
}

CriticalEstimate combine_methods(const CriticalEstimate& est_r2,
                                 const CriticalEstimate& est_flat) {
  if (est_r2.p1 != est_flat.p1) {
    throw validation_error("cannot combine estimates at different p1");
  }
  CriticalEstimate out;
  out.p1 = est_r2.p1;
  out.p2_crit = 0.5 * (est_r2.p2_crit + est_flat.p2_crit);
  out.p2_err = std::hypot(est_r2.p2_err, est_flat.p2_err);
  out.alpha = 0.5 * (est_r2.alpha + est_flat.alpha);
  out.alpha_err = std::hypot(est_r2.alpha_err, est_flat.alpha_err);
  out.method = "averaged";
  if (est_r2.components && est_flat.components) {
    ErrorBudget eb;
    eb.finite_size = std::hypot(est_r2.components->finite_size,
                                est_flat.components->finite_size);
    eb.finite_chi = std::hypot(est_r2.components->finite_chi,
                               est_flat.components->finite_chi);
    eb.grid = std::hypot(est_r2.components->grid, est_flat.components->grid);
    eb.combined = out.alpha_err;
    eb.absolute_fallback = est_r2.components->absolute_fallback ||
                           est_flat.components->absolute_fallback;
    out.components = eb;
  }
  return out;
}

std::string estimate_to_json(const CriticalEstimate& est) {
  nlohmann::json j;
  j["p1"] = est.p1;
  j["p2_crit"] = est.p2_crit;
  j["p2_err"] = est.p2_err;
  j["alpha"] = est.alpha;
  j["alpha_err"] = est.alpha_err;
  j["method"] = est.method;
  if (est.components) {
    j["components"] = {{"finite_size_err", est.components->finite_size},
                       {"finite_chi_err", est.components->finite_chi},
                       {"grid_err", est.components->grid},
                       {"absolute_fallback", est.components->absolute_fallback}};
  }
  return j.dump(2);
}

std::string estimates_to_csv(const std::vector<CriticalEstimate>& ests) {
  std::ostringstream out;
  out << "p1,p2_crit,p2_err,alpha,alpha_err,method\n";
  for (const CriticalEstimate& e : ests) {
    out << format_double(e.p1) << ',' << format_double(e.p2_crit) << ','
        << format_double(e.p2_err) << ',' << format_double(e.alpha) << ','
        << format_double(e.alpha_err) << ',' << e.method << "\n";
  }
  return out.str();
}

}  // namespace qca::criticality
