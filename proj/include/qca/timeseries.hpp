#pragma once
// Observable trajectories and their CSV form.
//
// CSV layout: header `t,n_mean[,n_1..n_L][,sx_mean,sy_mean]`, one row per step,
// floats printed with 17 significant digits so values round-trip exactly.

#include <iosfwd>
#include <string>
#include <vector>

#include "qca/common.hpp"

namespace qca {

struct ObservableSelection {
  bool per_site = false;    // emit n_1..n_L columns
  bool transverse = false;  // emit sx_mean, sy_mean columns
};

struct TimeSeries {
  std::vector<int> t;
  std::vector<double> n_mean;
  std::vector<std::vector<double>> n_site;  // empty unless per-site requested
  std::vector<double> sx_mean;              // empty unless transverse requested
  std::vector<double> sy_mean;

  int steps() const { return t.empty() ? -1 : t.back(); }
  bool has_sites() const { return !n_site.empty(); }
  bool has_transverse() const { return !sx_mean.empty(); }
};

void write_csv(const TimeSeries& ts, std::ostream& out);
void write_csv_file(const TimeSeries& ts, const std::string& path);
TimeSeries read_csv(std::istream& in);
TimeSeries read_csv_file(const std::string& path);

// 17-significant-digit formatting used by every emitter in the project.
std::string format_double(double v);

}  // namespace qca
