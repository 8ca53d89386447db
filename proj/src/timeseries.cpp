#include "qca/timeseries.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace qca {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const TimeSeries& ts, std::ostream& out) {
  const std::size_t rows = ts.t.size();
  if (ts.n_mean.size() != rows ||
      (ts.has_sites() && ts.n_site.size() != rows) ||
      (ts.has_transverse() && (ts.sx_mean.size() != rows || ts.sy_mean.size() != rows))) {
    throw validation_error("time series columns have inconsistent lengths");
  }
  out << "t,n_mean";
  if (ts.has_sites()) {
    for (std::size_t k = 1; k <= ts.n_site.front().size(); ++k) out << ",n_" << k;
  }
  if (ts.has_transverse()) out << ",sx_mean,sy_mean";
  out << "\n";
  for (std::size_t i = 0; i < rows; ++i) {
    out << ts.t[i] << ',' << format_double(ts.n_mean[i]);
    if (ts.has_sites()) {
      for (double v : ts.n_site[i]) out << ',' << format_double(v);
    }
    if (ts.has_transverse()) {
      out << ',' << format_double(ts.sx_mean[i]) << ',' << format_double(ts.sy_mean[i]);
    }
    out << "\n";
  }
}

void write_csv_file(const TimeSeries& ts, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open for writing: " + path);
  write_csv(ts, f);
  if (!f.good()) throw io_error("write failed: " + path);
}

TimeSeries read_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw io_error("empty time-series stream");

  std::vector<std::string> cols;
  {
    std::stringstream hs(header);
    std::string tok;
    while (std::getline(hs, tok, ',')) cols.push_back(tok);
  }
  if (cols.size() < 2 || cols[0] != "t" || cols[1] != "n_mean") {
    throw io_error("unrecognized time-series header: " + header);
  }
  int site_cols = 0;
  bool transverse = false;
  for (std::size_t i = 2; i < cols.size(); ++i) {
    if (cols[i] == "sx_mean") {
      if (i + 2 != cols.size() || cols[i + 1] != "sy_mean") {
        throw io_error("unrecognized time-series header: " + header);
      }
      transverse = true;
      break;
    }
    ++site_cols;
  }

  TimeSeries ts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string tok;
    std::vector<std::string> parts;
    while (std::getline(ls, tok, ',')) parts.push_back(tok);
    const std::size_t expected = 2 + site_cols + (transverse ? 2 : 0);
    if (parts.size() != expected) {
      throw io_error("time-series row has " + std::to_string(parts.size()) +
                     " fields, expected " + std::to_string(expected));
    }
    std::size_t i = 0;
    ts.t.push_back(std::stoi(parts[i++]));
    ts.n_mean.push_back(std::stod(parts[i++]));
    if (site_cols > 0) {
      std::vector<double> row(site_cols);
      for (int k = 0; k < site_cols; ++k) row[k] = std::stod(parts[i++]);
      ts.n_site.push_back(std::move(row));
    }
    if (transverse) {
      ts.sx_mean.push_back(std::stod(parts[i++]));
      ts.sy_mean.push_back(std::stod(parts[i++]));
    }
  }
  return ts;
}

TimeSeries read_csv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open for reading: " + path);
  return read_csv(f);
}

}  // namespace qca
