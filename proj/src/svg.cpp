#include "qca/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace qca::svg {

namespace {

constexpr const char* kPalette[] = {
    "#1b6ca8", "#d1495b", "#2e8b57", "#e28413",
    "#6a4c93", "#00798c", "#8d5524", "#444444",
};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double place(double v, double px_lo, double px_hi) const {
    double t;
    if (log) {
      t = (std::log10(v) - std::log10(lo)) /
          (std::log10(hi) - std::log10(lo));
    } else {
      t = (v - lo) / (hi - lo);
    }
    return px_lo + t * (px_hi - px_lo);
  }
};

// round limits outward to a tidy step and emit tick positions
std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step - 1e-9) * step;
  for (; t <= hi + 1e-9 * span; t += step) {
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  const int e_lo = static_cast<int>(std::floor(std::log10(lo) + 1e-12));
  const int e_hi = static_cast<int>(std::ceil(std::log10(hi) - 1e-12));
  for (int e = e_lo; e <= e_hi; ++e) {
    const double v = std::pow(10.0, e);
    if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) ticks.push_back(v);
  }
  if (ticks.empty()) ticks = {lo, hi};
  return ticks;
}

bool usable(double v, bool log_axis) {
  return std::isfinite(v) && (!log_axis || v > 0.0);
}

// five-stop dark-blue -> yellow ramp, linearly interpolated
std::string ramp_color(double t) {
  static const double stops[5][3] = {{68, 1, 84},
                                     {59, 82, 139},
                                     {33, 145, 140},
                                     {94, 201, 98},
                                     {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 4.0;
  const int i = std::min(3, static_cast<int>(pos));
  const double f = pos - i;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] +
                                             f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] +
                                             f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] +
                                             f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

void open_svg(std::ostringstream& out, int w, int h) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h
      << "\" font-family=\"Helvetica, Arial, sans-serif\">\n"
      << "<rect width=\"" << w << "\" height=\"" << h
      << "\" fill=\"#ffffff\"/>\n";
}

void draw_frame(std::ostringstream& out, double x0, double y0, double x1,
                double y1) {
  out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\""
      << fmt(x1 - x0) << "\" height=\"" << fmt(y1 - y0)
      << "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
}

void draw_title_labels(std::ostringstream& out, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       int w, double x0, double y0, double x1, double y1) {
  if (!title.empty()) {
    out << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(y0 - 14)
        << "\" text-anchor=\"middle\" font-size=\"16\">" << escape(title)
        << "</text>\n";
  }
  if (!x_label.empty()) {
    out << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(y1 + 36)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(x_label)
        << "</text>\n";
  }
  if (!y_label.empty()) {
    out << "<text x=\"" << fmt(x0 - 46) << "\" y=\"" << fmt((y0 + y1) / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 "
        << fmt(x0 - 46) << ' ' << fmt((y0 + y1) / 2) << ")\">"
        << escape(y_label) << "</text>\n";
  }
  (void)w;
}

}  // namespace

std::string line_plot(const std::vector<Series>& series,
                      const LinePlotOptions& opt) {
  if (series.empty()) throw validation_error("line plot needs data");

  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  std::size_t points = 0;
  for (const Series& s : series) {
    if (s.x.size() != s.y.size()) {
      throw validation_error("series '" + s.label + "' has ragged columns");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], opt.log_x) || !usable(s.y[i], opt.log_y)) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
      ++points;
    }
  }
  if (points == 0) throw validation_error("line plot has no plottable points");
  for (const RefLine& r : opt.ref_lines) {
    if (usable(r.y, opt.log_y)) {
      y_lo = std::min(y_lo, r.y);
      y_hi = std::max(y_hi, r.y);
    }
  }
  if (x_lo == x_hi) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_lo == y_hi) {
    const double pad = y_lo == 0.0 ? 0.5 : std::abs(y_lo) * 0.1;
    y_lo -= pad;
    y_hi += pad;
  }
  if (!opt.log_y) {
    const double pad = (y_hi - y_lo) * 0.06;
    y_lo -= pad;
    y_hi += pad;
  } else {
    y_lo /= 1.3;
    y_hi *= 1.3;
  }
  if (!opt.log_x) {
    const double pad = (x_hi - x_lo) * 0.03;
    x_lo -= pad;
    x_hi += pad;
  }

  const Axis ax{x_lo, x_hi, opt.log_x};
  const Axis ay{y_lo, y_hi, opt.log_y};
  const double px0 = 72, py0 = 44;
  const double px1 = opt.width - 28.0, py1 = opt.height - 56.0;
  auto sx = [&](double v) { return ax.place(v, px0, px1); };
  auto sy = [&](double v) { return ay.place(v, py1, py0); };

  std::ostringstream out;
  open_svg(out, opt.width, opt.height);

  const std::vector<double> xt =
      opt.log_x ? log_ticks(x_lo, x_hi) : linear_ticks(x_lo, x_hi);
  const std::vector<double> yt =
      opt.log_y ? log_ticks(y_lo, y_hi) : linear_ticks(y_lo, y_hi);
  for (double t : xt) {
    const double px = sx(t);
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(py0) << "\" x2=\""
        << fmt(px) << "\" y2=\"" << fmt(py1)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
        << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(py1 + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(t)
        << "</text>\n";
  }
  for (double t : yt) {
    const double py = sy(t);
    out << "<line x1=\"" << fmt(px0) << "\" y1=\"" << fmt(py) << "\" x2=\""
        << fmt(px1) << "\" y2=\"" << fmt(py)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
        << "<text x=\"" << fmt(px0 - 6) << "\" y=\"" << fmt(py + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(t)
        << "</text>\n";
  }

  for (const RefLine& r : opt.ref_lines) {
    if (!usable(r.y, opt.log_y) || r.y < y_lo || r.y > y_hi) continue;
    const double py = sy(r.y);
    out << "<line x1=\"" << fmt(px0) << "\" y1=\"" << fmt(py) << "\" x2=\""
        << fmt(px1) << "\" y2=\"" << fmt(py)
        << "\" stroke=\"#999999\" stroke-width=\"1\" "
           "stroke-dasharray=\"6 4\"/>\n";
    if (!r.label.empty()) {
      out << "<text x=\"" << fmt(px1 - 4) << "\" y=\"" << fmt(py - 4)
          << "\" text-anchor=\"end\" font-size=\"11\" fill=\"#555555\">"
          << escape(r.label) << "</text>\n";
    }
  }

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const std::string color =
        s.color.empty() ? kPalette[si % kPaletteSize] : s.color;
    std::string run;
    int run_points = 0;
    auto flush = [&]() {
      if (run_points >= 2) {
        out << "<polyline points=\"" << run << "\" fill=\"none\" stroke=\""
            << color << "\" stroke-width=\"1.6\"/>\n";
      }
      run.clear();
      run_points = 0;
    };
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], opt.log_x) || !usable(s.y[i], opt.log_y)) {
        flush();
        continue;
      }
      if (!run.empty()) run += ' ';
      run += fmt(sx(s.x[i])) + "," + fmt(sy(s.y[i]));
      ++run_points;
      if (s.markers) {
        out << "<circle cx=\"" << fmt(sx(s.x[i])) << "\" cy=\""
            << fmt(sy(s.y[i])) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
      }
    }
    flush();
  }

  double ly = py0 + 16;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    if (s.label.empty()) continue;
    const std::string color =
        s.color.empty() ? kPalette[si % kPaletteSize] : s.color;
    out << "<line x1=\"" << fmt(px1 - 150) << "\" y1=\"" << fmt(ly - 4)
        << "\" x2=\"" << fmt(px1 - 126) << "\" y2=\"" << fmt(ly - 4)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << fmt(px1 - 120) << "\" y=\"" << fmt(ly)
        << "\" font-size=\"12\">" << escape(s.label) << "</text>\n";
    ly += 17;
  }

  draw_frame(out, px0, py0, px1, py1);
  draw_title_labels(out, opt.title, opt.x_label, opt.y_label, opt.width, px0,
                    py0, px1, py1);
  out << "</svg>\n";
  return out.str();
}

std::string heatmap(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& values,
                    const HeatmapOptions& opt) {
  const std::size_t nx = x.size();
  const std::size_t ny = y.size();
  if (nx == 0 || ny == 0 || values.size() != nx * ny) {
    throw validation_error("heatmap grid/value shape mismatch");
  }
  double v_lo = std::numeric_limits<double>::infinity();
  double v_hi = -v_lo;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    v_lo = std::min(v_lo, v);
    v_hi = std::max(v_hi, v);
  }
  if (!(v_lo <= v_hi)) {
    v_lo = 0.0;
    v_hi = 1.0;
  }
  if (v_lo == v_hi) v_hi = v_lo + 1.0;

  const double px0 = 72, py0 = 44;
  const double px1 = opt.width - 96.0, py1 = opt.height - 56.0;
  const double cell_w = (px1 - px0) / static_cast<double>(nx);
  const double cell_h = (py1 - py0) / static_cast<double>(ny);

  std::ostringstream out;
  open_svg(out, opt.width, opt.height);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    // low y at the bottom
    const double top = py1 - cell_h * static_cast<double>(iy + 1);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double v = values[iy * nx + ix];
      const std::string fill =
          std::isfinite(v) ? ramp_color((v - v_lo) / (v_hi - v_lo))
                           : std::string("#bbbbbb");
      out << "<rect x=\"" << fmt(px0 + cell_w * static_cast<double>(ix))
          << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(cell_w + 0.5)
          << "\" height=\"" << fmt(cell_h + 0.5) << "\" fill=\"" << fill
          << "\"/>\n";
    }
  }

  // sparse axis labels: ends plus middle
  auto label_of = [&](const std::vector<double>& g, std::size_t i) {
    return fmt(g[i]);
  };
  const std::size_t x_marks[] = {0, nx / 2, nx - 1};
  for (std::size_t i : x_marks) {
    const double px = px0 + cell_w * (static_cast<double>(i) + 0.5);
    out << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(py1 + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << label_of(x, i)
        << "</text>\n";
  }
  const std::size_t y_marks[] = {0, ny / 2, ny - 1};
  for (std::size_t i : y_marks) {
    const double py = py1 - cell_h * (static_cast<double>(i) + 0.5);
    out << "<text x=\"" << fmt(px0 - 6) << "\" y=\"" << fmt(py + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << label_of(y, i)
        << "</text>\n";
  }

  // colorbar
  const double bar_x = px1 + 18, bar_w = 16;
  const int bar_steps = 64;
  const double bar_h = (py1 - py0) / bar_steps;
  for (int i = 0; i < bar_steps; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / bar_steps;
    out << "<rect x=\"" << fmt(bar_x) << "\" y=\""
        << fmt(py1 - bar_h * (i + 1)) << "\" width=\"" << fmt(bar_w)
        << "\" height=\"" << fmt(bar_h + 0.5) << "\" fill=\"" << ramp_color(t)
        << "\"/>\n";
  }
  out << "<rect x=\"" << fmt(bar_x) << "\" y=\"" << fmt(py0) << "\" width=\""
      << fmt(bar_w) << "\" height=\"" << fmt(py1 - py0)
      << "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n"
      << "<text x=\"" << fmt(bar_x + bar_w + 4) << "\" y=\"" << fmt(py1 + 4)
      << "\" font-size=\"11\">" << fmt(v_lo) << "</text>\n"
      << "<text x=\"" << fmt(bar_x + bar_w + 4) << "\" y=\"" << fmt(py0 + 4)
      << "\" font-size=\"11\">" << fmt(v_hi) << "</text>\n";

  draw_frame(out, px0, py0, px1, py1);
  draw_title_labels(out, opt.title, opt.x_label, opt.y_label, opt.width, px0,
                    py0, px1, py1);
  out << "</svg>\n";
  return out.str();
}

void write_svg_file(const std::string& markup, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << markup;
  if (!f.good()) throw io_error("write failed: " + path);
}

}  // namespace qca::svg
