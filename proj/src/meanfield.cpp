#include "qca/meanfield.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "qca/timeseries.hpp"

namespace qca::meanfield {

namespace {

void check_feasible(const MeanFieldState& s) {
  const double bz = 2.0 * s.n - 1.0;
  if (s.sx * s.sx + s.sy * s.sy + bz * bz > 1.0 + 1e-9) {
    throw validation_error("mean-field state outside the Bloch cone");
  }
}

Mat2 one_site(const MeanFieldState& s) {
  Mat2 r;
  r << cplx(1.0 - s.n, 0.0), cplx(0.5 * s.sx, 0.5 * s.sy),
      cplx(0.5 * s.sx, -0.5 * s.sy), cplx(s.n, 0.0);
  return r;
}

MeanFieldState step_with_gate(const MeanFieldState& s, const Mat8& g) {
  const Mat2 r1 = one_site(s);
  // (r1 (x) r1 (x) |empty><empty|), slot 1 = MSB
  Mat8 rho3 = Mat8::Zero();
  for (int a1 = 0; a1 < 2; ++a1)
    for (int b1 = 0; b1 < 2; ++b1)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2) {
          rho3(a1 * 4 + a2 * 2, b1 * 4 + b2 * 2) = r1(a1, b1) * r1(a2, b2);
        }
  const Mat8 x = g * rho3 * g.adjoint();
  // trace out the two control slots, keep the target slot
  Mat2 r = Mat2::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int m = 0; m < 4; ++m) r(i, j) += x(m * 2 + i, m * 2 + j);
  MeanFieldState out;
  out.n = r(1, 1).real();
  out.sx = 2.0 * r(0, 1).real();
  out.sy = 2.0 * r(0, 1).imag();
  return out;
}

double max_delta(const MeanFieldState& a, const MeanFieldState& b) {
  return std::max({std::abs(a.n - b.n), std::abs(a.sx - b.sx),
                   std::abs(a.sy - b.sy)});
}

}  // namespace

MeanFieldState mf_step(const MeanFieldState& s, const GateParams& params) {
  check_feasible(s);
  // cache the gate for repeated calls at a fixed parameter point
  thread_local double cached_p1 = -1.0, cached_p2 = -1.0;
  thread_local Mat8 cached_g;
  if (params.p1 != cached_p1 || params.p2 != cached_p2) {
    cached_g = local_gate(params);
    cached_p1 = params.p1;
    cached_p2 = params.p2;
  }
  return step_with_gate(s, cached_g);
}

MeanFieldState mf_step_transcribed(const MeanFieldState& s,
                                   const GateParams& params) {
  check_feasible(s);
  const double p1 = params.p1, p2 = params.p2;
  const double n = s.n, sx = s.sx, sy = s.sy;
  const double rt2 = std::sqrt(2.0);
  const double q = std::sqrt(p1) * std::sqrt(1.0 - p1);
  const double w = std::sqrt(1.0 - p1);
  MeanFieldState out;
  out.n = (1.0 - p2) * (p1 * n * n +
                        (0.5 * rt2 * q * sx - 0.5 * p1 - 1.0) * n -
                        0.125 * p1 * (sx * sx + sy * sy));
  out.sy = std::sqrt(1.0 - p2) * sy * (n * (1.0 - w) +
                                       0.5 * rt2 * std::sqrt(p1) * sx + w);
  out.sx = std::sqrt(1.0 - p2) *
           (2.0 * rt2 * q * n * n -
            (2.0 * rt2 * q + (2.0 * p1 + w - 1.0) * sx) * n + w * sx -
            0.25 * rt2 * std::sqrt(p1) * (w - 1.0) * sx * sx -
            0.25 * rt2 * std::sqrt(p1) * (w + 1.0) * sy * sy);
  return out;
}

StationaryResult mf_stationary(const GateParams& params,
                               const MeanFieldState& s0, long max_iter,
                               double tol) {
  if (max_iter < 1) throw validation_error("max_iter must be at least 1");
  if (!(tol > 0.0)) throw validation_error("tol must be positive");
  check_feasible(s0);
  const Mat8 g = local_gate(params);
  StationaryResult res;
  MeanFieldState cur = s0;
  for (long it = 1; it <= max_iter; ++it) {
    const MeanFieldState next = step_with_gate(cur, g);
    res.iterations = it;
    if (max_delta(next, cur) < tol) {
      res.converged = true;
      cur = next;
      break;
    }
    cur = next;
  }
  res.state = cur;
  return res;
}

StationaryResult mf_refine_fixed_point(const GateParams& params,
                                       const MeanFieldState& seed) {
  const Mat8 g = local_gate(params);
  double n = seed.n, sx = seed.sx;
  const double h = 1e-8;
  StationaryResult res;
  for (int it = 1; it <= 50; ++it) {
    auto f = [&](double nn, double xx) {
      const MeanFieldState out = step_with_gate({nn, xx, 0.0}, g);
      return std::pair<double, double>(out.n - nn, out.sx - xx);
    };
    const auto [f1, f2] = f(n, sx);
    res.iterations = it;
    if (std::abs(f1) < 1e-14 && std::abs(f2) < 1e-14) {
      res.converged = true;
      break;
    }
    const auto [f1n, f2n] = f(n + h, sx);
    const auto [f1x, f2x] = f(n, sx + h);
    const double j11 = (f1n - f1) / h, j12 = (f1x - f1) / h;
    const double j21 = (f2n - f2) / h, j22 = (f2x - f2) / h;
    const double det = j11 * j22 - j12 * j21;
    if (std::abs(det) < 1e-14) break;   // singular Jacobian near criticality
    n -= (j22 * f1 - j12 * f2) / det;
    sx -= (-j21 * f1 + j11 * f2) / det;
  }
  res.state = MeanFieldState{n, sx, 0.0};
  return res;
}

double mf_p1_one_closed_form(double p2) {
  if (!(p2 >= 0.0 && p2 < 1.0)) {
    throw validation_error("closed form needs p2 in [0,1)");
  }
  return std::max(0.0, 1.5 + 1.0 / (p2 - 1.0));
}

PhaseDiagram mf_phase_diagram(const std::vector<double>& p1_grid,
                              const std::vector<double>& p2_grid,
                              const PhaseDiagramConfig& config) {
  if (p1_grid.empty() || p2_grid.empty()) {
    throw validation_error("phase-diagram grids must be non-empty");
  }
  for (const auto* grid : {&p1_grid, &p2_grid}) {
    for (std::size_t i = 1; i < grid->size(); ++i) {
      if ((*grid)[i] <= (*grid)[i - 1]) {
        throw validation_error("grids must be strictly increasing");
      }
    }
  }
  PhaseDiagram pd;
  pd.p1_grid = p1_grid;
  pd.p2_grid = p2_grid;
  pd.max_iter = config.max_iter;
  pd.tol = config.tol;
  const std::size_t total = p1_grid.size() * p2_grid.size();
  pd.n_stationary.assign(total, 0.0);

  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = cursor.fetch_add(1);
      if (idx >= total) return;
      const double p1 = p1_grid[idx / p2_grid.size()];
      const double p2 = p2_grid[idx % p2_grid.size()];
      const StationaryResult r =
          mf_stationary(make_gate_params(p1, p2), MeanFieldState{1.0, 0.0, 0.0},
                        config.max_iter, config.tol);
      pd.n_stationary[idx] = r.state.n;
    }
  };
  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return pd;
}

std::vector<CriticalLinePoint> mf_critical_line(const PhaseDiagram& diagram,
                                                double gradient_threshold) {
  const std::size_t np2 = diagram.p2_grid.size();
  if (np2 < 3) {
    throw validation_error("classifier needs at least 3 p2 samples per slice");
  }
  // rescale the threshold from the 2001-points-on-[0,1] reference density
  const double spacing =
      (diagram.p2_grid.back() - diagram.p2_grid.front()) / (np2 - 1);
  const double threshold_eff = gradient_threshold * (5e-4 / spacing);

  std::vector<CriticalLinePoint> line;
  line.reserve(diagram.p1_grid.size());
  for (std::size_t i1 = 0; i1 < diagram.p1_grid.size(); ++i1) {
    CriticalLinePoint pt;
    pt.p1 = diagram.p1_grid[i1];
    bool all_zero = true;
    for (std::size_t i2 = 0; i2 < np2; ++i2) {
      if (std::abs(diagram.at(i1, i2)) > 1e-12) {
        all_zero = false;
        break;
      }
    }
    if (all_zero) {
      pt.degenerate = true;
      pt.p2_crit = std::numeric_limits<double>::quiet_NaN();
      line.push_back(pt);
      continue;
    }
    double best = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t i2 = 0; i2 < np2; ++i2) {
      double grad;
      if (i2 == 0) {
        grad = (diagram.at(i1, 1) - diagram.at(i1, 0)) /
               (diagram.p2_grid[1] - diagram.p2_grid[0]);
      } else if (i2 == np2 - 1) {
        grad = (diagram.at(i1, np2 - 1) - diagram.at(i1, np2 - 2)) /
               (diagram.p2_grid[np2 - 1] - diagram.p2_grid[np2 - 2]);
      } else {
        grad = (diagram.at(i1, i2 + 1) - diagram.at(i1, i2 - 1)) /
               (diagram.p2_grid[i2 + 1] - diagram.p2_grid[i2 - 1]);
      }
      if (std::abs(grad) > best) {
        best = std::abs(grad);
        best_idx = i2;
      }
    }
    pt.p2_crit = diagram.p2_grid[best_idx];
    pt.max_abs_gradient = best;
    pt.discontinuous = best > threshold_eff;
    line.push_back(pt);
  }
  return line;
}

std::string phase_diagram_to_json(const PhaseDiagram& pd) {
  nlohmann::json j;
  j["p1_grid"] = pd.p1_grid;
  j["p2_grid"] = pd.p2_grid;
  j["n_stationary"] = pd.n_stationary;   // row-major over (p1, p2)
  j["max_iter"] = pd.max_iter;
  j["tol"] = pd.tol;
  return j.dump(2);
}

PhaseDiagram phase_diagram_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw io_error(std::string("phase-diagram JSON parse failure: ") +
                   e.what());
  }
  PhaseDiagram pd;
  try {
    pd.p1_grid = j.at("p1_grid").get<std::vector<double>>();
    pd.p2_grid = j.at("p2_grid").get<std::vector<double>>();
    pd.n_stationary = j.at("n_stationary").get<std::vector<double>>();
    pd.max_iter = j.at("max_iter").get<long>();
    pd.tol = j.at("tol").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("phase-diagram JSON missing fields: ") +
                   e.what());
  }
  if (pd.n_stationary.size() != pd.p1_grid.size() * pd.p2_grid.size()) {
    throw io_error("phase-diagram JSON has inconsistent matrix shape");
  }
  return pd;
}

void write_phase_diagram_csv(const PhaseDiagram& pd, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << "p1,p2,n_star\n";
  for (std::size_t i1 = 0; i1 < pd.p1_grid.size(); ++i1) {
    for (std::size_t i2 = 0; i2 < pd.p2_grid.size(); ++i2) {
      f << format_double(pd.p1_grid[i1]) << ',' << format_double(pd.p2_grid[i2])
        << ',' << format_double(pd.at(i1, i2)) << "\n";
    }
  }
  if (!f.good()) throw io_error("write failed: " + path);
}

std::string critical_line_to_json(const std::vector<CriticalLinePoint>& line) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CriticalLinePoint& pt : line) {
    nlohmann::json j;
    j["p1"] = pt.p1;
    if (pt.degenerate) {
      j["degenerate"] = true;
    } else {
      j["p2_crit"] = pt.p2_crit;
      j["max_abs_gradient"] = pt.max_abs_gradient;
      j["order"] = pt.discontinuous ? "discontinuous" : "continuous";
    }
    arr.push_back(j);
  }
  return arr.dump(2);
}

}  // namespace qca::meanfield
