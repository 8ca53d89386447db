#include "qca/dense.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace qca::dense {

namespace {

constexpr int kMaxSites = 7;

void check_capacity(int l) {
  if (l < 1) throw validation_error("row length must be at least 1");
  if (l > kMaxSites) {
    throw capacity_error("dense backend supports at most " +
                         std::to_string(kMaxSites) + " sites, got " +
                         std::to_string(l));
  }
}

void check_steppable(int l) {
  check_capacity(l);
  if (l < 2) throw validation_error("row dynamics needs at least 2 sites");
}

}  // namespace

void apply_two_qubit_rows(Mat& m, const Mat4& g, int a, int b, int n) {
  const long rows = 1L << n;
  const long bit_a = 1L << (n - a);
  const long bit_b = 1L << (n - b);
  const long cols = m.cols();
  Eigen::Matrix<cplx, 4, Eigen::Dynamic> buf(4, cols);
  for (long base = 0; base < rows; ++base) {
    if (base & (bit_a | bit_b)) continue;
    const long idx[4] = {base, base | bit_b, base | bit_a,
                         base | bit_a | bit_b};
    for (int s = 0; s < 4; ++s) {
      buf.row(s).setZero();
      for (int t = 0; t < 4; ++t) {
        const cplx w = g(s, t);
        if (w != cplx(0.0, 0.0)) buf.row(s) += w * m.row(idx[t]);
      }
    }
    for (int s = 0; s < 4; ++s) m.row(idx[s]) = buf.row(s);
  }
}

Mat embed_two_qubit(const Mat4& g, int a, int b, int n) {
  const long dim = 1L << n;
  Mat m = Mat::Identity(dim, dim);
  apply_two_qubit_rows(m, g, a, b, n);
  return m;
}

RowState initial_state(int l, StateKind kind) {
  check_capacity(l);
  const long dim = 1L << l;
  RowState s;
  s.l = l;
  s.rho = Mat::Zero(dim, dim);
  s.rho(kind == StateKind::Vacuum ? 0 : dim - 1,
        kind == StateKind::Vacuum ? 0 : dim - 1) = cplx(1.0, 0.0);
  return s;
}

RowState initial_state_product(const std::vector<Bloch>& sites) {
  const int l = static_cast<int>(sites.size());
  check_capacity(l);
  Mat rho = Mat::Ones(1, 1);
  for (const Bloch& p : sites) {
    const double purity = p.sx * p.sx + p.sy * p.sy + p.bz * p.bz;
    if (purity > 1.0 + 1e-12) {
      throw validation_error("Bloch triple lies outside the unit ball");
    }
    Mat2 site;
    site << cplx(0.5 * (1.0 - p.bz), 0.0), cplx(0.5 * p.sx, 0.5 * p.sy),
        cplx(0.5 * p.sx, -0.5 * p.sy), cplx(0.5 * (1.0 + p.bz), 0.0);
    rho = Eigen::kroneckerProduct(rho, site).eval();
  }
  return RowState{l, std::move(rho)};
}

RowState step_kraus(const RowState& s, const LocalOperators& ops) {
  check_steppable(s.l);
  Mat rho = s.rho;
  // U = U_{1,2} U_{2,3} ... U_{L-1,L}: rightmost factor acts first.
  for (int k = s.l - 1; k >= 1; --k) {
    apply_two_qubit_rows(rho, ops.u_two_site, k, k + 1, s.l);
  }
  {
    // rho U^dag = (U rho^dag)^dag, so reuse the row kernel on the adjoint.
    Mat rt = rho.adjoint();
    for (int k = s.l - 1; k >= 1; --k) {
      apply_two_qubit_rows(rt, ops.u_two_site, k, k + 1, s.l);
    }
    rho = rt.adjoint();
  }
  // per-site decay channel
  const long dim = 1L << s.l;
  for (int j = 1; j <= s.l; ++j) {
    const long bit = 1L << (s.l - j);
    Mat out = Mat::Zero(dim, dim);
    for (int which = 0; which < 2; ++which) {
      const Mat2& k = which == 0 ? ops.kraus_empty : ops.kraus_filled;
      Mat tmp = Mat::Zero(dim, dim);
      for (long r = 0; r < dim; ++r) {
        const long base = r & ~bit;
        const int a = (r & bit) ? 1 : 0;
        for (int b = 0; b < 2; ++b) {
          const cplx w = k(a, b);
          if (w != cplx(0.0, 0.0)) {
            tmp.row(r) += w * rho.row(base | (b ? bit : 0));
          }
        }
      }
      for (long c = 0; c < dim; ++c) {
        const long base = c & ~bit;
        const int b = (c & bit) ? 1 : 0;
        for (int a = 0; a < 2; ++a) {
          const cplx w = std::conj(k(b, a));
          if (w != cplx(0.0, 0.0)) {
            out.col(c) += w * tmp.col(base | (a ? bit : 0));
          }
        }
      }
    }
    rho = std::move(out);
  }
  return RowState{s.l, std::move(rho)};
}

RowState step_ancilla(const RowState& s, const LocalOperators& ops) {
  check_steppable(s.l);
  const int l = s.l;
  const long dim = 1L << l;     // one row
  const long big = dim * dim;   // both rows; qubits 1..L old, L+1..2L new

  // Columns of B are G |c>_old (x) |vac>_new for each old-row basis state c.
  Mat b = Mat::Zero(big, dim);
  for (long c = 0; c < dim; ++c) b(c * dim, c) = cplx(1.0, 0.0);
  for (int k = l; k >= 1; --k) {
    if (k >= 2) apply_two_qubit_rows(b, ops.u_two_site, k - 1, k, 2 * l);
    apply_two_qubit_rows(b, ops.d, k, l + k, 2 * l);
    apply_two_qubit_rows(b, ops.swap, k, l + k, 2 * l);
  }

  // Trace the old row of B rho B^dag: sum over old-row blocks.
  Mat c = b * s.rho;
  Mat out = Mat::Zero(dim, dim);
  for (long a = 0; a < dim; ++a) {
    out.noalias() +=
        c.middleRows(a * dim, dim) * b.middleRows(a * dim, dim).adjoint();
  }
  return RowState{l, std::move(out)};
}

SiteObservables observables(const RowState& s) {
  check_capacity(s.l);
  const long dim = 1L << s.l;
  SiteObservables obs;
  obs.n.assign(s.l, 0.0);
  obs.sx.assign(s.l, 0.0);
  obs.sy.assign(s.l, 0.0);
  for (long r = 0; r < dim; ++r) {
    const double p = s.rho(r, r).real();
    for (int j = 1; j <= s.l; ++j) {
      if (r & (1L << (s.l - j))) obs.n[j - 1] += p;
    }
  }
  // <sx_j> = 2 Re sum rho(r, r|bit), <sy_j> = 2 Im of the same, with the
  // sigma^y = [[0, i], [-i, 0]] convention.
  for (int j = 1; j <= s.l; ++j) {
    const long bit = 1L << (s.l - j);
    cplx off(0.0, 0.0);
    for (long r = 0; r < dim; ++r) {
      if (r & bit) continue;
      off += s.rho(r, r | bit);
    }
    obs.sx[j - 1] = 2.0 * off.real();
    obs.sy[j - 1] = 2.0 * off.imag();
  }
  for (int j = 0; j < s.l; ++j) {
    obs.n_mean += obs.n[j];
    obs.sx_mean += obs.sx[j];
    obs.sy_mean += obs.sy[j];
  }
  obs.n_mean /= s.l;
  obs.sx_mean /= s.l;
  obs.sy_mean /= s.l;
  return obs;
}

TimeSeries evolve(const RowState& initial, const LocalOperators& ops,
                  const EvolveOptions& opt) {
  if (opt.steps < 0) throw validation_error("steps must be non-negative");
  if (opt.backend != "kraus" && opt.backend != "ancilla") {
    throw validation_error("unknown dense backend: " + opt.backend);
  }
  RowState s = initial;
  TimeSeries ts;
  auto record = [&](int t) {
    const SiteObservables obs = observables(s);
    ts.t.push_back(t);
    ts.n_mean.push_back(obs.n_mean);
    if (opt.record_sites) ts.n_site.push_back(obs.n);
    if (opt.record_transverse) {
      ts.sx_mean.push_back(obs.sx_mean);
      ts.sy_mean.push_back(obs.sy_mean);
    }
  };
  record(0);
  for (int t = 1; t <= opt.steps; ++t) {
    s = opt.backend == "kraus" ? step_kraus(s, ops) : step_ancilla(s, ops);
    record(t);
  }
  return ts;
}

}  // namespace qca::dense
