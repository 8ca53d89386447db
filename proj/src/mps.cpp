#include "qca/mps.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace qca::mps {

namespace {

void check_site(const VectorizedMps& m, int k) {
  if (k < 1 || k > m.l) {
    throw validation_error("site index " + std::to_string(k) +
                           " outside 1.." + std::to_string(m.l));
  }
}

// QR-push the tensor at 0-based site i into left-isometric form, absorbing
// the R factor into site i+1.
void left_normalize(VectorizedMps& m, int i) {
  SiteTensor& a = m.tensors[i];
  const long chi_l = a[0].rows();
  const long chi_r = a[0].cols();
  Mat stacked(4 * chi_l, chi_r);
  for (int p = 0; p < 4; ++p) stacked.middleRows(p * chi_l, chi_l) = a[p];
  const long r = std::min(4 * chi_l, chi_r);
  Eigen::HouseholderQR<Mat> qr(stacked);
  Mat q = qr.householderQ() * Mat::Identity(4 * chi_l, r);
  Mat rr = Mat(qr.matrixQR().topRows(r).triangularView<Eigen::Upper>());
  for (int p = 0; p < 4; ++p) a[p] = q.middleRows(p * chi_l, chi_l);
  SiteTensor& b = m.tensors[i + 1];
  for (int p = 0; p < 4; ++p) b[p] = (rr * b[p]).eval();
}

// Mirror image: site i becomes right-isometric, the remainder moves left.
void right_normalize(VectorizedMps& m, int i) {
  SiteTensor& a = m.tensors[i];
  const long chi_l = a[0].rows();
  const long chi_r = a[0].cols();
  Mat stacked(4 * chi_r, chi_l);
  for (int p = 0; p < 4; ++p) {
    stacked.middleRows(p * chi_r, chi_r) = a[p].adjoint();
  }
  const long r = std::min(4 * chi_r, chi_l);
  Eigen::HouseholderQR<Mat> qr(stacked);
  Mat q = qr.householderQ() * Mat::Identity(4 * chi_r, r);
  Mat rr = Mat(qr.matrixQR().topRows(r).triangularView<Eigen::Upper>());
  for (int p = 0; p < 4; ++p) a[p] = q.middleRows(p * chi_r, chi_r).adjoint();
  Mat push = rr.adjoint();   // chi_l x r
  SiteTensor& b = m.tensors[i - 1];
  for (int p = 0; p < 4; ++p) b[p] = (b[p] * push).eval();
}

Mat transfer(const SiteTensor& a) { return a[0] + a[3]; }

}  // namespace

std::vector<int> VectorizedMps::bond_dims() const {
  std::vector<int> dims;
  dims.reserve(l + 1);
  dims.push_back(1);
  for (const SiteTensor& a : tensors) {
    dims.push_back(static_cast<int>(a[0].cols()));
  }
  return dims;
}

int VectorizedMps::max_bond_dim() const {
  int best = 1;
  for (int d : bond_dims()) best = std::max(best, d);
  return best;
}

VectorizedMps mps_from_product(int l, ProductKind kind, int chi_max,
                               double cutoff) {
  if (l < 2) throw validation_error("matrix-product backend needs l >= 2");
  if (chi_max < 1) throw validation_error("chi_max must be at least 1");
  if (!(cutoff >= 0.0)) throw validation_error("cutoff must be non-negative");
  Eigen::Vector4cd site;
  switch (kind) {
    case ProductKind::FullyOccupied:
      site << 0, 0, 0, 1;
      break;
    case ProductKind::Vacuum:
      site << 1, 0, 0, 0;
      break;
    case ProductKind::MaximallyMixed:
      site << 0.5, 0, 0, 0.5;
      break;
  }
  VectorizedMps m;
  m.l = l;
  m.chi_max = chi_max;
  m.cutoff = cutoff;
  m.tensors.resize(l);
  for (SiteTensor& a : m.tensors) {
    for (int p = 0; p < 4; ++p) {
      a[p] = Mat::Constant(1, 1, site(p));
    }
  }
  // pure product tensors are right-isometric as-is; the mixed vector has
  // norm 1/sqrt(2) per site, so leave its gauge unknown and let the first
  // sweep canonicalize
  m.ortho_center = kind == ProductKind::MaximallyMixed ? -1 : 0;
  return m;
}

void ensure_center(VectorizedMps& m, int k) {
  check_site(m, k);
  const int target = k - 1;
  if (m.ortho_center < 0) {
    for (int i = 0; i < target; ++i) left_normalize(m, i);
    for (int i = m.l - 1; i > target; --i) right_normalize(m, i);
    m.ortho_center = target;
    return;
  }
  while (m.ortho_center < target) {
    left_normalize(m, m.ortho_center);
    ++m.ortho_center;
  }
  while (m.ortho_center > target) {
    right_normalize(m, m.ortho_center);
    --m.ortho_center;
  }
}

double apply_doubled_two_site_gate_16(VectorizedMps& m, int k,
                                      const Mat16& w) {
  if (k < 1 || k >= m.l) {
    throw validation_error("bond index " + std::to_string(k) +
                           " outside 1.." + std::to_string(m.l - 1));
  }
  const int i = k - 1;
  const int j = k;
  if (m.ortho_center < i || m.ortho_center > j) {
    ensure_center(m, m.ortho_center >= 0 && m.ortho_center > j ? k + 1 : k);
  }
  const SiteTensor& a = m.tensors[i];
  const SiteTensor& b = m.tensors[j];
  const long chi_l = a[0].rows();
  const long chi_r = b[0].cols();

  Mat pair[4][4];
  for (int pp = 0; pp < 4; ++pp) {
    for (int qq = 0; qq < 4; ++qq) pair[pp][qq] = a[pp] * b[qq];
  }
  Mat theta(4 * chi_l, 4 * chi_r);
  for (int p = 0; p < 4; ++p) {
    for (int q = 0; q < 4; ++q) {
      Mat acc = Mat::Zero(chi_l, chi_r);
      for (int pp = 0; pp < 4; ++pp) {
        for (int qq = 0; qq < 4; ++qq) {
          const cplx c = w(p * 4 + q, pp * 4 + qq);
          if (c != cplx(0.0, 0.0)) acc.noalias() += c * pair[pp][qq];
        }
      }
      theta.block(p * chi_l, q * chi_r, chi_l, chi_r) = acc;
    }
  }

  Eigen::BDCSVD<Mat> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw numerical_error("SVD failed at bond " + std::to_string(k));
  }
  const Eigen::VectorXd& sig = svd.singularValues();
  const double total = sig.squaredNorm();
  long keep = 0;
  if (total > 0.0) {
    const double floor_val = m.cutoff * sig(0);
    while (keep < sig.size() && keep < m.chi_max && sig(keep) >= floor_val) {
      ++keep;
    }
  }
  if (keep < 1) keep = 1;
  double kept_weight = 0.0;
  for (long s = 0; s < keep; ++s) kept_weight += sig(s) * sig(s);
  const double discarded = total > 0.0 ? (total - kept_weight) / total : 0.0;

  Mat u = svd.matrixU().leftCols(keep);
  Mat v = svd.matrixV().leftCols(keep);
  // Gauge: rotate each singular pair so the largest entry of the left vector
  // is real-positive; keeps reruns bit-stable.
  for (long col = 0; col < keep; ++col) {
    long imax = 0;
    u.col(col).cwiseAbs().maxCoeff(&imax);
    const cplx z = u(imax, col);
    if (std::abs(z) > 0.0) {
      const cplx phase = std::conj(z) / std::abs(z);
      u.col(col) *= phase;
      v.col(col) *= phase;
    }
  }

  SiteTensor& na = m.tensors[i];
  SiteTensor& nb = m.tensors[j];
  const Eigen::VectorXd s_kept = sig.head(keep);
  for (int p = 0; p < 4; ++p) {
    na[p] = u.middleRows(p * chi_l, chi_l) * s_kept.asDiagonal();
  }
  for (int q = 0; q < 4; ++q) {
    nb[q] = v.middleRows(q * chi_r, chi_r).adjoint();
  }
  m.ortho_center = i;
  return discarded;
}

double apply_doubled_two_site_gate(VectorizedMps& m, int k, const Mat4& u) {
  Mat16 w;
  for (int a1 = 0; a1 < 2; ++a1)
    for (int b1 = 0; b1 < 2; ++b1)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b2 = 0; b2 < 2; ++b2) {
          const int row = (2 * a1 + b1) * 4 + (2 * a2 + b2);
          for (int a3 = 0; a3 < 2; ++a3)
            for (int b3 = 0; b3 < 2; ++b3)
              for (int a4 = 0; a4 < 2; ++a4)
                for (int b4 = 0; b4 < 2; ++b4) {
                  const int col = (2 * a3 + b3) * 4 + (2 * a4 + b4);
                  w(row, col) = u(2 * a1 + a2, 2 * a3 + a4) *
                                std::conj(u(2 * b1 + b2, 2 * b3 + b4));
                }
        }
  return apply_doubled_two_site_gate_16(m, k, w);
}

void apply_site_superop(VectorizedMps& m, int k, const Mat4& sop) {
  check_site(m, k);
  SiteTensor& a = m.tensors[k - 1];
  SiteTensor next;
  for (int p = 0; p < 4; ++p) {
    next[p] = Mat::Zero(a[0].rows(), a[0].cols());
    for (int q = 0; q < 4; ++q) {
      const cplx c = sop(p, q);
      if (c != cplx(0.0, 0.0)) next[p].noalias() += c * a[q];
    }
  }
  a = std::move(next);
  if (m.ortho_center != k - 1) m.ortho_center = -1;
}

cplx vectorized_trace(const VectorizedMps& m) {
  Mat v = Mat::Ones(1, 1);
  for (const SiteTensor& a : m.tensors) v = (v * transfer(a)).eval();
  return v(0, 0);
}

double mps_expectation_vector(const VectorizedMps& m, int site,
                              const Eigen::Vector4cd& w) {
  if (site < 0 || site > m.l) {
    throw validation_error("site index " + std::to_string(site) +
                           " outside 0.." + std::to_string(m.l));
  }
  // left partials over the plain transfer matrices
  std::vector<Mat> left(m.l + 1);
  left[0] = Mat::Ones(1, 1);
  for (int i = 0; i < m.l; ++i) {
    left[i + 1] = (left[i] * transfer(m.tensors[i])).eval();
  }
  const cplx den = left[m.l](0, 0);
  if (std::abs(den) < 1e-14) {
    throw numerical_error("vectorized trace vanished; state degenerate");
  }
  std::vector<Mat> right(m.l + 1);
  right[m.l] = Mat::Ones(1, 1);
  for (int i = m.l - 1; i >= 0; --i) {
    right[i] = (transfer(m.tensors[i]) * right[i + 1]).eval();
  }
  auto site_value = [&](int k0) {
    const SiteTensor& a = m.tensors[k0];
    Mat op = Mat::Zero(a[0].rows(), a[0].cols());
    for (int p = 0; p < 4; ++p) {
      if (w(p) != cplx(0.0, 0.0)) op.noalias() += w(p) * a[p];
    }
    return (left[k0] * op * right[k0 + 1])(0, 0) / den;
  };
  cplx value(0.0, 0.0);
  if (site >= 1) {
    value = site_value(site - 1);
  } else {
    for (int k0 = 0; k0 < m.l; ++k0) value += site_value(k0);
    value /= static_cast<double>(m.l);
  }
  if (std::abs(value.imag()) >= 1e-8) {
    throw numerical_error("expectation value has imaginary part " +
                          std::to_string(value.imag()));
  }
  return value.real();
}

double mps_expectation(const VectorizedMps& m, int site) {
  Eigen::Vector4cd n_vec;
  n_vec << 0, 0, 0, 1;
  return mps_expectation_vector(m, site, n_vec);
}

StepDiagnostics mps_step(VectorizedMps& m, const LocalOperators& ops) {
  StepDiagnostics diag;
  ensure_center(m, m.l);
  for (int k = m.l - 1; k >= 1; --k) {
    const double d = apply_doubled_two_site_gate_16(m, k, ops.doubled_u);
    diag.max_discarded_weight = std::max(diag.max_discarded_weight, d);
  }
  for (int k = 1; k <= m.l; ++k) {
    apply_site_superop(m, k, ops.site_superop);
  }
  const cplx tr = vectorized_trace(m);
  diag.pre_norm_trace = tr.real();
  if (std::abs(tr) < 1e-300) {
    throw numerical_error("vectorized trace collapsed to zero during a step");
  }
  ensure_center(m, 1);
  const double scale = 1.0 / tr.real();
  for (int p = 0; p < 4; ++p) m.tensors[0][p] *= scale;
  diag.max_bond_dim = m.max_bond_dim();
  return diag;
}

MpsEvolveResult mps_evolve(const VectorizedMps& initial,
                           const LocalOperators& ops,
                           const MpsEvolveOptions& opt) {
  if (opt.steps < 0) throw validation_error("steps must be non-negative");
  VectorizedMps m = initial;
  MpsEvolveResult out;
  Eigen::Vector4cd sx_vec, sy_vec;
  sx_vec << 0, 1, 1, 0;
  sy_vec << 0, cplx(0, -1), cplx(0, 1), 0;
  auto record = [&](int t) {
    out.series.t.push_back(t);
    out.series.n_mean.push_back(mps_expectation(m, 0));
    if (opt.record_sites) {
      std::vector<double> row(m.l);
      for (int k = 1; k <= m.l; ++k) row[k - 1] = mps_expectation(m, k);
      out.series.n_site.push_back(std::move(row));
    }
    if (opt.record_transverse) {
      out.series.sx_mean.push_back(mps_expectation_vector(m, 0, sx_vec));
      out.series.sy_mean.push_back(mps_expectation_vector(m, 0, sy_vec));
    }
  };
  record(0);
  for (int t = 1; t <= opt.steps; ++t) {
    out.diagnostics.push_back(mps_step(m, ops));
    record(t);
  }
  return out;
}

void write_diagnostics_csv(const std::vector<StepDiagnostics>& diag,
                           const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << "t,max_discarded_weight,pre_norm_trace,max_bond_dim\n";
  for (std::size_t i = 0; i < diag.size(); ++i) {
    f << (i + 1) << ',' << format_double(diag[i].max_discarded_weight) << ','
      << format_double(diag[i].pre_norm_trace) << ',' << diag[i].max_bond_dim
      << "\n";
  }
  if (!f.good()) throw io_error("write failed: " + path);
}

}  // namespace qca::mps
