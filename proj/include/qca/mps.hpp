#pragma once

// Truncated evolution of the vectorized density matrix as a matrix-product
// state with physical dimension 4 (row-major vectorization of each site's
// 2x2 operator: component p = 2a + b holds <a|rho_site|b> weights).

#include <array>
#include <string>
#include <vector>

#include "qca/common.hpp"
#include "qca/gates.hpp"
#include "qca/timeseries.hpp"

namespace qca::mps {

// Site tensor stored as four chiL x chiR matrices, one per physical index.
using SiteTensor = std::array<Mat, 4>;

struct VectorizedMps {
  int l = 0;
  std::vector<SiteTensor> tensors;   // index 0 <-> site 1
  int chi_max = 64;
  double cutoff = 1e-12;
  // 0-based index of the canonical center; -1 when the gauge is unknown
  // (after site superoperators, before the next re-canonicalization).
  int ortho_center = -1;

  std::vector<int> bond_dims() const;   // l+1 entries, boundaries included
  int max_bond_dim() const;
};

enum class ProductKind { FullyOccupied, Vacuum, MaximallyMixed };

VectorizedMps mps_from_product(int l, ProductKind kind, int chi_max,
                               double cutoff);

// Move the canonical center to 1-based site k via QR sweeps; from an unknown
// gauge this re-canonicalizes the whole chain.  State is preserved exactly.
void ensure_center(VectorizedMps& m, int k);

// Contract the doubled two-site gate u (x) conj(u) into sites (k, k+1),
// 1-based, split back by SVD with the state's chi_max/cutoff.  Returns the
// discarded weight (dropped singular values squared over total).
double apply_doubled_two_site_gate(VectorizedMps& m, int k, const Mat4& u);
double apply_doubled_two_site_gate_16(VectorizedMps& m, int k,
                                      const Mat16& w);

// Contract a 4x4 single-site superoperator into tensor k (1-based).  Bond
// dimensions unchanged; gauge becomes unknown.
void apply_site_superop(VectorizedMps& m, int k, const Mat4& sop);

// Contraction with the per-site vectorized identity (1,0,0,1).
cplx vectorized_trace(const VectorizedMps& m);

// <<I ... n_k ... I | rho>> / <<I|rho>>; site is 1-based, site = 0 means the
// site average.  Imaginary part beyond 1e-8 or vanishing trace -> numerical
// error.
double mps_expectation(const VectorizedMps& m, int site);

// Same contraction for an arbitrary single-site vectorized observable.
double mps_expectation_vector(const VectorizedMps& m, int site,
                              const Eigen::Vector4cd& w);

struct StepDiagnostics {
  double max_discarded_weight = 0.0;
  double pre_norm_trace = 0.0;
  int max_bond_dim = 1;
};

// One full update: doubled unitaries in the right-to-left staircase order,
// then the dissipation superoperator on every site, then trace renormalized
// to 1.  Leaves the canonical center at site 1.
StepDiagnostics mps_step(VectorizedMps& m, const LocalOperators& ops);

struct MpsEvolveOptions {
  int steps = 100;
  bool record_sites = false;
  bool record_transverse = false;
};

struct MpsEvolveResult {
  TimeSeries series;
  std::vector<StepDiagnostics> diagnostics;   // entry i <-> step i+1
};

MpsEvolveResult mps_evolve(const VectorizedMps& initial,
                           const LocalOperators& ops,
                           const MpsEvolveOptions& opt);

void write_diagnostics_csv(const std::vector<StepDiagnostics>& diag,
                           const std::string& path);

}  // namespace qca::mps
