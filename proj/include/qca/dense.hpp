#pragma once

// Exact density-matrix evolution of a single row of L sites.  Feasible up to
// L = 7 (rho is 2^L x 2^L complex); larger rows must use the matrix-product
// backend instead.

#include <string>
#include <vector>

#include "qca/common.hpp"
#include "qca/gates.hpp"
#include "qca/timeseries.hpp"

namespace qca::dense {

enum class StateKind { FullyOccupied, Vacuum };

// Single-site Bloch triple with bz = +1 meaning occupied: n = (1 + bz)/2,
// sx = <sigma^x>, sy = <sigma^y> (sigma^y = [[0, i], [-i, 0]]).
struct Bloch {
  double sx = 0.0;
  double sy = 0.0;
  double bz = 0.0;
};

struct RowState {
  int l = 0;   // number of sites
  Mat rho;     // 2^l x 2^l density matrix, site 1 = most significant bit
};

struct SiteObservables {
  std::vector<double> n;    // per-site occupation, index 0 <-> site 1
  std::vector<double> sx;
  std::vector<double> sy;
  double n_mean = 0.0;
  double sx_mean = 0.0;
  double sy_mean = 0.0;
};

RowState initial_state(int l, StateKind kind);

// Product state from per-site Bloch triples; rejects purity > 1.
RowState initial_state_product(const std::vector<Bloch>& sites);

// One update of the row.  The two backends implement the same quantum
// channel and must agree entrywise to 1e-12.
//
// step_kraus applies U = U_{1,2} U_{2,3} ... U_{L-1,L} (rightmost factor
// acts first) and then the single-site Kraus pair site by site.
RowState step_kraus(const RowState& s, const LocalOperators& ops);

// step_ancilla realizes the two-row picture directly: rho (x) |vac><vac| on
// 2L qubits, the staircase G_k = SWAP_k D_k U_{k-1,k} applied k = L..1, then
// the old row traced out.  Computed through the rectangular embedding
// B = G (I (x) |vac>), which is the same arithmetic without ever holding the
// 4^L x 4^L two-row matrix.
RowState step_ancilla(const RowState& s, const LocalOperators& ops);

SiteObservables observables(const RowState& s);

struct EvolveOptions {
  int steps = 100;
  bool record_sites = false;
  bool record_transverse = false;
  std::string backend = "kraus";   // "kraus" | "ancilla"
};

// Record observables at t = 0..steps; row t+1 = step(row t).
TimeSeries evolve(const RowState& initial, const LocalOperators& ops,
                  const EvolveOptions& opt);

// Apply a two-qubit operator g to qubit positions (a, b) of the row index
// space of m (n qubits, qubit 1 = MSB, a < b): m <- g_{a,b} m.  Exposed for
// reuse by the continuous-time integrator and for oracle construction in
// tests.
void apply_two_qubit_rows(Mat& m, const Mat4& g, int a, int b, int n);

// Dense 2^n x 2^n matrix of g acting on qubit positions (a, b); test oracle
// and small-system convenience.
Mat embed_two_qubit(const Mat4& g, int a, int b, int n);

}  // namespace qca::dense
