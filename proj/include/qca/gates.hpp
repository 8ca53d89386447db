#pragma once
// Local operator family of the automaton, parametrized by two probabilities:
//   p1 -- branching probability of the two-site constrained rotation
//   p2 -- decay probability of the single-site amplitude-damping channel
// Derived angles: theta = arcsin(sqrt(p2)), omega_dt = arcsin(sqrt(p1))/sqrt(2).
//
// Basis conventions (fixed project-wide):
//   |empty> -> index 0, |occupied> -> index 1, leftmost tensor factor = MSB.
//   sigma_minus = |empty><occupied|; sigma_y = [[0, i], [-i, 0]].

#include <utility>

#include "qca/common.hpp"

namespace qca {

struct GateParams {
  double p1 = 0.0;
  double p2 = 0.0;
  double theta = 0.0;     // arcsin(sqrt(p2))
  double omega_dt = 0.0;  // arcsin(sqrt(p1))/sqrt(2)
};

// Validates the probabilities and derives the angles.
GateParams make_gate_params(double p1, double p2);

// exp(-i*omega_dt*(sigma_y (x) n + n (x) sigma_y)) on (site k-1, site k).
// Closed form (analytic eigenbasis {|00>, (|01>-|10>)/sqrt2, (|01>+|10>)/sqrt2, |11>}),
// so the empty pair is fixed exactly.
Mat4 two_site_unitary(const GateParams& params);

// exp(+i*theta*(sigma_+ (x) sigma_- + sigma_- (x) sigma_+)) on (control, target).
Mat4 d_gate(const GateParams& params);

// Two-site swap.
Mat4 swap_gate();

// Single-site decay channel Kraus pair:
//   K_empty = I + (cos theta - 1) n,   K_filled = i sin(theta) sigma_minus.
std::pair<Mat2, Mat2> kraus_pair(const GateParams& params);

// Vectorized single-site channel, index v = 2a+b for rho[a,b]:
//   K_empty (x) conj(K_empty) + K_filled (x) conj(K_filled).
Mat4 dissipation_superop(const GateParams& params);

// Three-site gate G = (I (x) SWAP) (I (x) D) (U (x) I)
// acting on (control k-1) (x) (control k) (x) (target k).
Mat8 local_gate(const GateParams& params);

// Two-site unitary lifted to the vectorized space: for per-site index v = 2a+b,
// W[(v1 v2), (v1' v2')] = U[(a1 a2), (a1' a2')] * conj(U[(b1 b2), (b1' b2')]).
Mat16 doubled_two_site_unitary(const GateParams& params);

// One-stop cache of every operator derived from a parameter point. Immutable
// after construction; safe to share across worker threads.
struct LocalOperators {
  GateParams params;
  Mat4 u_two_site;
  Mat4 d;
  Mat4 swap;
  Mat2 kraus_empty;
  Mat2 kraus_filled;
  Mat4 site_superop;
  Mat8 gate;
  Mat16 doubled_u;
};

LocalOperators build_local_operators(const GateParams& params);

}  // namespace qca
