#include "qca/gates.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

namespace qca {

GateParams make_gate_params(double p1, double p2) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) {
    throw validation_error("p1 must lie in [0,1], got " + std::to_string(p1));
  }
  if (!(p2 >= 0.0 && p2 <= 1.0)) {
    throw validation_error("p2 must lie in [0,1], got " + std::to_string(p2));
  }
  GateParams g;
  g.p1 = p1;
  g.p2 = p2;
  g.theta = std::asin(std::sqrt(p2));
  g.omega_dt = std::asin(std::sqrt(p1)) / std::sqrt(2.0);
  return g;
}

Mat4 two_site_unitary(const GateParams& params) {
  // Generator blocks: |00> and (|01>-|10>)/sqrt2 are annihilated; the
  // {(|01>+|10>)/sqrt2, |11>} block rotates by angle sqrt(2)*omega_dt.
  const double a = std::sqrt(2.0) * params.omega_dt;
  const double c = std::cos(a);
  const double s = std::sin(a);
  const double r = 1.0 / std::sqrt(2.0);
  Mat4 u = Mat4::Zero();
  u(0, 0) = 1.0;
  u(1, 1) = 0.5 * (c + 1.0);
  u(1, 2) = 0.5 * (c - 1.0);
  u(1, 3) = s * r;
  u(2, 1) = 0.5 * (c - 1.0);
  u(2, 2) = 0.5 * (c + 1.0);
  u(2, 3) = s * r;
  u(3, 1) = -s * r;
  u(3, 2) = -s * r;
  u(3, 3) = c;
  return u;
}

Mat4 d_gate(const GateParams& params) {
  const double c = std::cos(params.theta);
  const cplx is = cplx(0.0, std::sin(params.theta));
  Mat4 d = Mat4::Zero();
  d(0, 0) = 1.0;
  d(3, 3) = 1.0;
  d(1, 1) = c;
  d(2, 2) = c;
  d(1, 2) = is;
  d(2, 1) = is;
  return d;
}

Mat4 swap_gate() {
  Mat4 s = Mat4::Zero();
  s(0, 0) = 1.0;
  s(1, 2) = 1.0;
  s(2, 1) = 1.0;
  s(3, 3) = 1.0;
  return s;
}

std::pair<Mat2, Mat2> kraus_pair(const GateParams& params) {
  Mat2 k0 = Mat2::Identity();
  k0(1, 1) = std::cos(params.theta);
  Mat2 k1 = Mat2::Zero();
  k1(0, 1) = cplx(0.0, std::sin(params.theta));
  return {k0, k1};
}

Mat4 dissipation_superop(const GateParams& params) {
  auto [k0, k1] = kraus_pair(params);
  Mat4 s = Eigen::kroneckerProduct(k0, k0.conjugate()).eval() +
           Eigen::kroneckerProduct(k1, k1.conjugate()).eval();
  return s;
}

Mat8 local_gate(const GateParams& params) {
  const Mat2 id = Mat2::Identity();
  Mat8 left = Eigen::kroneckerProduct(id, (swap_gate() * d_gate(params)).eval()).eval();
  Mat8 right = Eigen::kroneckerProduct(two_site_unitary(params), id).eval();
  return left * right;
}

Mat16 doubled_two_site_unitary(const GateParams& params) {
  const Mat4 u = two_site_unitary(params);
  Mat16 w;
  // per-site vectorized index v = 2a+b; combined row = (2a1+b1)*4 + (2a2+b2)
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
  return w;
}

LocalOperators build_local_operators(const GateParams& params) {
  LocalOperators ops;
  ops.params = params;
  ops.u_two_site = two_site_unitary(params);
  ops.d = d_gate(params);
  ops.swap = swap_gate();
  auto [k0, k1] = kraus_pair(params);
  ops.kraus_empty = k0;
  ops.kraus_filled = k1;
  ops.site_superop = dissipation_superop(params);
  ops.gate = local_gate(params);
  ops.doubled_u = doubled_two_site_unitary(params);
  return ops;
}

}  // namespace qca
