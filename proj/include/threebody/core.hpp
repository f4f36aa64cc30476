#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace threebody {

using cd = std::complex<double>;

// Component order everywhere: 0 <-> 12, 1 <-> 31, 2 <-> 23.
template <typename S> using Triple = Eigen::Matrix<std::complex<S>, 3, 1>;
template <typename S> using Pair = Eigen::Matrix<std::complex<S>, 2, 1>;
using Config3 = Triple<double>;
using CoConfig3 = Triple<double>;
using Pair2 = Pair<double>;

struct invalid_state : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct collision_singularity : std::domain_error {
  using std::domain_error::domain_error;
};

struct Masses {
  double m1 = 1, m2 = 1, m3 = 1, m = 3;

  Masses() = default;
  Masses(double a, double b, double c) : m1(a), m2(b), m3(c), m(a + b + c) {
    if (!(a > 0 && b > 0 && c > 0) || !std::isfinite(m))
      throw invalid_state("masses must be positive and finite");
  }

  // m_i m_j for the pairs 12, 31, 23
  Eigen::Vector3d pair() const { return {m1 * m2, m3 * m1, m2 * m3}; }
  // mass of the body opposite each pair: N = (m3, m2, m1)
  Eigen::Vector3d opposite() const { return {m3, m2, m1}; }
  double product() const { return m1 * m2 * m3; }
};

inline const cd omega{-0.5, std::sqrt(3.0) / 2.0};

template <typename S>
std::complex<S> pairing(const Triple<S>& P, const Triple<S>& Q) {
  return std::conj(P(0)) * Q(0) + std::conj(P(1)) * Q(1) + std::conj(P(2)) * Q(2);
}

template <typename S>
S mass_norm_sq(const Triple<S>& Q, const Masses& M) {
  const Eigen::Vector3d w = M.pair();
  return (w(0) * std::norm(Q(0)) + w(1) * std::norm(Q(1)) + w(2) * std::norm(Q(2))) / M.m;
}

template <typename S>
S dual_mass_norm_sq(const Triple<S>& P, const Masses& M) {
  const Eigen::Vector3d w = M.pair();
  return M.m * (std::norm(P(0)) / w(0) + std::norm(P(1)) / w(1) + std::norm(P(2)) / w(2));
}

// mass-metric Hermitian product <A,B>, antilinear in A
template <typename S>
std::complex<S> mass_inner(const Triple<S>& A, const Triple<S>& B, const Masses& M) {
  const Eigen::Vector3d w = M.pair();
  std::complex<S> s = w(0) * std::conj(A(0)) * B(0);
  s += w(1) * std::conj(A(1)) * B(1);
  s += w(2) * std::conj(A(2)) * B(2);
  return s / M.m;
}

template <typename S>
Triple<S> dual_vector(const Triple<S>& Q, const Masses& M) {
  const Eigen::Vector3d w = M.pair();
  Triple<S> r;
  for (int k = 0; k < 3; ++k) r(k) = Q(k) * (w(k) / M.m);
  return r;
}

template <typename S>
S kinetic(const Triple<S>& P, const Masses& M) {
  return std::norm(P(0) - P(1)) / (2 * M.m1) + std::norm(P(2) - P(0)) / (2 * M.m2) +
         std::norm(P(1) - P(2)) / (2 * M.m3);
}

// K(P) = 1/2 P^H B P
inline Eigen::Matrix3d kinetic_matrix(const Masses& M) {
  Eigen::Matrix3d B;
  B << 1 / M.m1 + 1 / M.m2, -1 / M.m1, -1 / M.m2,
       -1 / M.m1, 1 / M.m3 + 1 / M.m1, -1 / M.m3,
       -1 / M.m2, -1 / M.m3, 1 / M.m2 + 1 / M.m3;
  return B;
}

template <typename S>
Triple<S> apply_kinetic(const Triple<S>& P, const Masses& M) {
  Triple<S> r;
  r(0) = (P(0) - P(1)) / M.m1 + (P(0) - P(2)) / M.m2;
  r(1) = (P(1) - P(0)) / M.m1 + (P(1) - P(2)) / M.m3;
  r(2) = (P(2) - P(0)) / M.m2 + (P(2) - P(1)) / M.m3;
  return r;
}

template <typename S>
Triple<S> tangent_field(const Triple<S>& X, const Masses& M) {
  Triple<S> T;
  T(0) = std::conj(X(1)) / M.m2 - std::conj(X(2)) / M.m1;
  T(1) = std::conj(X(2)) / M.m1 - std::conj(X(0)) / M.m3;
  T(2) = std::conj(X(0)) / M.m3 - std::conj(X(1)) / M.m2;
  return T;
}

struct Frame {
  Config3 radial, normal, tangent;
};

inline double w_residual(const Config3& Q) {
  const double n = Q.norm();
  return n > 0 ? std::abs(Q.sum()) / n : 0.0;
}

inline Frame qnt_frame(const Config3& Q, const Masses& M) {
  if (Q.norm() == 0) throw invalid_state("qnt_frame: Q = 0");
  if (w_residual(Q) > 1e-10) throw invalid_state("qnt_frame: Q not in W");
  Frame F;
  F.radial = Q;
  F.normal = Config3(M.m3, M.m2, M.m1);
  F.tangent = tangent_field(Q, M);
  return F;
}

template <typename S>
Triple<S> fs_unit(const Triple<S>& X, const Masses& M) {
  return tangent_field(X, M) * std::sqrt(M.product() / M.m);
}

inline Config3 checked_fs_unit(const Config3& X, const Masses& M) {
  if (X.norm() == 0) throw invalid_state("fs_unit: X = 0");
  if (w_residual(X) > 1e-10) throw invalid_state("fs_unit: X not in W");
  return fs_unit(X, M);
}

// The shape one-form evaluated on Z. which = 0 is the symmetric expression,
// 1..3 divide by conj(X23), conj(X31), conj(X12) respectively.
cd alpha_form(const Config3& X, const CoConfig3& Z, const Masses& M, int which = 0);

// sigma one-form X31 dX12 - X12 dX31 and its cyclic variants (which = 0,1,2)
inline cd sigma_form(const Config3& X, const Config3& dX, int which = 0) {
  switch (which) {
    case 0: return X(1) * dX(0) - X(0) * dX(1);
    case 1: return X(2) * dX(1) - X(1) * dX(2);
    default: return X(0) * dX(2) - X(2) * dX(0);
  }
}

// representative of the momentum translation class with m3 P12 + m2 P31 + m1 P23 = 0
template <typename S>
Triple<S> project_translation(const Triple<S>& P, const Masses& M) {
  const std::complex<S> c = (M.m3 * P(0) + M.m2 * P(1) + M.m1 * P(2)) / M.m;
  Triple<S> r = P;
  for (int k = 0; k < 3; ++k) r(k) -= c;
  return r;
}

inline Config3 project_w(const Config3& Q) {
  const cd c = Q.sum() / 3.0;
  return Q - Config3::Constant(c);
}

// U(X) = sum m_i m_j / |X_ij|
template <typename S>
S newton_potential(const Triple<S>& X, const Masses& M) {
  using std::sqrt;
  const Eigen::Vector3d w = M.pair();
  return w(0) / sqrt(std::norm(X(0))) + w(1) / sqrt(std::norm(X(1))) + w(2) / sqrt(std::norm(X(2)));
}

// complex blocks inside real packed state vectors, as (re, im) pairs
template <int N>
void put_complex(Eigen::VectorXd& v, Eigen::Index o, const Eigen::Matrix<cd, N, 1>& a) {
  for (int k = 0; k < N; ++k) {
    v(o + 2 * k) = a(k).real();
    v(o + 2 * k + 1) = a(k).imag();
  }
}

template <int N>
Eigen::Matrix<cd, N, 1> get_complex(const Eigen::VectorXd& v, Eigen::Index o) {
  Eigen::Matrix<cd, N, 1> a;
  for (int k = 0; k < N; ++k) a(k) = cd(v(o + 2 * k), v(o + 2 * k + 1));
  return a;
}

}  // namespace threebody
