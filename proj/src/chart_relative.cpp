#include "threebody/chart_relative.hpp"

namespace threebody {

RelState reduce_translations(const BodyState& s, const Masses& M) {
  const cd ptot = s.p.sum();
  if (std::abs(ptot) > 1e-10 * std::max(1.0, s.p.norm()))
    throw invalid_state("reduce_translations: total momentum must vanish");
  RelState r;
  r.Q << s.q(0) - s.q(1), s.q(2) - s.q(0), s.q(1) - s.q(2);
  r.P << (M.m2 * s.p(0) - M.m1 * s.p(1)) / M.m, (M.m1 * s.p(2) - M.m3 * s.p(0)) / M.m,
      (M.m3 * s.p(1) - M.m2 * s.p(2)) / M.m;
  return r;
}

BodyState restore_bodies(const RelState& s, const Masses& M) {
  if (w_residual(s.Q) > 1e-10) throw invalid_state("restore_bodies: Q not in W");
  BodyState b;
  const Config3& Q = s.Q;
  b.q << (M.m2 * Q(0) - M.m3 * Q(1)) / M.m, (M.m3 * Q(2) - M.m1 * Q(0)) / M.m,
      (M.m1 * Q(1) - M.m2 * Q(2)) / M.m;
  const CoConfig3& P = s.P;
  b.p << P(0) - P(1), P(2) - P(0), P(1) - P(2);
  return b;
}

static void check_distinct(const Config3& Q) {
  for (int k = 0; k < 3; ++k)
    if (Q(k) == 0.0) throw collision_singularity("binary collision in an unregularized chart");
}

double h_rel(const RelState& s, const Masses& M) {
  check_distinct(s.Q);
  return kinetic(s.P, M) - newton_potential(s.Q, M);
}

RelState rhs_rel(const RelState& s, const Masses& M) {
  check_distinct(s.Q);
  RelState d;
  d.Q = apply_kinetic(s.P, M);
  const Eigen::Vector3d w = M.pair();
  for (int k = 0; k < 3; ++k) {
    const double r = std::abs(s.Q(k));
    d.P(k) = -w(k) * s.Q(k) / (r * r * r);
  }
  return d;
}

ChartBasis make_basis(const Config3& e1, const Config3& e2, const Masses& M) {
  if (w_residual(e1) > 1e-10 || w_residual(e2) > 1e-10)
    throw invalid_state("make_basis: basis vectors must lie in W");
  ChartBasis b;
  b.e1 = e1;
  b.e2 = e2;
  b.gram(0, 0) = mass_inner(e1, e1, M);
  b.gram(0, 1) = mass_inner(e1, e2, M);
  b.gram(1, 0) = mass_inner(e2, e1, M);
  b.gram(1, 1) = mass_inner(e2, e2, M);
  b.det_g = b.gram.determinant().real();
  if (!(b.det_g > 1e-14)) throw invalid_state("make_basis: dependent basis");
  return b;
}

ChartBasis make_basis(BasisKind kind, const Masses& M) {
  switch (kind) {
    case BasisKind::heliocentric:
      return make_basis(Config3(-1, 0, 1), Config3(0, 1, -1), M);
    case BasisKind::jacobi: {
      const double n1 = M.m1 / (M.m1 + M.m2), n2 = M.m2 / (M.m1 + M.m2);
      return make_basis(Config3(-1, n2, n1), Config3(0, 1, -1), M);
    }
    case BasisKind::equilateral: {
      const cd w = omega, wb = std::conj(omega);
      return make_basis(Config3(1, w, wb), Config3(-1, -wb, -w), M);
    }
  }
  throw std::logic_error("make_basis");
}

Pair2 chart_coords(const Config3& X, const ChartBasis& b) {
  Eigen::Matrix<cd, 3, 2> E;
  E.col(0) = b.e1;
  E.col(1) = b.e2;
  return E.colPivHouseholderQr().solve(X);
}

Pair2 chart_momentum(const CoConfig3& P, const ChartBasis& b) {
  return Pair2(std::conj(pairing(P, b.e1)), std::conj(pairing(P, b.e2)));
}

CoConfig3 lift_momentum(const Pair2& eta, const ChartBasis& b, const Masses& M) {
  Eigen::Matrix3cd A;
  A.row(0) = b.e1.conjugate().transpose();
  A.row(1) = b.e2.conjugate().transpose();
  A.row(2) << M.m3, M.m2, M.m1;
  return A.partialPivLu().solve(Config3(eta(0), eta(1), 0.0));
}

double h_chart(const ChartState& s, const ChartBasis& b, const Masses& M) {
  const Config3 X = embed(s.xi, b);
  check_distinct(X);
  const cd k = s.eta.dot(b.gram.inverse() * s.eta);
  return 0.5 * k.real() - newton_potential(X, M);
}

ChartState rhs_chart(const ChartState& s, const ChartBasis& b, const Masses& M) {
  const Config3 X = embed(s.xi, b);
  check_distinct(X);
  ChartState d;
  d.xi = b.gram.inverse() * s.eta;
  // eta' = grad U = -sum m_i m_j conj(dX_ij/dxi) X_ij / rho^3
  const Eigen::Vector3d w = M.pair();
  d.eta.setZero();
  for (int k = 0; k < 3; ++k) {
    const double r = std::abs(X(k));
    const cd f = -w(k) * X(k) / (r * r * r);
    d.eta(0) += std::conj(b.e1(k)) * f;
    d.eta(1) += std::conj(b.e2(k)) * f;
  }
  return d;
}

}  // namespace threebody
