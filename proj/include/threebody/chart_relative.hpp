#pragma once

#include "threebody/core.hpp"

namespace threebody {

struct BodyState {
  Config3 q = Config3::Zero();
  Config3 p = Config3::Zero();
};

struct RelState {
  Config3 Q = Config3::Zero();
  CoConfig3 P = CoConfig3::Zero();
};

RelState reduce_translations(const BodyState& s, const Masses& M);
BodyState restore_bodies(const RelState& s, const Masses& M);

double h_rel(const RelState& s, const Masses& M);
RelState rhs_rel(const RelState& s, const Masses& M);

// angular momentum mu = -Im <P,Q>
inline double angular_momentum(const RelState& s) { return -pairing(s.P, s.Q).imag(); }

enum class BasisKind { heliocentric, jacobi, equilateral };

struct ChartBasis {
  Config3 e1, e2;
  Eigen::Matrix2cd gram;
  double det_g = 0;
};

ChartBasis make_basis(BasisKind kind, const Masses& M);
ChartBasis make_basis(const Config3& e1, const Config3& e2, const Masses& M);

inline Config3 embed(const Pair2& xi, const ChartBasis& b) { return xi(0) * b.e1 + xi(1) * b.e2; }
// coordinates of X in the basis (least squares; exact for X in W)
Pair2 chart_coords(const Config3& X, const ChartBasis& b);
// eta_i = conj <P, e_i>
Pair2 chart_momentum(const CoConfig3& P, const ChartBasis& b);
// P with <P,e_i> = conj(eta_i) in the m3 P12 + m2 P31 + m1 P23 = 0 slice
CoConfig3 lift_momentum(const Pair2& eta, const ChartBasis& b, const Masses& M);

struct ChartState {
  Pair2 xi = Pair2::Zero();
  Pair2 eta = Pair2::Zero();
};

double h_chart(const ChartState& s, const ChartBasis& b, const Masses& M);
ChartState rhs_chart(const ChartState& s, const ChartBasis& b, const Masses& M);

}  // namespace threebody
