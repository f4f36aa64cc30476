#pragma once

#include "threebody/chart_relative.hpp"

namespace threebody {

struct SphState {
  double r = 1, p_r = 0;
  Config3 X = Config3::Zero();
  CoConfig3 Y = CoConfig3::Zero();
};

SphState to_spherical(const RelState& s, const Masses& M);
RelState from_spherical(const SphState& s, const Masses& M);

// V(X) = |X| U(X)
template <typename S>
S shape_potential(const Triple<S>& X, const Masses& M) {
  using std::sqrt;
  return sqrt(mass_norm_sq(X, M)) * newton_potential(X, M);
}

double checked_shape_potential(const Config3& X, const Masses& M);
// real gradient of V, packed as a complex triple
Config3 shape_potential_grad(const Config3& X, const Masses& M);

double h_sph(const SphState& s, const Masses& M);
SphState rhs_sph(const SphState& s, const Masses& M);

// (r, p_r, X, Y) as 14 reals
Eigen::VectorXd pack(const SphState& s);
SphState unpack_sph(const Eigen::VectorXd& v);

// (X, Y) -> (X/|X|, |X| Y)
void normalize_gauge(SphState& s, const Masses& M);

}  // namespace threebody
