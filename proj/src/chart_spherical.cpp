#include "threebody/chart_spherical.hpp"

namespace threebody {

SphState to_spherical(const RelState& s, const Masses& M) {
  const double q2 = mass_norm_sq(s.Q, M);
  if (q2 == 0) throw invalid_state("to_spherical: triple collision Q = 0");
  const double q = std::sqrt(q2);
  const double rp = pairing(s.P, s.Q).real();
  SphState o;
  o.r = q;
  o.X = s.Q;
  o.p_r = rp / q;
  o.Y = s.P - (rp / q2) * dual_vector(s.Q, M);
  return o;
}

RelState from_spherical(const SphState& s, const Masses& M) {
  const double x = std::sqrt(mass_norm_sq(s.X, M));
  if (x == 0) throw invalid_state("from_spherical: X = 0");
  const double c = pairing(s.Y, s.X).real();
  if (std::abs(c) > 1e-10 * std::max(1.0, x * s.Y.norm()))
    throw invalid_state("from_spherical: Re<Y,X> != 0");
  RelState o;
  o.Q = (s.r / x) * s.X;
  o.P = (s.p_r / x) * dual_vector(s.X, M) + (x / s.r) * s.Y;
  return o;
}

double checked_shape_potential(const Config3& X, const Masses& M) {
  for (int k = 0; k < 3; ++k)
    if (X(k) == 0.0) throw collision_singularity("binary-collision shape");
  return shape_potential(X, M);
}

Config3 shape_potential_grad(const Config3& X, const Masses& M) {
  const double x = std::sqrt(mass_norm_sq(X, M));
  const double U = newton_potential(X, M);
  const Eigen::Vector3d w = M.pair();
  Config3 g = (U / x) * dual_vector(X, M);
  for (int k = 0; k < 3; ++k) {
    const double r = std::abs(X(k));
    g(k) -= x * w(k) * X(k) / (r * r * r);
  }
  return g;
}

double h_sph(const SphState& s, const Masses& M) {
  const double V = checked_shape_potential(s.X, M);
  return 0.5 * s.p_r * s.p_r + mass_norm_sq(s.X, M) * kinetic(s.Y, M) / (s.r * s.r) - V / s.r;
}

SphState rhs_sph(const SphState& s, const Masses& M) {
  const double V = checked_shape_potential(s.X, M);
  const double x2 = mass_norm_sq(s.X, M);
  const double K = kinetic(s.Y, M);
  const double r = s.r;
  SphState d;
  d.r = s.p_r;
  d.p_r = 2 * x2 * K / (r * r * r) - V / (r * r);
  d.X = (x2 / (r * r)) * apply_kinetic(s.Y, M);
  d.Y = shape_potential_grad(s.X, M) / r - (2 * K / (r * r)) * dual_vector(s.X, M);
  return d;
}

Eigen::VectorXd pack(const SphState& s) {
  Eigen::VectorXd v(14);
  v(0) = s.r;
  v(1) = s.p_r;
  put_complex<3>(v, 2, s.X);
  put_complex<3>(v, 8, s.Y);
  return v;
}

SphState unpack_sph(const Eigen::VectorXd& v) {
  SphState s;
  s.r = v(0);
  s.p_r = v(1);
  s.X = get_complex<3>(v, 2);
  s.Y = get_complex<3>(v, 8);
  return s;
}

void normalize_gauge(SphState& s, const Masses& M) {
  const double x = std::sqrt(mass_norm_sq(s.X, M));
  s.X /= x;
  s.Y *= x;
}

}  // namespace threebody
