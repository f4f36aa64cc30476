#pragma once

#include <array>
#include <utility>
#include <vector>

#include "threebody/autodiff.hpp"
#include "threebody/chart_reduced.hpp"

namespace threebody {

// ---- squaring map and cone

template <typename S>
Triple<S> lc_project(const Triple<S>& z) {
  return z.cwiseProduct(z);
}

inline double cone_residual(const Config3& z) {
  const double n = z.squaredNorm();
  return n > 0 ? std::abs(z.cwiseProduct(z).sum()) / n : 0.0;
}

// principal square roots with sign bits (bit k flips component k)
Config3 lc_lift(const Config3& X, unsigned signs);
// projective preimages of the shape [X] under the squaring map
std::vector<Config3> lemaitre_preimages(const Config3& X);
bool projectively_equal(const Config3& a, const Config3& b, double tol = 1e-10);

// ---- scale-free quantities written in terms of the squared moduli rho_ij

template <typename S> using Vec3 = Eigen::Matrix<S, 3, 1>;

template <typename S>
Vec3<S> rho_of(const Triple<S>& z) {
  return Vec3<S>(std::norm(z(0)), std::norm(z(1)), std::norm(z(2)));
}

// |X|^2 of the shape whose mutual distances are rho_ij
template <typename S>
S rho_x2(const Vec3<S>& rho, const Masses& M) {
  const Eigen::Vector3d w = M.pair();
  return (w(0) * rho(0) * rho(0) + w(1) * rho(1) * rho(1) + w(2) * rho(2) * rho(2)) / M.m;
}

template <typename S>
S rho_tau(const Vec3<S>& rho) {
  const S s = rho(0) + rho(1) + rho(2);
  return rho(0) * rho(1) * rho(2) / (s * s * s);
}

// W = tau V
template <typename S>
S rho_W(const Vec3<S>& rho, const Masses& M) {
  using std::sqrt;
  const Eigen::Vector3d w = M.pair();
  const S s = rho(0) + rho(1) + rho(2);
  const S num = w(0) * rho(1) * rho(2) + w(1) * rho(0) * rho(2) + w(2) * rho(0) * rho(1);
  return sqrt(rho_x2(rho, M)) * num / (s * s * s);
}

template <typename S>
S rho_lambda(const Vec3<S>& rho, const Masses& M) {
  const S q = rho_x2(rho, M) * M.m;
  return 4 * M.m * M.product() * (rho(0) + rho(1) + rho(2)) * rho(0) * rho(1) * rho(2) / (q * q);
}

template <typename S>
S rho_tau_over_lambda(const Vec3<S>& rho, const Masses& M) {
  const S x2 = rho_x2(rho, M);
  const S s = rho(0) + rho(1) + rho(2);
  return M.m * x2 * x2 / (4 * M.product() * s * s * s * s);
}

double tau(const Config3& z);
double reg_potential(const Config3& z, const Masses& M);
double lambda_conformal(const Config3& z, const Masses& M);

// ---- cone chart (z, eta)

struct ConeState {
  double r = 1, p_r = 0;
  Config3 z = Config3(0, 1, cd(0, 1));
  CoConfig3 eta = CoConfig3::Zero();
  double mu = 0, h = 0;
};

template <typename S>
Triple<S> pi_terms(const Triple<S>& z, const Triple<S>& eta) {
  Triple<S> p;
  p(0) = eta(0) * std::conj(z(1)) - eta(1) * std::conj(z(0));
  p(1) = eta(2) * std::conj(z(0)) - eta(0) * std::conj(z(2));
  p(2) = eta(1) * std::conj(z(2)) - eta(2) * std::conj(z(1));
  return p;
}

// tau |X|^2 K(Y) with Y = eta / (2 conj z)
template <typename S>
S cone_kinetic(const Triple<S>& z, const Triple<S>& eta, const Masses& M) {
  const Vec3<S> rho = rho_of(z);
  const Triple<S> p = pi_terms(z, eta);
  const S s = rho(0) + rho(1) + rho(2);
  const S k = std::norm(p(0)) * rho(2) / (8 * M.m1) + std::norm(p(1)) * rho(1) / (8 * M.m2) +
              std::norm(p(2)) * rho(0) / (8 * M.m3);
  return rho_x2(rho, M) * k / (s * s * s);
}

template <typename S>
S cone_kinetic_fs(const Triple<S>& z, const Triple<S>& eta, const Masses& M) {
  const Vec3<S> rho = rho_of(z);
  const S s = rho(0) + rho(1) + rho(2);
  Triple<S> zc = z.conjugate();
  Triple<S> c;
  c(0) = z(1) * zc(2) - z(2) * zc(1);
  c(1) = z(2) * zc(0) - z(0) * zc(2);
  c(2) = z(0) * zc(1) - z(1) * zc(0);
  return rho_tau_over_lambda(rho, M) * std::norm(pairing(eta, c)) / (2 * s);
}

template <typename S>
Triple<S> unpack_triple(const Eigen::Matrix<S, Eigen::Dynamic, 1>& v, int o) {
  return Triple<S>(std::complex<S>(v(o), v(o + 1)), std::complex<S>(v(o + 2), v(o + 3)),
                   std::complex<S>(v(o + 4), v(o + 5)));
}

template <typename S>
Pair<S> unpack_pair(const Eigen::Matrix<S, Eigen::Dynamic, 1>& v, int o) {
  return Pair<S>(std::complex<S>(v(o), v(o + 1)), std::complex<S>(v(o + 2), v(o + 3)));
}

// packed layout: r, p_r, z (6), eta (6)
template <typename S>
S h_tilde_cone_packed(const Eigen::Matrix<S, Eigen::Dynamic, 1>& v, const Masses& M, double mu, double h,
                      bool fs = false) {
  const S r = v(0), pr = v(1);
  const Triple<S> z = unpack_triple(v, 2), eta = unpack_triple(v, 8);
  const Vec3<S> rho = rho_of(z);
  const S t = rho_tau(rho);
  const S kin = fs ? cone_kinetic_fs(z, eta, M) : cone_kinetic(z, eta, M);
  return t * pr * pr / 2 + t * mu * mu / (2 * r * r) + kin / (r * r) - rho_W(rho, M) / r - h * t;
}

// (r, p_r, q, p) layout -> Hamiltonian vector field
Eigen::VectorXd hamilton_flow(const Eigen::VectorXd& grad);

Eigen::VectorXd pack(const ConeState& s);
ConeState unpack_cone(const Eigen::VectorXd& v, double mu, double h);

double h_tilde_sph(const ConeState& s, const Masses& M);
double h_tilde_mu(const ConeState& s, const Masses& M);
double h_tilde_mu_fs(const ConeState& s, const Masses& M);
// spherical form ignores mu; reduced form adds the curvature term
ConeState rhs_tilde_sph(const ConeState& s, const Masses& M);
ConeState rhs_tilde_mu(const ConeState& s, const Masses& M);
CoConfig3 curvature_cone(const ConeState& s);
void normalize_gauge(ConeState& s);

RedState cone_to_reduced(const ConeState& s, const Masses& M);
SphState cone_to_spherical(const ConeState& s, const Masses& M);
ConeState reduced_to_cone(const RedState& s, unsigned signs, double h);
ConeState spherical_to_cone(const SphState& s, unsigned signs, double h);

// ---- quadratic parametrization (x, y)

template <typename S>
Triple<S> quad_param(const Pair<S>& x) {
  const std::complex<S> i(S(0), S(1));
  return Triple<S>(i * S(2) * x(0) * x(1), x(0) * x(0) + x(1) * x(1), i * (x(0) * x(0) - x(1) * x(1)));
}

// eta with y = conj(Dz)^T eta and eta12 = 0
template <typename S>
Triple<S> quad_eta(const Pair<S>& x, const Pair<S>& y) {
  const std::complex<S> i(S(0), S(1));
  const std::complex<S> a = y(0) / std::conj(x(0)), b = y(1) / std::conj(x(1));
  return Triple<S>(std::complex<S>(S(0), S(0)), (a + b) / S(4), i * (a - b) / S(4));
}

template <typename S>
Pair<S> quad_y(const Pair<S>& x, const Triple<S>& eta) {
  const std::complex<S> i(S(0), S(1));
  const std::complex<S> x1 = std::conj(x(0)), x2 = std::conj(x(1));
  return Pair<S>(-i * S(2) * x2 * eta(0) + S(2) * x1 * eta(1) - i * S(2) * x1 * eta(2),
                 -i * S(2) * x1 * eta(0) + S(2) * x2 * eta(1) + i * S(2) * x2 * eta(2));
}

struct QuadState {
  double r = 1, p_r = 0;
  Pair2 x = Pair2(1, 0);
  Pair2 y = Pair2::Zero();
  double mu = 0, h = 0;
};

template <typename S>
S quad_kinetic(const Pair<S>& x, const Pair<S>& y, const Masses& M) {
  const Vec3<S> rho = rho_of(quad_param(x));
  const S s = rho(0) + rho(1) + rho(2);
  const std::complex<S> x1 = std::conj(x(0)), x2 = std::conj(x(1));
  const std::complex<S> p1 = y(0) * x2 + y(1) * x1, p2 = y(0) * x2 - y(1) * x1, p3 = y(0) * x1 - y(1) * x2;
  const S k = std::norm(p1) * rho(2) / (32 * M.m1) + std::norm(p2) * rho(1) / (32 * M.m2) +
              std::norm(p3) * rho(0) / (32 * M.m3);
  return rho_x2(rho, M) * k / (s * s * s);
}

template <typename S>
S quad_kinetic_fs(const Pair<S>& x, const Pair<S>& y, const Masses& M) {
  const Vec3<S> rho = rho_of(quad_param(x));
  return rho_tau_over_lambda(rho, M) * std::norm(y(0) * x(1) - x(0) * y(1)) / 4;
}

// packed layout: r, p_r, x (4), y (4)
template <typename S>
S h_tilde_quad_packed(const Eigen::Matrix<S, Eigen::Dynamic, 1>& v, const Masses& M, double mu, double h,
                      bool fs = false) {
  const S r = v(0), pr = v(1);
  const Pair<S> x = unpack_pair(v, 2), y = unpack_pair(v, 6);
  const Vec3<S> rho = rho_of(quad_param(x));
  const S t = rho_tau(rho);
  const S kin = fs ? quad_kinetic_fs(x, y, M) : quad_kinetic(x, y, M);
  return t * pr * pr / 2 + t * mu * mu / (2 * r * r) + kin / (r * r) - rho_W(rho, M) / r - h * t;
}

Eigen::VectorXd pack(const QuadState& s);
QuadState unpack_quad(const Eigen::VectorXd& v, double mu, double h);
double h_tilde_sph(const QuadState& s, const Masses& M);
double h_tilde_mu(const QuadState& s, const Masses& M);
double h_tilde_mu_fs(const QuadState& s, const Masses& M);
QuadState rhs_tilde_sph(const QuadState& s, const Masses& M);
QuadState rhs_tilde_mu(const QuadState& s, const Masses& M);
Pair2 curvature_quad(const QuadState& s);
void normalize_gauge(QuadState& s);
ConeState quad_to_cone(const QuadState& s);
QuadState cone_to_quad(const ConeState& s);

// ---- regularized affine chart, x = (1, z)

struct RegAffineState {
  double r = 1, p_r = 0;
  cd z = 0, zeta = 0;
  double mu = 0, h = 0;
};

template <typename S>
Vec3<S> affine_rho(const S& x, const S& y) {
  const S q = x * x + y * y;
  const S re = x * x - y * y, im = 2 * x * y;
  return Vec3<S>(4 * q, (1 + re) * (1 + re) + im * im, (1 - re) * (1 - re) + im * im);
}

// (tau / lambda) (1 + |z|^2)^2
template <typename S>
S affine_kin_factor(const S& x, const S& y, const Masses& M) {
  const S q = 1 + x * x + y * y;
  return rho_tau_over_lambda(affine_rho(x, y), M) * q * q;
}

template <typename S>
S h_tilde_affine_packed(const Eigen::Matrix<S, Eigen::Dynamic, 1>& v, const Masses& M, double mu, double h) {
  const S r = v(0), pr = v(1);
  const Vec3<S> rho = affine_rho(v(2), v(3));
  const S t = rho_tau(rho);
  const S zeta2 = v(4) * v(4) + v(5) * v(5);
  return t * pr * pr / 2 + t * mu * mu / (2 * r * r) + affine_kin_factor(v(2), v(3), M) * zeta2 / (4 * r * r) -
         rho_W(rho, M) / r - h * t;
}

Eigen::VectorXd pack(const RegAffineState& s);
RegAffineState unpack_affine(const Eigen::VectorXd& v, double mu, double h);
double h_tilde_affine(const RegAffineState& s, const Masses& M);
RegAffineState rhs_reg_affine(const RegAffineState& s, const Masses& M);
QuadState affine_to_quad(const RegAffineState& s);
RegAffineState quad_to_affine(const QuadState& s);

// ---- SO(3) frame and c geometry

Eigen::Matrix3d so3_frame(const Config3& z);
Eigen::Vector3d c_map(const Config3& z);
// redefined rho: |c|^2 - c_k^2
template <typename S>
Vec3<S> rho_of_c(const Vec3<S>& c) {
  const S n2 = c.squaredNorm();
  return Vec3<S>(n2 - c(0) * c(0), n2 - c(1) * c(1), n2 - c(2) * c(2));
}
// |z_ij|^2 convention: rho_of_c / |c|
Eigen::Vector3d rho_z_of_c(const Eigen::Vector3d& c);
Config3 local_inverse(const Eigen::Vector3d& c, int which);

struct RegRoundState {
  double r = 1, p_r = 0;
  Eigen::Vector3d c = Eigen::Vector3d::UnitX();
  Eigen::Vector3d gamma = Eigen::Vector3d::Zero();
  double mu = 0, h = 0;
};

template <typename S>
S c_kin_factor(const Vec3<S>& c, const Masses& M) {
  return rho_tau_over_lambda(rho_of_c(c), M) * c.squaredNorm();
}

template <typename S>
S h_tilde_c_packed(const Eigen::Matrix<S, Eigen::Dynamic, 1>& v, const Masses& M, double mu, double h) {
  const S r = v(0), pr = v(1);
  const Vec3<S> c(v(2), v(3), v(4)), g(v(5), v(6), v(7));
  const Vec3<S> rho = rho_of_c(c);
  const S t = rho_tau(rho);
  return t * pr * pr / 2 + t * mu * mu / (2 * r * r) + c_kin_factor(c, M) * g.squaredNorm() / (r * r) -
         rho_W(rho, M) / r - h * t;
}

Eigen::VectorXd pack(const RegRoundState& s);
RegRoundState unpack_round(const Eigen::VectorXd& v, double mu, double h);
double h_tilde_mu_c(const RegRoundState& s, const Masses& M);
double tau_c(const Eigen::Vector3d& c);
double reg_potential_c(const Eigen::Vector3d& c, const Masses& M);
RegRoundState rhs_reg_round(const RegRoundState& s, const Masses& M);
Eigen::Vector3d curvature_c(const RegRoundState& s, const Masses& M);
void normalize_gauge(RegRoundState& s);
ConeState round_to_cone(const RegRoundState& s);
RegRoundState cone_to_round(const ConeState& s);

// ---- grids on the regularized affine plane z in [-extent, extent]^2, x = (1, z)

enum class RegGridField { W, pullback };
// W is finite everywhere; pullback is V of the squared shape, inf at the six collision preimages
std::vector<GridNode> regularized_grid(RegGridField field, int resolution, const Masses& M, double extent = 2.0);

// ---- Kepler testbed: q = z^2, p = eta / (2 conj z)

struct KeplerLC {
  double h, alpha;
  double hamiltonian(cd z, cd eta) const { return 0.5 * (std::norm(eta) - h * std::norm(z) - alpha); }
  // Kepler Hamiltonian 4|p|^2 - alpha/|q|; equals h on the zero level, with dt/ds = |z|^2 / 2
  double kepler_energy(cd q, cd p) const { return 4 * std::norm(p) - alpha / std::abs(q); }
  static double time_rate(cd z) { return std::norm(z) / 2; }
  // d/ds of (z, eta)
  std::pair<cd, cd> rhs(cd z, cd eta) const { return {eta, h * z}; }
  static cd position(cd z) { return z * z; }
  static cd momentum(cd z, cd eta) { return eta / (2.0 * std::conj(z)); }
};

}  // namespace threebody
