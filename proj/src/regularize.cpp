#include "threebody/regularize.hpp"

#include <cmath>

namespace threebody {

namespace {

const cd I(0, 1);

void require_nonzero(const Config3& z, const char* what) {
  if (z.norm() == 0) throw invalid_state(std::string(what) + ": z = 0");
}

Eigen::Vector3d cross_re(const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return a.cross(b); }

}  // namespace

Config3 lc_lift(const Config3& X, unsigned signs) {
  if (X.norm() == 0) throw invalid_state("lc_lift: X = 0");
  Config3 z;
  for (int k = 0; k < 3; ++k) z(k) = (signs >> k & 1u) ? -std::sqrt(X(k)) : std::sqrt(X(k));
  if (cone_residual(z) > 1e-10) throw invalid_state("lc_lift: branch leaves the cone");
  return z;
}

bool projectively_equal(const Config3& a, const Config3& b, double tol) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0 || nb == 0) return na == nb;
  const cd p = a.dot(b);  // conj(a) . b
  if (std::abs(p) == 0) return false;
  const cd ph = p / std::abs(p);
  return (b / nb - ph * a / na).norm() < tol;
}

std::vector<Config3> lemaitre_preimages(const Config3& X) {
  std::vector<Config3> out;
  for (unsigned s = 0; s < 8; ++s) {
    Config3 z = lc_lift(X, s);
    z /= z.norm();
    bool dup = false;
    for (const auto& w : out)
      if (projectively_equal(w, z, 1e-9)) dup = true;
    if (!dup) out.push_back(z);
  }
  return out;
}

double tau(const Config3& z) {
  require_nonzero(z, "tau");
  return rho_tau(rho_of(z));
}

double reg_potential(const Config3& z, const Masses& M) {
  require_nonzero(z, "reg_potential");
  return rho_W(rho_of(z), M);
}

double lambda_conformal(const Config3& z, const Masses& M) {
  require_nonzero(z, "lambda_conformal");
  return rho_lambda(rho_of(z), M);
}

Eigen::VectorXd hamilton_flow(const Eigen::VectorXd& g) {
  const Eigen::Index n = (g.size() - 2) / 2;
  Eigen::VectorXd d(g.size());
  d(0) = g(1);
  d(1) = -g(0);
  d.segment(2, n) = g.segment(2 + n, n);
  d.segment(2 + n, n) = -g.segment(2, n);
  return d;
}

// ---------------------------------------------------------------- cone

Eigen::VectorXd pack(const ConeState& s) {
  Eigen::VectorXd v(14);
  v(0) = s.r;
  v(1) = s.p_r;
  put_complex<3>(v, 2, s.z);
  put_complex<3>(v, 8, s.eta);
  return v;
}

ConeState unpack_cone(const Eigen::VectorXd& v, double mu, double h) {
  ConeState s;
  s.r = v(0);
  s.p_r = v(1);
  s.z = get_complex<3>(v, 2);
  s.eta = get_complex<3>(v, 8);
  s.mu = mu;
  s.h = h;
  return s;
}

double h_tilde_sph(const ConeState& s, const Masses& M) {
  return h_tilde_cone_packed<double>(pack(s), M, 0.0, s.h);
}
double h_tilde_mu(const ConeState& s, const Masses& M) {
  return h_tilde_cone_packed<double>(pack(s), M, s.mu, s.h);
}
double h_tilde_mu_fs(const ConeState& s, const Masses& M) {
  return h_tilde_cone_packed<double>(pack(s), M, s.mu, s.h, true);
}

CoConfig3 curvature_cone(const ConeState& s) {
  return (-2 * s.mu * tau(s.z) / (s.r * s.r)) * I * s.eta;
}

ConeState rhs_tilde_sph(const ConeState& s, const Masses& M) {
  const Eigen::VectorXd g =
      ad_gradient([&](const ADVector& v) { return h_tilde_cone_packed(v, M, 0.0, s.h); }, pack(s));
  ConeState d = unpack_cone(hamilton_flow(g), 0, 0);
  return d;
}

ConeState rhs_tilde_mu(const ConeState& s, const Masses& M) {
  const Eigen::VectorXd g =
      ad_gradient([&](const ADVector& v) { return h_tilde_cone_packed(v, M, s.mu, s.h); }, pack(s));
  ConeState d = unpack_cone(hamilton_flow(g), 0, 0);
  d.eta += curvature_cone(s);
  return d;
}

void normalize_gauge(ConeState& s) {
  const double k = s.z.norm();
  s.z /= k;
  s.eta *= k;
}

RedState cone_to_reduced(const ConeState& s, const Masses& M) {
  (void)M;
  RedState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.mu = s.mu;
  o.X = lc_project(s.z);
  for (int k = 0; k < 3; ++k) {
    if (s.z(k) == 0.0) throw collision_singularity("cone_to_reduced: binary collision");
    o.Z(k) = s.eta(k) / (2.0 * std::conj(s.z(k)));
  }
  return o;
}

SphState cone_to_spherical(const ConeState& s, const Masses& M) {
  ConeState t = s;
  t.mu = 0;
  const RedState r = cone_to_reduced(t, M);
  SphState o;
  o.r = r.r;
  o.p_r = r.p_r;
  o.X = r.X;
  o.Y = r.Z;
  return o;
}

ConeState reduced_to_cone(const RedState& s, unsigned signs, double h) {
  ConeState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.mu = s.mu;
  o.h = h;
  o.z = lc_lift(s.X, signs);
  o.eta = 2.0 * o.z.conjugate().cwiseProduct(s.Z);
  normalize_gauge(o);
  return o;
}

ConeState spherical_to_cone(const SphState& s, unsigned signs, double h) {
  RedState r;
  r.r = s.r;
  r.p_r = s.p_r;
  r.X = s.X;
  r.Z = s.Y;
  r.mu = 0;
  return reduced_to_cone(r, signs, h);
}

// ---------------------------------------------------------------- quadratic

Eigen::VectorXd pack(const QuadState& s) {
  Eigen::VectorXd v(10);
  v(0) = s.r;
  v(1) = s.p_r;
  put_complex<2>(v, 2, s.x);
  put_complex<2>(v, 6, s.y);
  return v;
}

QuadState unpack_quad(const Eigen::VectorXd& v, double mu, double h) {
  QuadState s;
  s.r = v(0);
  s.p_r = v(1);
  s.x = get_complex<2>(v, 2);
  s.y = get_complex<2>(v, 6);
  s.mu = mu;
  s.h = h;
  return s;
}

double h_tilde_sph(const QuadState& s, const Masses& M) {
  return h_tilde_quad_packed<double>(pack(s), M, 0.0, s.h);
}
double h_tilde_mu(const QuadState& s, const Masses& M) {
  return h_tilde_quad_packed<double>(pack(s), M, s.mu, s.h);
}
double h_tilde_mu_fs(const QuadState& s, const Masses& M) {
  return h_tilde_quad_packed<double>(pack(s), M, s.mu, s.h, true);
}

Pair2 curvature_quad(const QuadState& s) {
  return (-2 * s.mu * tau(quad_param(s.x)) / (s.r * s.r)) * I * s.y;
}

QuadState rhs_tilde_sph(const QuadState& s, const Masses& M) {
  const Eigen::VectorXd g =
      ad_gradient([&](const ADVector& v) { return h_tilde_quad_packed(v, M, 0.0, s.h); }, pack(s));
  return unpack_quad(hamilton_flow(g), 0, 0);
}

QuadState rhs_tilde_mu(const QuadState& s, const Masses& M) {
  const Eigen::VectorXd g =
      ad_gradient([&](const ADVector& v) { return h_tilde_quad_packed(v, M, s.mu, s.h); }, pack(s));
  QuadState d = unpack_quad(hamilton_flow(g), 0, 0);
  d.y += curvature_quad(s);
  return d;
}

void normalize_gauge(QuadState& s) {
  const double k = s.x.norm();
  s.x /= k;
  s.y *= k;
}

ConeState quad_to_cone(const QuadState& s) {
  ConeState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.mu = s.mu;
  o.h = s.h;
  o.z = quad_param(s.x);
  o.eta = quad_eta(s.x, s.y);
  return o;
}

QuadState cone_to_quad(const ConeState& s) {
  QuadState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.mu = s.mu;
  o.h = s.h;
  cd x1 = std::sqrt((s.z(1) - I * s.z(2)) / 2.0);
  const cd x2 = std::sqrt((s.z(1) + I * s.z(2)) / 2.0);
  if (std::abs(2.0 * I * x1 * x2 - s.z(0)) > std::abs(2.0 * I * x1 * x2 + s.z(0))) x1 = -x1;
  o.x = Pair2(x1, x2);
  o.y = quad_y(o.x, s.eta);
  return o;
}

// ---------------------------------------------------------------- affine

Eigen::VectorXd pack(const RegAffineState& s) {
  Eigen::VectorXd v(6);
  v << s.r, s.p_r, s.z.real(), s.z.imag(), s.zeta.real(), s.zeta.imag();
  return v;
}

RegAffineState unpack_affine(const Eigen::VectorXd& v, double mu, double h) {
  RegAffineState s;
  s.r = v(0);
  s.p_r = v(1);
  s.z = cd(v(2), v(3));
  s.zeta = cd(v(4), v(5));
  s.mu = mu;
  s.h = h;
  return s;
}

double h_tilde_affine(const RegAffineState& s, const Masses& M) {
  return h_tilde_affine_packed<double>(pack(s), M, s.mu, s.h);
}

RegAffineState rhs_reg_affine(const RegAffineState& s, const Masses& M) {
  const Eigen::VectorXd g =
      ad_gradient([&](const ADVector& v) { return h_tilde_affine_packed(v, M, s.mu, s.h); }, pack(s));
  RegAffineState d = unpack_affine(hamilton_flow(g), 0, 0);
  const double t = rho_tau(affine_rho(s.z.real(), s.z.imag()));
  d.zeta += (-2 * s.mu * t / (s.r * s.r)) * I * s.zeta;
  return d;
}

QuadState affine_to_quad(const RegAffineState& s) {
  QuadState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.mu = s.mu;
  o.h = s.h;
  o.x = Pair2(1.0, s.z);
  o.y = Pair2(-std::conj(s.z) * s.zeta, s.zeta);
  return o;
}

RegAffineState quad_to_affine(const QuadState& s) {
  if (s.x(0) == 0.0) throw out_of_chart("quad_to_affine: x1 = 0");
  RegAffineState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.mu = s.mu;
  o.h = s.h;
  o.z = s.x(1) / s.x(0);
  o.zeta = s.y(1) * std::conj(s.x(0));
  return o;
}

// ---------------------------------------------------------------- c geometry

Eigen::Matrix3d so3_frame(const Config3& z) {
  require_nonzero(z, "so3_frame");
  if (cone_residual(z) > 1e-10) throw invalid_state("so3_frame: z not on the cone");
  const Eigen::Vector3d a = z.real(), b = z.imag();
  const double s2 = z.squaredNorm() / 2, s = std::sqrt(s2);
  Eigen::Matrix3d A;
  A.col(0) = a / s;
  A.col(1) = b / s;
  A.col(2) = a.cross(b) / s2;
  return A;
}

Eigen::Vector3d c_map(const Config3& z) {
  const Eigen::Vector3d a = z.real(), b = z.imag();
  return cross_re(a, b);
}

Eigen::Vector3d rho_z_of_c(const Eigen::Vector3d& c) {
  const double n = c.norm();
  if (n == 0) throw invalid_state("rho_z_of_c: c = 0");
  return rho_of_c<double>(c) / n;
}

Config3 local_inverse(const Eigen::Vector3d& c, int which) {
  const double n = c.norm();
  if (n == 0) throw invalid_state("local_inverse: c = 0");
  if (which < 0 || which > 2) throw invalid_state("local_inverse: which is 0, 1 or 2");
  const int i = which, j = (which + 1) % 3, l = (which + 2) % 3;
  Config3 z;
  z(i) = c(j) * c(j) + c(l) * c(l);
  if (z(i).real() < 1e-12 * n * n) throw out_of_chart("local_inverse: defining component vanishes");
  z(j) = cd(-c(i) * c(j), n * c(l));
  z(l) = cd(-c(i) * c(l), -n * c(j));
  return z;
}

Eigen::VectorXd pack(const RegRoundState& s) {
  Eigen::VectorXd v(8);
  v << s.r, s.p_r, s.c, s.gamma;
  return v;
}

RegRoundState unpack_round(const Eigen::VectorXd& v, double mu, double h) {
  RegRoundState s;
  s.r = v(0);
  s.p_r = v(1);
  s.c = v.segment<3>(2);
  s.gamma = v.segment<3>(5);
  s.mu = mu;
  s.h = h;
  return s;
}

double tau_c(const Eigen::Vector3d& c) { return rho_tau(rho_of_c<double>(c)); }
double reg_potential_c(const Eigen::Vector3d& c, const Masses& M) { return rho_W(rho_of_c<double>(c), M); }

double h_tilde_mu_c(const RegRoundState& s, const Masses& M) {
  return h_tilde_c_packed<double>(pack(s), M, s.mu, s.h);
}

Eigen::Vector3d curvature_c(const RegRoundState& s, const Masses& M) {
  (void)M;
  return (2 * s.mu * tau_c(s.c) / (s.c.norm() * s.r * s.r)) * s.gamma.cross(s.c);
}

RegRoundState rhs_reg_round(const RegRoundState& s, const Masses& M) {
  const Eigen::VectorXd g =
      ad_gradient([&](const ADVector& v) { return h_tilde_c_packed(v, M, s.mu, s.h); }, pack(s));
  RegRoundState d = unpack_round(hamilton_flow(g), 0, 0);
  d.gamma += curvature_c(s, M);
  return d;
}

void normalize_gauge(RegRoundState& s) {
  const double k = s.c.norm();
  s.c /= k;
  s.gamma *= k;
}

ConeState round_to_cone(const RegRoundState& s) {
  const Eigen::Vector3d rho = rho_of_c<double>(s.c);
  int k = 0;
  rho.maxCoeff(&k);
  ConeState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.mu = s.mu;
  o.h = s.h;
  o.z = local_inverse(s.c, k);
  const double scale = c_map(o.z).dot(s.c) / s.c.squaredNorm();
  const Eigen::Vector3d g = s.gamma / scale;
  const Eigen::Vector3d a = o.z.real(), b = o.z.imag();
  const Eigen::Vector3d re = b.cross(g), im = -a.cross(g);
  for (int j = 0; j < 3; ++j) o.eta(j) = cd(re(j), im(j));
  normalize_gauge(o);
  return o;
}

RegRoundState cone_to_round(const ConeState& s) {
  const Eigen::Vector3d a = s.z.real(), b = s.z.imag();
  const Eigen::Vector3d c = a.cross(b);
  const double c2 = c.squaredNorm();
  if (c2 == 0) throw invalid_state("cone_to_round: degenerate cone point");
  const double al = -s.eta.real().dot(c) / c2, be = -s.eta.imag().dot(c) / c2;
  RegRoundState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.mu = s.mu;
  o.h = s.h;
  o.c = c;
  o.gamma = al * a + be * b;
  normalize_gauge(o);
  return o;
}

std::vector<GridNode> regularized_grid(RegGridField field, int res, const Masses& M, double extent) {
  if (res < 2 || res > 4096) throw invalid_state("regularized_grid: resolution in [2, 4096]");
  std::vector<GridNode> out;
  out.reserve(size_t(res) * res);
  for (int i = 0; i < res; ++i)
    for (int j = 0; j < res; ++j) {
      const double x = -extent + 2 * extent * j / (res - 1);
      const double y = -extent + 2 * extent * i / (res - 1);
      double V;
      if (field == RegGridField::W) {
        V = rho_W(affine_rho(x, y), M);
      } else {
        const Config3 X = lc_project(quad_param(Pair2(1, cd(x, y))));
        const double scale = X.cwiseAbs().maxCoeff();
        V = X.cwiseAbs().minCoeff() > 1e-12 * scale ? shape_potential(X, M) : INFINITY;
      }
      out.push_back({x, y, V});
    }
  return out;
}

}  // namespace threebody
