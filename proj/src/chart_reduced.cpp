#include "threebody/chart_reduced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace threebody {

CoConfig3 momentum_shift(const Config3& X, const CoConfig3& Z, double mu, const Masses& M) {
  const double x2 = mass_norm_sq(X, M);
  if (x2 == 0) throw invalid_state("momentum_shift: X = 0");
  return Z + (mu / x2) * cd(0, 1) * dual_vector(X, M);
}

RedState to_reduced(const SphState& s, const Masses& M) {
  RedState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.X = s.X;
  o.mu = -pairing(s.Y, s.X).imag();
  o.Z = momentum_shift(s.X, s.Y, -o.mu, M);
  return o;
}

SphState from_reduced(const RedState& s, const Masses& M) {
  SphState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.X = s.X;
  o.Y = momentum_shift(s.X, s.Z, s.mu, M);
  return o;
}

RedState to_reduced(const RelState& s, const Masses& M) { return to_reduced(to_spherical(s, M), M); }

double h_mu(const RedState& s, const Masses& M) {
  const double V = checked_shape_potential(s.X, M);
  const double r2 = s.r * s.r;
  return 0.5 * (s.p_r * s.p_r + s.mu * s.mu / r2) + mass_norm_sq(s.X, M) * kinetic(s.Z, M) / r2 -
         V / s.r;
}

double h_mu_fs(const RedState& s, const Masses& M) {
  const double V = checked_shape_potential(s.X, M);
  const double r2 = s.r * s.r;
  const double fs = M.m * std::norm(alpha_form(s.X, s.Z, M)) / (M.product());
  return 0.5 * (s.p_r * s.p_r + s.mu * s.mu / r2) + fs / (2 * r2) - V / s.r;
}

CoConfig3 curvature_mu(const RedState& s) { return (-2 * s.mu / (s.r * s.r)) * cd(0, 1) * s.Z; }

RedState rhs_mu(const RedState& s, const Masses& M) {
  const double V = checked_shape_potential(s.X, M);
  const double x2 = mass_norm_sq(s.X, M);
  const double K = kinetic(s.Z, M);
  const double r = s.r, r2 = r * r;
  RedState d;
  d.mu = 0;
  d.r = s.p_r;
  d.p_r = (s.mu * s.mu + 2 * x2 * K) / (r2 * r) - V / r2;
  d.X = (x2 / r2) * apply_kinetic(s.Z, M);
  d.Z = shape_potential_grad(s.X, M) / r - (2 * K / r2) * dual_vector(s.X, M) + curvature_mu(s);
  return d;
}

void normalize_gauge(RedState& s, const Masses& M) {
  const double x = std::sqrt(mass_norm_sq(s.X, M));
  s.X /= x;
  s.Z *= x;
}

Eigen::VectorXd pack(const RedState& s) {
  Eigen::VectorXd v(14);
  v(0) = s.r;
  v(1) = s.p_r;
  put_complex<3>(v, 2, s.X);
  put_complex<3>(v, 8, s.Z);
  return v;
}

RedState unpack_red(const Eigen::VectorXd& v, double mu) {
  RedState s;
  s.r = v(0);
  s.p_r = v(1);
  s.X = get_complex<3>(v, 2);
  s.Z = get_complex<3>(v, 8);
  s.mu = mu;
  return s;
}

// ---------------------------------------------------------------- affine

AffineChart::AffineChart(const ChartBasis& b, cd rho, int fixed, const Masses& M)
    : basis_(b), rho_(rho), fixed_(fixed), M_(M) {
  if (rho == 0.0) throw invalid_state("AffineChart: rho = 0");
  if (fixed != 0 && fixed != 1) throw invalid_state("AffineChart: fixed index is 0 or 1");
}

AffineChart AffineChart::jacobi(const Masses& M) {
  const ChartBasis b = make_basis(BasisKind::jacobi, M);
  const double mu1 = M.m1 * M.m2 / (M.m1 + M.m2), mu2 = (M.m1 + M.m2) * M.m3 / M.m;
  return AffineChart(b, std::sqrt(mu2 / mu1), 0, M);
}

AffineChart AffineChart::equilateral(const Masses& M) {
  return AffineChart(make_basis(BasisKind::equilateral, M), 1.0, 1, M);
}

Pair2 AffineChart::xi(cd z) const { return fixed_ == 0 ? Pair2(rho_, z) : Pair2(z, rho_); }

Pair2 AffineChart::eta(cd z, cd zeta) const {
  const cd t = -std::conj(z) * zeta / std::conj(rho_);
  return fixed_ == 0 ? Pair2(t, zeta) : Pair2(zeta, t);
}

double AffineChart::potential(cd z) const { return checked_shape_potential(shape(z), M_); }

cd AffineChart::potential_grad(cd z) const {
  return free_vector().dot(shape_potential_grad(shape(z), M_));
}

double AffineChart::h(const AffineRedState& s) const {
  const Config3 X = shape(s.z);
  const double V = checked_shape_potential(X, M_);
  const double x2 = mass_norm_sq(X, M_);
  const double r2 = s.r * s.r;
  const double kin = x2 * x2 * std::norm(s.zeta) / (basis_.det_g * std::norm(rho_) * r2);
  return 0.5 * (s.p_r * s.p_r + s.mu * s.mu / r2 + kin) - V / s.r;
}

AffineRedState AffineChart::rhs(const AffineRedState& s) const {
  const Config3 X = shape(s.z);
  const double V = checked_shape_potential(X, M_);
  const double x2 = mass_norm_sq(X, M_);
  const cd dx2 = free_vector().dot(cd(2) * dual_vector(X, M_));
  const double c = 1.0 / (basis_.det_g * std::norm(rho_));
  const double r = s.r, r2 = r * r;
  const double z2 = std::norm(s.zeta);
  AffineRedState d;
  d.mu = 0;
  d.r = s.p_r;
  d.p_r = (s.mu * s.mu + c * x2 * x2 * z2) / (r2 * r) - V / r2;
  d.z = c * x2 * x2 * s.zeta / r2;
  d.zeta = -(c * x2 * z2 / r2) * dx2 + potential_grad(s.z) / r -
           (2 * s.mu / r2) * cd(0, 1) * s.zeta;
  return d;
}

RedState AffineChart::to_reduced(const AffineRedState& s) const {
  RedState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.mu = s.mu;
  o.X = shape(s.z);
  o.Z = lift_momentum(eta(s.z, s.zeta), basis_, M_);
  return o;
}

cd AffineChart::coordinate(const Config3& X) const {
  const Pair2 x = chart_coords(X, basis_);
  if (std::abs(x(fixed_)) < 1e-12 * x.norm()) throw out_of_chart("affine chart: point at infinity");
  return rho_ * x(1 - fixed_) / x(fixed_);
}

AffineRedState AffineChart::from_reduced(const RedState& s) const {
  const Pair2 x = chart_coords(s.X, basis_);
  if (std::abs(x(fixed_)) < 1e-12 * x.norm()) throw out_of_chart("affine chart: point at infinity");
  const cd k = rho_ / x(fixed_);
  const Pair2 e = chart_momentum(s.Z, basis_) / std::conj(k);
  AffineRedState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.mu = s.mu;
  o.z = k * x(1 - fixed_);
  o.zeta = e(1 - fixed_);
  return o;
}

// ---------------------------------------------------------------- hopf / round

Eigen::Vector3d hopf_map(const Pair2& xi) {
  const cd p = std::conj(xi(0)) * xi(1);
  return {2 * p.real(), 2 * p.imag(), std::norm(xi(0)) - std::norm(xi(1))};
}

Pair2 inverse_hopf(const Eigen::Vector3d& w) {
  const double n = w.norm();
  if (n == 0) throw invalid_state("inverse_hopf: w = 0");
  const cd q(w(0), w(1));
  if (w(2) >= 0) {
    const double a = std::sqrt((n + w(2)) / 2);
    return Pair2(a, q / (2 * a));
  }
  const double b = std::sqrt((n - w(2)) / 2);
  return Pair2(std::conj(q) / (2 * b), b);
}

static Eigen::Matrix<double, 3, 4> hopf_jacobian(const Pair2& xi) {
  const double a1 = xi(0).real(), b1 = xi(0).imag(), a2 = xi(1).real(), b2 = xi(1).imag();
  Eigen::Matrix<double, 3, 4> J;
  J << 2 * a2, 2 * b2, 2 * a1, 2 * b1,
       2 * b2, -2 * a2, -2 * b1, 2 * a1,
       2 * a1, 2 * b1, -2 * a2, -2 * b2;
  return J;
}

RoundChart::RoundChart(const ChartBasis& b, const Masses& M) : basis_(b), M_(M) {
  for (int k = 0; k < 3; ++k) {
    const cd a = b.e1(k), c = b.e2(k);
    const cd ab = std::conj(a) * c;
    iso_[k] = 0.5 * (std::norm(a) + std::norm(c));
    lin_[k] = Eigen::Vector3d(ab.real(), -ab.imag(), 0.5 * (std::norm(a) - std::norm(c)));
  }
}

RoundChart RoundChart::equilateral(const Masses& M) {
  return RoundChart(make_basis(BasisKind::equilateral, M), M);
}

Eigen::Vector3d RoundChart::rho_sq(const Eigen::Vector3d& w) const {
  const double n = w.norm();
  return {iso_[0] * n + lin_[0].dot(w), iso_[1] * n + lin_[1].dot(w), iso_[2] * n + lin_[2].dot(w)};
}

double RoundChart::shape_norm_sq(const Eigen::Vector3d& w) const {
  return M_.pair().dot(rho_sq(w)) / M_.m;
}

Eigen::Vector3d RoundChart::shape_norm_sq_grad(const Eigen::Vector3d& w) const {
  const Eigen::Vector3d u = w / w.norm();
  const Eigen::Vector3d pw = M_.pair();
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (int k = 0; k < 3; ++k) g += pw(k) * (iso_[k] * u + lin_[k]);
  return g / M_.m;
}

double RoundChart::potential(const Eigen::Vector3d& w) const {
  const Eigen::Vector3d q = rho_sq(w);
  const Eigen::Vector3d pw = M_.pair();
  double U = 0;
  for (int k = 0; k < 3; ++k) {
    if (!(q(k) > 0)) throw collision_singularity("round chart: binary-collision shape");
    U += pw(k) / std::sqrt(q(k));
  }
  return std::sqrt(shape_norm_sq(w)) * U;
}

Eigen::Vector3d RoundChart::potential_grad(const Eigen::Vector3d& w) const {
  const Eigen::Vector3d q = rho_sq(w);
  const Eigen::Vector3d pw = M_.pair();
  const Eigen::Vector3d u = w / w.norm();
  const double x2 = shape_norm_sq(w), x = std::sqrt(x2);
  double U = 0;
  Eigen::Vector3d gU = Eigen::Vector3d::Zero();
  for (int k = 0; k < 3; ++k) {
    if (!(q(k) > 0)) throw collision_singularity("round chart: binary-collision shape");
    const double rk = std::sqrt(q(k));
    U += pw(k) / rk;
    gU -= pw(k) / (2 * q(k) * rk) * (iso_[k] * u + lin_[k]);
  }
  return U / (2 * x) * shape_norm_sq_grad(w) + x * gU;
}

double RoundChart::kappa(const Eigen::Vector3d& w) const {
  const double x2 = shape_norm_sq(w);
  return basis_.det_g * w.squaredNorm() / (x2 * x2);
}

double RoundChart::h(const RoundRedState& s) const {
  const double V = potential(s.w);
  const double x2 = shape_norm_sq(s.w);
  const double r2 = s.r * s.r;
  return 0.5 * (s.p_r * s.p_r + s.mu * s.mu / r2) + 2 * x2 * x2 * s.alpha.squaredNorm() / (basis_.det_g * r2) -
         V / s.r;
}

Eigen::Vector3d RoundChart::curvature(const RoundRedState& s) const {
  return (2 * s.mu / (s.w.norm() * s.r * s.r)) * s.alpha.cross(s.w);
}

RoundRedState RoundChart::rhs(const RoundRedState& s) const {
  const double V = potential(s.w);
  const double x2 = shape_norm_sq(s.w);
  const double g = basis_.det_g;
  const double a2 = s.alpha.squaredNorm();
  const double r = s.r, r2 = r * r;
  RoundRedState d;
  d.mu = 0;
  d.r = s.p_r;
  d.p_r = (s.mu * s.mu + 4 * x2 * x2 * a2 / g) / (r2 * r) - V / r2;
  d.w = (4 * x2 * x2 / (g * r2)) * s.alpha;
  d.alpha = -(4 * x2 * a2 / (g * r2)) * shape_norm_sq_grad(s.w) + potential_grad(s.w) / r + curvature(s);
  return d;
}

RedState RoundChart::to_reduced(const RoundRedState& s) const {
  const Pair2 xi = inverse_hopf(s.w);
  const Eigen::Vector4d e = hopf_jacobian(xi).transpose() * s.alpha;
  RedState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.mu = s.mu;
  o.X = embed(xi, basis_);
  o.Z = lift_momentum(Pair2(cd(e(0), e(1)), cd(e(2), e(3))), basis_, M_);
  return o;
}

RoundRedState RoundChart::from_reduced(const RedState& s) const {
  const Pair2 xi = chart_coords(s.X, basis_);
  const Pair2 eta = chart_momentum(s.Z, basis_);
  const Eigen::Matrix<double, 3, 4> J = hopf_jacobian(xi);
  const Eigen::Vector4d e(eta(0).real(), eta(0).imag(), eta(1).real(), eta(1).imag());
  RoundRedState o;
  o.r = s.r;
  o.p_r = s.p_r;
  o.mu = s.mu;
  o.w = hopf_map(xi);
  o.alpha = (J * J.transpose()).ldlt().solve(J * e);
  return o;
}

std::vector<Eigen::Vector3d> RoundChart::collision_points() const {
  std::vector<Eigen::Vector3d> p;
  for (int k = 0; k < 3; ++k) p.push_back(-lin_[k].normalized());
  return p;
}

// ---------------------------------------------------------------- landscape

static Eigen::Vector3d lonlat(double lon, double lat) {
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

std::vector<GridNode> potential_grid(GridChart chart, int res, const Masses& M, double extent) {
  if (res < 2 || res > 4096) throw invalid_state("potential_grid: resolution in [2, 4096]");
  std::vector<GridNode> out;
  const double inf = std::numeric_limits<double>::infinity();
  if (chart == GridChart::affine) {
    const AffineChart A = AffineChart::equilateral(M);
    out.reserve(size_t(res) * res);
    for (int i = 0; i < res; ++i)
      for (int j = 0; j < res; ++j) {
        const double x = -extent + 2 * extent * j / (res - 1);
        const double y = -extent + 2 * extent * i / (res - 1);
        const Config3 X = A.shape(cd(x, y));
        double V = inf;
        const double scale = std::sqrt(mass_norm_sq(X, M));
        if (X.cwiseAbs().minCoeff() > 1e-12 * scale) V = shape_potential(X, M);
        out.push_back({x, y, V});
      }
    return out;
  }
  const RoundChart R = RoundChart::equilateral(M);
  const int nlon = 2 * res;
  out.reserve(size_t(nlon) * res);
  for (int i = 0; i < res; ++i)
    for (int j = 0; j < nlon; ++j) {
      const double lon = -M_PI + M_PI * j / res;
      const double lat = -M_PI / 2 + M_PI * i / (res - 1);
      const Eigen::Vector3d w = lonlat(lon, lat);
      const Eigen::Vector3d q = R.rho_sq(w);
      double V = inf;
      if (q.minCoeff() > 1e-14) V = R.potential(w);
      out.push_back({lon, lat, V});
    }
  return out;
}

namespace {

// union-find over grid nodes
struct Clusters {
  std::vector<int> parent;
  explicit Clusters(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); }
  void join(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

GridCounts count_grid_extrema(const std::vector<GridNode>& grid, int res) {
  const int nlon = 2 * res, nlat = res;
  if (int(grid.size()) != nlon * nlat) throw invalid_state("count_grid_extrema: grid size");
  // the two pole rows collapse to single nodes: ids 0 (south) and 1 (north); others 2 + ...
  auto id = [&](int i, int j) {
    if (i <= 0) return 0;
    if (i >= nlat - 1) return 1;
    return 2 + (i - 1) * nlon + ((j % nlon) + nlon) % nlon;
  };
  const int n = 2 + (nlat - 2) * nlon;
  std::vector<double> val(n);
  val[0] = grid[0].V;
  val[1] = grid[size_t(nlat - 1) * nlon].V;
  for (int i = 1; i < nlat - 1; ++i)
    for (int j = 0; j < nlon; ++j) val[id(i, j)] = grid[size_t(i) * nlon + j].V;

  std::vector<std::vector<int>> ring(n);
  for (int j = 0; j < nlon; ++j) {
    ring[0].push_back(id(1, j));
    ring[1].push_back(id(nlat - 2, nlon - 1 - j));
  }
  for (int i = 1; i < nlat - 1; ++i)
    for (int j = 0; j < nlon; ++j)
      ring[id(i, j)] = {id(i - 1, j - 1), id(i - 1, j), id(i - 1, j + 1), id(i, j + 1),
                        id(i + 1, j + 1), id(i + 1, j), id(i + 1, j - 1), id(i, j - 1)};

  std::vector<int> kind(n, -1);  // 0 min, 1 saddle, 2 max
  for (int v = 0; v < n; ++v) {
    const double c = val[v];
    if (std::isinf(c)) {
      kind[v] = 2;
      continue;
    }
    int below = 0, above = 0, changes = 0;
    const auto& rg = ring[v];
    for (size_t k = 0; k < rg.size(); ++k) {
      const bool up = val[rg[k]] > c;
      (up ? above : below)++;
      const bool up_next = val[rg[(k + 1) % rg.size()]] > c;
      if (up != up_next) ++changes;
    }
    if (below == 0) kind[v] = 0;
    else if (above == 0) kind[v] = 2;
    else if (changes >= 4) kind[v] = 1;
  }
  Clusters cl(n);
  for (int v = 0; v < n; ++v)
    if (kind[v] >= 0)
      for (int u : ring[v])
        if (kind[u] == kind[v]) cl.join(u, v);
  GridCounts gc;
  std::vector<char> seen(n, 0);
  for (int v = 0; v < n; ++v) {
    if (kind[v] < 0) continue;
    const int root = cl.find(v);
    if (seen[root]) continue;
    seen[root] = 1;
    if (kind[v] == 0) ++gc.minima;
    else if (kind[v] == 1) ++gc.saddles;
    else ++gc.maxima;
  }
  return gc;
}

namespace {

void tangent_frame(const Eigen::Vector3d& p, Eigen::Vector3d& u1, Eigen::Vector3d& u2) {
  const Eigen::Vector3d a = std::abs(p(0)) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  u1 = (a - a.dot(p) * p).normalized();
  u2 = p.cross(u1);
}

Eigen::Vector2d sphere_grad(const RoundChart& R, const Eigen::Vector3d& p, const Eigen::Vector3d& u1,
                            const Eigen::Vector3d& u2) {
  const Eigen::Vector3d g = R.potential_grad(p);
  return {g.dot(u1), g.dot(u2)};
}

Eigen::Matrix2d sphere_hessian(const RoundChart& R, const Eigen::Vector3d& p, const Eigen::Vector3d& u1,
                               const Eigen::Vector3d& u2) {
  const double h = 1e-6;
  Eigen::Matrix2d H;
  const Eigen::Vector3d dirs[2] = {u1, u2};
  for (int c = 0; c < 2; ++c) {
    const Eigen::Vector3d pp = (p + h * dirs[c]).normalized(), pm = (p - h * dirs[c]).normalized();
    const Eigen::Vector3d gp = R.potential_grad(pp), gm = R.potential_grad(pm);
    H(0, c) = (gp.dot(u1) - gm.dot(u1)) / (2 * h);
    H(1, c) = (gp.dot(u2) - gm.dot(u2)) / (2 * h);
  }
  return 0.5 * (H + H.transpose());
}

bool near_collision(const RoundChart& R, const Eigen::Vector3d& p, double tol) {
  return R.rho_sq(p).minCoeff() < tol;
}

}  // namespace

static bool refine_critical(const RoundChart& R, Eigen::Vector3d& p, CriticalPoint& out) {
  for (int it = 0; it < 100; ++it) {
    if (near_collision(R, p, 1e-6)) return false;
    Eigen::Vector3d u1, u2;
    tangent_frame(p, u1, u2);
    const Eigen::Vector2d g = sphere_grad(R, p, u1, u2);
    if (g.norm() < 1e-11) break;
    const Eigen::Matrix2d H = sphere_hessian(R, p, u1, u2);
    Eigen::Vector2d step = -H.colPivHouseholderQr().solve(g);
    if (!step.allFinite()) return false;
    const double len = step.norm();
    if (len > 0.05) step *= 0.05 / len;
    p = (p + step(0) * u1 + step(1) * u2).normalized();
  }
  Eigen::Vector3d u1, u2;
  tangent_frame(p, u1, u2);
  const Eigen::Vector2d g = sphere_grad(R, p, u1, u2);
  if (g.norm() > 1e-8 || near_collision(R, p, 1e-6)) return false;
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sphere_hessian(R, p, u1, u2)).eigenvalues();
  out.w = p;
  out.value = R.potential(p);
  out.grad_norm = g.norm();
  out.index = (ev(0) < 0) + (ev(1) < 0);
  return true;
}

std::vector<CriticalPoint> find_critical_points(const RoundChart& R, int n) {
  std::vector<CriticalPoint> found;
  auto add = [&](Eigen::Vector3d p) {
    CriticalPoint c;
    try {
      if (!refine_critical(R, p, c)) return;
    } catch (const collision_singularity&) {
      return;
    }
    for (const auto& f : found)
      if ((f.w - c.w).norm() < 1e-6) return;
    found.push_back(c);
  };
  add(Eigen::Vector3d::UnitZ());
  add(-Eigen::Vector3d::UnitZ());
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < 2 * n; ++j) add(lonlat(-M_PI + M_PI * (j + 0.5) / n, -M_PI / 2 + M_PI * i / n));
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return a.index != b.index ? a.index < b.index : a.value < b.value;
  });
  return found;
}

std::vector<CriticalPoint> euler_points(const RoundChart& R, double tol) {
  // collinear circle is the equator w3 = 0; collisions split it into three arcs
  std::vector<double> cuts;
  for (const auto& c : R.collision_points()) cuts.push_back(std::atan2(c(1), c(0)));
  std::sort(cuts.begin(), cuts.end());
  auto dV = [&](double t) {
    const Eigen::Vector3d p = lonlat(t, 0);
    return R.potential_grad(p).dot(Eigen::Vector3d(-std::sin(t), std::cos(t), 0));
  };
  std::vector<CriticalPoint> out;
  for (int k = 0; k < 3; ++k) {
    double a = cuts[k], b = k + 1 < 3 ? cuts[k + 1] : cuts[0] + 2 * M_PI;
    const double margin = 1e-6 * (b - a);
    a += margin;
    b -= margin;
    // V -> +inf at both ends: dV < 0 near a, > 0 near b
    double fa = dV(a);
    for (int it = 0; it < 200 && b - a > tol; ++it) {
      const double c = 0.5 * (a + b), fc = dV(c);
      if ((fc < 0) == (fa < 0)) {
        a = c;
        fa = fc;
      } else {
        b = c;
      }
    }
    CriticalPoint cp;
    cp.w = lonlat(0.5 * (a + b), 0);
    cp.value = R.potential(cp.w);
    Eigen::Vector3d u1, u2;
    tangent_frame(cp.w, u1, u2);
    cp.grad_norm = sphere_grad(R, cp.w, u1, u2).norm();
    cp.index = 1;
    out.push_back(cp);
  }
  return out;
}

}  // namespace threebody
