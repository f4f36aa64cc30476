#include "util.hpp"

#include "threebody/checks.hpp"
#include "threebody/oracle.hpp"

using namespace threebody;

namespace {

const cd I(0, 1);
const Config3 kEquilateral(1, omega, std::conj(omega));

RedState rest(const Config3& X, double mu = 0, double r = 1) {
  RedState s;
  s.r = r;
  s.X = X;
  s.mu = mu;
  return s;
}

RedState random_red(Rng& g, const Masses& M) { return to_reduced(random_rel_state(g, M), M); }

Vec affine_vec(const AffineRedState& a) {
  Vec v(6);
  v << a.r, a.p_r, a.z.real(), a.z.imag(), a.zeta.real(), a.zeta.imag();
  return v;
}

Vec round_vec(const RoundRedState& a) {
  Vec v(8);
  v << a.r, a.p_r, a.w, a.alpha;
  return v;
}

RedState step(const RedState& s, const RedState& d, double e) {
  RedState t = s;
  t.r += e * d.r;
  t.p_r += e * d.p_r;
  t.X += e * d.X;
  t.Z += e * d.Z;
  return t;
}

}  // namespace

TEST_CASE("momentum shift") {
  const Masses E;
  Rng g(1);
  const Config3 X = rand_w(g);
  const CoConfig3 Z = rand_triple(g);
  CHECK(momentum_shift(X, Z, 0, E) == Z);

  const CoConfig3 Y = momentum_shift(kEquilateral, CoConfig3::Zero(), 1, E);
  CHECK(std::abs(pairing(Y, kEquilateral).imag() + 1) < 1e-14);
  CHECK(std::abs(pairing(Y, kEquilateral).real()) < 1e-14);
  CHECK(max_abs(momentum_shift(X, Z, 1.7, E) - momentum_shift(X, CoConfig3::Zero(), 1.7, E) - Z) < 1e-15);
  CHECK_THROWS_AS(momentum_shift(Config3::Zero().eval(), Z, 1, E), invalid_state);

  const Masses M(1, 2, 3);
  for (int i = 0; i < 50; ++i) {
    const RelState r = random_rel_state(g, M);
    const RedState s = to_reduced(r, M);
    REQUIRE(std::abs(pairing(s.Z, s.X)) < 1e-10 * std::max(1.0, s.Z.norm() * s.X.norm()));
    REQUIRE(std::abs(s.mu - angular_momentum(r)) < 1e-12 * std::max(1.0, std::abs(s.mu)));
    const SphState b = from_reduced(s, M);
    const SphState a = to_spherical(r, M);
    REQUIRE(std::abs(a.r - b.r) < 1e-12);
    REQUIRE(std::abs(a.p_r - b.p_r) < 1e-12 * std::max(1.0, std::abs(a.p_r)));
  }
}

TEST_CASE("reduced Hamiltonian") {
  const Masses E;
  const Config3 X = kEquilateral;
  CHECK(h_mu(rest(X), E) == doctest::Approx(-3));
  CHECK(h_mu(rest(X, 2), E) == doctest::Approx(-1));
  CHECK(h_mu(rest(X, 0, 2), E) == doctest::Approx(-1.5));
  CHECK_THROWS_AS(h_mu(rest(Config3(0, 1, -1)), E), collision_singularity);

  Rng g(2);
  const Masses M(1, 2, 3);
  for (int i = 0; i < 100; ++i) {
    const RelState r = random_rel_state(g, M);
    const RedState s = to_reduced(r, M);
    const double h = h_rel(r, M);
    REQUIRE(std::abs(h_mu(s, M) - h) < 1e-11 * std::max(1.0, std::abs(h)));
    REQUIRE(std::abs(h_mu_fs(s, M) - h_mu(s, M)) < 1e-12 * std::max(1.0, std::abs(h)));
  }
}

TEST_CASE("reduced vector field") {
  const Masses E;
  const Config3 X = kEquilateral;
  const RedState d = rhs_mu(rest(X), E);
  CHECK(d.r == 0);
  CHECK(d.p_r == doctest::Approx(-3));
  CHECK(std::abs(pairing(d.Z, X)) < 1e-10);
  CHECK(std::abs(pairing(d.Z, fs_unit(X, E))) < 1e-10);
  CHECK(max_abs(curvature_mu(rest(X, 3))) == 0);

  const GradCheckReport rep = fd_gradient_check(make_system("reduced", Masses(1, 2, 3), 0.4), 100, 3);
  CHECK(rep.samples == 100);
  CHECK(rep.max_rel_err < 1e-6);
}

TEST_CASE("reduced flow keeps the constraints") {
  const Masses M;
  const RedState s = to_reduced(bodies_to_rel(figure_eight(0.1), M), M);
  const System S = make_system("reduced", M, s.mu);
  IntegratorOptions o = S.options(1e-12, false);
  o.invariants.push_back({"x_norm", [&M](const Vec& y) { return mass_norm_sq(unpack_red(y, 0).X, M); }, true});
  o.invariants.push_back({"constraint", [](const Vec& y) {
                            const RedState t = unpack_red(y, 0);
                            return std::abs(pairing(t.Z, t.X));
                          }, false});
  const Trajectory tr = integrate(S.field(), pack(s), 0, 10, o);
  REQUIRE(tr.status == Status::completed);
  for (const auto& r : monitor_invariants(tr)) CHECK_MESSAGE(r.max < 1e-9, r.name << " " << r.max);
}

TEST_CASE("Jacobi affine chart") {
  const Masses E;
  const AffineChart A = AffineChart::jacobi(E);
  AffineRedState a;
  a.z = A.coordinate(kEquilateral);
  CHECK(A.h(a) == doctest::Approx(-3));
  CHECK(mass_norm_sq(A.shape(a.z), E) == doctest::Approx(2.0 / 3 * (1 + std::norm(a.z))));

  for (const Masses& M : {Masses(), Masses(1, 2, 3), Masses(0.3, 2, 1)}) {
    BodyState b;
    b.q = Config3(0, 1, cd(0.5, std::sqrt(3.0) / 2));
    const ChartBasis J = make_basis(BasisKind::jacobi, M);
    const cd lp((M.m1 - M.m2) / (2 * (M.m1 + M.m2)), std::sqrt(3.0) / 2);
    Pair2 c = chart_coords(reduce_translations(b, M).Q, J);
    CHECK(std::abs(c(1) / c(0) - lp) < 1e-14);
    b.q(2) = std::conj(b.q(2));
    c = chart_coords(reduce_translations(b, M).Q, J);
    CHECK(std::abs(c(1) / c(0) - std::conj(lp)) < 1e-14);
  }

  a.mu = 0;
  a.zeta = cd(0.3, -0.2);
  const AffineRedState d = A.rhs(a);
  a.mu = 1.5;
  const AffineRedState e = A.rhs(a);
  CHECK(std::abs(d.z - e.z) < 1e-14);
  CHECK(std::abs(e.zeta - d.zeta) > 1e-3);
  CHECK_THROWS_AS(A.coordinate(embed(Pair2(0, 1), A.basis())), out_of_chart);
}

TEST_CASE("affine and round fields are pushforwards of the reduced field") {
  const Masses M(1, 2, 3);
  const AffineChart A = AffineChart::jacobi(M);
  const RoundChart R(make_basis(BasisKind::jacobi, M), M);
  Rng g(5);
  const double e = 1e-6;
  double worst_a = 0, worst_r = 0;
  for (int i = 0; i < 50; ++i) {
    const RedState s = random_red(g, M);
    const RedState d = rhs_mu(s, M);
    const Vec fa = (affine_vec(A.from_reduced(step(s, d, e))) - affine_vec(A.from_reduced(step(s, d, -e)))) / (2 * e);
    const Vec ga = affine_vec(A.rhs(A.from_reduced(s)));
    worst_a = std::max(worst_a, (fa - ga).cwiseAbs().maxCoeff() / ga.cwiseAbs().maxCoeff());
    const Vec fr = (round_vec(R.from_reduced(step(s, d, e))) - round_vec(R.from_reduced(step(s, d, -e)))) / (2 * e);
    const RoundRedState o = R.from_reduced(s);
    const Vec gr = round_vec(R.rhs(o));
    // the reduced flow keeps |X|, not |w|: remove the scaling direction (w, -alpha)
    Vec gauge = Vec::Zero(8);
    gauge << 0, 0, o.w, -o.alpha;
    const Vec diff = fr - gr;
    const Vec res = diff - (diff.dot(gauge) / gauge.squaredNorm()) * gauge;
    worst_r = std::max(worst_r, res.cwiseAbs().maxCoeff() / gr.cwiseAbs().maxCoeff());
  }
  CHECK(worst_a < 1e-7);
  CHECK(worst_r < 1e-7);
}

TEST_CASE("equilateral affine chart") {
  const Masses E;
  const AffineChart A = AffineChart::equilateral(E);
  CHECK(max_abs(A.basis().e1 - kEquilateral) < 1e-15);
  CHECK(max_abs(A.basis().e2 + Config3(1, std::conj(omega), omega)) < 1e-15);
  CHECK(std::abs(A.potential_grad(0)) < 1e-10);
  CHECK(A.potential(0) == doctest::Approx(3));
  CHECK_THROWS_AS(A.potential(1.0), collision_singularity);
  for (cd c : {omega, std::conj(omega)}) CHECK(A.potential(c * (1 + 1e-9)) > 1e8);

  const Masses M(1, 2, 3);
  const AffineChart B = AffineChart::equilateral(M);
  for (double t : {0.1, 0.7, 1.9, 2.8, 4.4}) {
    const cd z = 0.6 * std::polar(1.0, t);
    const Config3 X = B.shape(z);
    const double w = std::sqrt(mass_norm_sq(X, M));
    const double V = w * (M.m1 * M.m2 / std::abs(z - 1.0) + M.m1 * M.m3 / std::abs(z - omega) +
                          M.m2 * M.m3 / std::abs(z - std::conj(omega)));
    CHECK(B.potential(z) == doctest::Approx(V).epsilon(1e-12));
  }

  // Euler radial derivative along rays, averaged over the angle
  auto mean_dr = [&](double rad) {
    double sum = 0;
    const int n = 360;
    for (int k = 0; k < n; ++k) {
      const cd u = std::polar(1.0, 2 * M_PI * (k + 0.5) / n);
      const cd gz = A.potential_grad(rad * u);
      sum += gz.real() * u.real() + gz.imag() * u.imag();
    }
    return sum / n;
  };
  for (double rad : {0.2, 0.5, 0.8}) CHECK(mean_dr(rad) > 0);
  for (double rad : {1.3, 2.0, 4.0}) CHECK(mean_dr(rad) < 0);
}

TEST_CASE("Hopf map") {
  CHECK(hopf_map(Pair2(1, 0)) == Eigen::Vector3d(0, 0, 1));
  CHECK(hopf_map(Pair2(1, 1)) == Eigen::Vector3d(2, 0, 0));
  Rng g(6);
  for (int i = 0; i < 100; ++i) {
    const Pair2 x(crand(g), crand(g));
    const Eigen::Vector3d w = hopf_map(x);
    REQUIRE(std::abs(w.norm() - x.squaredNorm()) < 1e-13 * x.squaredNorm());
    REQUIRE((hopf_map(Pair2(std::polar(1.0, 0.3 * i) * x)) - w).cwiseAbs().maxCoeff() < 1e-13 * w.norm());
    REQUIRE((hopf_map(inverse_hopf(w)) - w).cwiseAbs().maxCoeff() < 1e-13 * w.norm());
  }
}

TEST_CASE("round chart") {
  const Masses E;
  const RoundChart R = RoundChart::equilateral(E);
  Rng g(7);
  std::normal_distribution<double> N;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d w = Eigen::Vector3d(N(g), N(g), N(g)).normalized();
    const Eigen::Vector3d q = R.rho_sq(w);
    const Pair2 xi = inverse_hopf(w);
    const Config3 X = embed(xi, R.basis());
    for (int k = 0; k < 3; ++k) REQUIRE(std::abs(q(k) - std::norm(X(k))) < 1e-14);
    REQUIRE(std::abs(q(0) - (1 - w(0))) < 1e-14);
    REQUIRE(std::abs(q(1) - (1 + w(0) / 2 + std::sqrt(3.0) / 2 * w(1))) < 1e-14);
    REQUIRE(std::abs(q(2) - (1 + w(0) / 2 - std::sqrt(3.0) / 2 * w(1))) < 1e-14);
    REQUIRE(std::abs(R.kappa(w * (0.5 + i)) - 1) < 1e-13);
  }
  CHECK(R.potential(Eigen::Vector3d::UnitZ()) == doctest::Approx(3));
  CHECK((R.potential_grad(Eigen::Vector3d::UnitZ())).norm() < 1e-10);
  CHECK(R.potential(Eigen::Vector3d(-1, 0, 0)) == doctest::Approx(5 / std::sqrt(2.0)));

  RoundRedState s;
  s.w = Eigen::Vector3d(0.3, -0.4, 0.866).normalized();
  s.alpha = Eigen::Vector3d(0.1, 0.2, 0.3);
  s.alpha -= s.alpha.dot(s.w) * s.w;
  s.mu = 0.7;
  CHECK(R.h(s) == doctest::Approx(h_mu(R.to_reduced(s), E)).epsilon(1e-12));

  const Masses M(1, 2, 3);
  const RedState red = random_red(g, M);
  const System S = make_system("round", M, red.mu);
  IntegratorOptions o = S.options(1e-12, false);
  o.invariants.push_back({"w_norm", [](const Vec& y) { return y.segment<3>(2).norm(); }, true});
  const Trajectory tr = integrate(S.field(), S.from_reduced(red, 0), 0, 5, o);
  REQUIRE(tr.status == Status::completed);
  for (const auto& r : monitor_invariants(tr)) CHECK_MESSAGE(r.max < 1e-9, r.name << " " << r.max);
}

TEST_CASE("potential grids") {
  const Masses E;
  const int res = 63;
  const auto grid = potential_grid(GridChart::round, res, E);
  REQUIRE(grid.size() == size_t(2 * res * res));
  double vmin = INFINITY;
  int infs = 0;
  for (const auto& n : grid) {
    vmin = std::min(vmin, n.V);
    infs += std::isinf(n.V);
  }
  CHECK(vmin == doctest::Approx(3));
  for (const auto& n : grid)
    if (n.V < 3 + 1e-9) CHECK(std::abs(std::abs(n.v) - M_PI / 2) < 1e-12);
  CHECK(infs == 3);
  for (const auto& n : grid)
    if (std::isinf(n.V)) CHECK(std::abs(n.v) < 1e-12);

  const GridCounts c = count_grid_extrema(grid, res);
  CHECK(c.minima == 2);
  CHECK(c.saddles == 3);
  CHECK(c.maxima == 3);

  const auto flat = potential_grid(GridChart::affine, 41, E);
  CHECK(flat.size() == 41u * 41u);
  CHECK_THROWS_AS(potential_grid(GridChart::round, 1, E), invalid_state);
}

TEST_CASE("critical points") {
  const RoundChart R = RoundChart::equilateral(Masses());
  const auto cps = find_critical_points(R);
  REQUIRE(cps.size() == 5);
  int mins = 0, saddles = 0;
  for (const auto& p : cps) {
    CHECK(p.grad_norm < 1e-8);
    if (p.index == 0) {
      ++mins;
      CHECK(p.value == doctest::Approx(3));
    }
    if (p.index == 1) {
      ++saddles;
      CHECK(p.value == doctest::Approx(5 / std::sqrt(2.0)));
    }
  }
  CHECK(mins == 2);
  CHECK(saddles == 3);

  const RoundChart U = RoundChart::equilateral(Masses(1, 2, 10));
  const auto eu = euler_points(U);
  REQUIRE(eu.size() == 3);
  for (const auto& p : eu) {
    CHECK(p.grad_norm < 1e-8);
    CHECK(std::abs(p.w(2)) < 1e-12);
  }
}
