#include "util.hpp"

#include "threebody/checks.hpp"
#include "threebody/oracle.hpp"

using namespace threebody;

namespace {

const cd I(0, 1);
const Config3 kEquilateral(1, omega, std::conj(omega));

SphState random_sph(Rng& g, const Masses& M) {
  SphState s = to_spherical(random_rel_state(g, M), M);
  return s;
}

}  // namespace

TEST_CASE("to spherical") {
  const Masses E;
  RelState r;
  r.Q = kEquilateral;
  SphState s = to_spherical(r, E);
  CHECK(s.r == doctest::Approx(1));
  CHECK(s.p_r == 0);
  CHECK(max_abs(s.Y) == 0);

  r.Q = Config3(1, -2, 1);
  r.P = dual_vector(r.Q, E);
  s = to_spherical(r, E);
  CHECK(s.p_r == doctest::Approx(std::sqrt(2.0)));
  CHECK(max_abs(s.Y) < 1e-15);

  Rng g(1);
  const Masses M(1, 2, 3);
  for (int i = 0; i < 100; ++i) {
    const SphState t = random_sph(g, M);
    REQUIRE(std::abs(pairing(t.Y, t.X).real()) < 1e-14 * std::max(1.0, t.Y.norm() * t.X.norm()));
  }
  CHECK_THROWS_AS(to_spherical(RelState{}, E), invalid_state);
}

TEST_CASE("from spherical") {
  const Masses E;
  SphState s;
  s.r = 2;
  s.X = kEquilateral;
  const RelState r = from_spherical(s, E);
  CHECK(max_abs(r.Q - 2.0 * kEquilateral) < 1e-15);
  CHECK(max_abs(r.P) == 0);

  Rng g(2);
  const Masses M(1, 2, 3);
  for (int i = 0; i < 100; ++i) {
    const RelState a = random_rel_state(g, M);
    const RelState b = from_spherical(to_spherical(a, M), M);
    REQUIRE(max_abs(a.Q - b.Q) < 1e-13);
    REQUIRE(max_abs(a.P - b.P) < 1e-13);
  }

  // F o G rescales the representative
  SphState t = random_sph(g, M);
  t.X *= 2.5;
  t.Y /= 2.5;
  t.r = 0.7;
  const double x = std::sqrt(mass_norm_sq(t.X, M));
  const SphState u = to_spherical(from_spherical(t, M), M);
  CHECK(max_abs(u.X - (t.r / x) * t.X) < 1e-14);
  CHECK(max_abs(u.Y - (x / t.r) * t.Y) < 1e-13);
  CHECK(u.p_r == doctest::Approx(t.p_r));

  t.Y += dual_vector(t.X, M);
  CHECK_THROWS_AS(from_spherical(t, M), invalid_state);
}

TEST_CASE("shape potential") {
  const Masses E;
  CHECK(shape_potential(kEquilateral, E) == doctest::Approx(3));
  CHECK(shape_potential(Config3(1, -2, 1), E) == doctest::Approx(5 / std::sqrt(2.0)));
  CHECK(shape_potential(Config3(1, -2, 1), E) == doctest::Approx(3.5355339).epsilon(1e-8));
  const Config3 X(0.3 + 0.1 * I, -1.2, 0.9 - 0.1 * I);
  CHECK(std::abs(shape_potential(Config3(2.0 * I * X), E) - shape_potential(X, E)) < 1e-14);
  CHECK_THROWS_AS(checked_shape_potential(Config3(0, 1, -1), E), collision_singularity);
}

TEST_CASE("shape potential gradient against central differences") {
  Rng g(3);
  const Masses M(1, 2, 3);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Config3 X = rand_w(g);
    const Config3 G = shape_potential_grad(X, M);
    Config3 fd;
    for (int k = 0; k < 3; ++k) {
      Config3 a = X, b = X, c = X, d = X;
      a(k) += h;
      b(k) -= h;
      c(k) += I * h;
      d(k) -= I * h;
      fd(k) = cd((shape_potential(a, M) - shape_potential(b, M)) / (2 * h),
                 (shape_potential(c, M) - shape_potential(d, M)) / (2 * h));
    }
    REQUIRE(max_abs(fd - G) < 1e-6 * max_abs(G));
  }
}

TEST_CASE("spherical Hamiltonian") {
  const Masses E;
  SphState s;
  s.X = kEquilateral;
  CHECK(h_sph(s, E) == doctest::Approx(-3));
  s.r = 2;
  CHECK(h_sph(s, E) == doctest::Approx(-1.5));

  Rng g(4);
  const Masses M(1, 2, 3);
  for (int i = 0; i < 100; ++i) {
    const RelState r = random_rel_state(g, M);
    const double h = h_rel(r, M);
    REQUIRE(std::abs(h_sph(to_spherical(r, M), M) - h) < 1e-12 * std::max(1.0, std::abs(h)));
  }
}

TEST_CASE("spherical vector field") {
  const Masses E;
  SphState s;
  s.X = kEquilateral;
  const SphState d = rhs_sph(s, E);
  CHECK(d.r == 0);
  CHECK(d.p_r == doctest::Approx(-3));
  CHECK(max_abs(d.X) == 0);

  const GradCheckReport rep = fd_gradient_check(make_system("spherical", Masses(1, 2, 3)), 100, 7);
  CHECK(rep.samples == 100);
  CHECK(rep.max_rel_err < 1e-6);
}

TEST_CASE("gauge keeps the Hamiltonian") {
  Rng g(5);
  const Masses M(1, 2, 3);
  SphState s = random_sph(g, M);
  const double h = h_sph(s, M);
  normalize_gauge(s, M);
  CHECK(mass_norm_sq(s.X, M) == doctest::Approx(1));
  CHECK(h_sph(s, M) == doctest::Approx(h).epsilon(1e-14));
}

TEST_CASE("spherical flow invariants and pushforward") {
  const Masses E;
  const RelState r0 = bodies_to_rel(figure_eight(0.1), E);
  const System S = make_system("spherical", E), R = make_system("relative", E);
  IntegratorOptions o = S.options(1e-12, false);
  o.invariants.push_back({"re_pairing", [](const Vec& y) {
                            const SphState s = unpack_sph(y);
                            return pairing(s.Y, s.X).real();
                          }, false});
  o.invariants.push_back({"x_norm", [E](const Vec& y) { return mass_norm_sq(unpack_sph(y).X, E); }, true});
  for (int k = 0; k <= 10; ++k) o.sample_times.push_back(0.5 * k);
  const Trajectory a = integrate(S.field(), S.from_rel(r0), 0, 5, o);
  REQUIRE(a.status == Status::completed);
  for (const auto& rep : monitor_invariants(a)) CHECK_MESSAGE(rep.max < 1e-9, rep.name << " " << rep.max);

  const Trajectory b = integrate(R.field(), R.from_rel(r0), 0, 5, R.options(1e-12));
  double worst = 0;
  for (size_t i = 0; i < a.sample_t.size(); ++i) {
    const RelState x = from_spherical(unpack_sph(a.samples[i]), E);
    const RelState y = *R.to_rel(b.dense(a.sample_t[i]));
    worst = std::max({worst, max_abs(x.Q - y.Q), max_abs(project_translation(Config3(x.P - y.P), E))});
  }
  CHECK(worst < 1e-7);
}
