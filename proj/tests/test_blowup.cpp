#include "util.hpp"

#include "threebody/checks.hpp"
#include "threebody/oracle.hpp"

using namespace threebody;

namespace {

const Config3 kEquilateral(1, omega, std::conj(omega));

bool same(const RedState& a, const RedState& b, double tol) {
  return std::abs(a.r - b.r) < tol && std::abs(a.p_r - b.p_r) < tol && max_abs(a.X - b.X) < tol &&
         max_abs(a.Z - b.Z) < tol && std::abs(a.mu - b.mu) < tol;
}

BlownState rest_equilateral(double r) {
  SphState s;
  s.r = 1;
  s.X = kEquilateral;
  BlownState b = blow_up(s, TimeScale::f1());
  b.r = r;
  return b;
}

}  // namespace

TEST_CASE("time scales") {
  const TimeScale f1 = TimeScale::f1(), f2 = TimeScale::f2();
  CHECK(f1.f(4) == doctest::Approx(8));
  CHECK(f1.nu(0.3) == 1);
  CHECK(f1.phi(0.3) == -0.5);
  CHECK(f2.f(1) == doctest::Approx(std::pow(0.5, 1.5)));
  for (double r : {0.1, 1.0, 7.0}) {
    CHECK(f2.nu(r) == doctest::Approx(f2.f(r) * f2.f(r) / (r * r * r)));
    const double d = 1e-6;
    CHECK(f2.dlog_nu(r) == doctest::Approx((std::log(f2.nu(r + d)) - std::log(f2.nu(r - d))) / (2 * d)).epsilon(1e-8));
  }
  CHECK(TimeScale::parse("f2").kind == TimeScaleKind::bounded_f2);
  CHECK_THROWS_AS(TimeScale::parse("f3"), invalid_state);
}

TEST_CASE("blow up and down") {
  SphState s;
  s.r = 1;
  s.p_r = 0.7;
  s.X = kEquilateral;
  BlownState b = blow_up(s, TimeScale::f1());
  CHECK(b.v == doctest::Approx(0.7));
  CHECK(b.mu_t == 0);

  s.r = 4;
  b = blow_up(s, TimeScale::f1());
  CHECK(b.v == doctest::Approx(1.4));

  Rng g(1);
  const Masses M(1, 2, 3);
  for (const TimeScale& ts : {TimeScale::f1(), TimeScale::f2()}) {
    for (int i = 0; i < 50; ++i) {
      const RedState a = to_reduced(random_rel_state(g, M), M);
      const BlownState x = blow_up(a, ts);
      REQUIRE(std::abs(mu_constraint_residual(x, ts, a.mu)) < 1e-13 * std::max(1.0, std::abs(a.mu)));
      REQUIRE(same(blow_down_reduced(x, ts), a, 1e-12 * std::max({1.0, a.r, std::abs(a.p_r), a.Z.norm()})));
    }
  }

  b.r = 0;
  CHECK_THROWS_AS(blow_down(b, TimeScale::f1()), invalid_state);
  SphState bad;
  bad.r = 0;
  CHECK_THROWS_AS(blow_up(bad, TimeScale::f1()), invalid_state);
}

TEST_CASE("vector field at rest") {
  const Masses E;
  const GeneralForm F = form_spherical(E, -3);
  const BlownState b = rest_equilateral(1);
  const BlownState d = rhs_blowup(b, F, TimeScale::f1());
  CHECK(d.v == doctest::Approx(-3));
  CHECK(d.r == 0);
  CHECK(v_prime_alt(b, F, TimeScale::f1()) == doctest::Approx(-3));
  CHECK(energy_residual(b, F, TimeScale::f1()) == doctest::Approx(0).epsilon(1e-14));
}

TEST_CASE("invariant submanifolds") {
  Rng g(2);
  const Masses M(1, 2, 3);
  for (const TimeScale& ts : {TimeScale::f1(), TimeScale::f2()}) {
    for (int i = 0; i < 20; ++i) {
      RedState a = to_reduced(random_rel_state(g, M), M);
      const double h = h_mu(a, M);
      const GeneralForm F = form_reduced(M, h);
      BlownState b = blow_up(a, ts);
      const BlownState d = rhs_blowup(b, F, ts);
      REQUIRE(std::abs(v_prime_alt(b, F, ts) - d.v) < 1e-12 * std::max(1.0, std::abs(d.v)));
      REQUIRE(std::abs(energy_residual(b, F, ts)) < 1e-11 * std::max(1.0, std::abs(b.v * b.v)));

      b.r = 0;
      REQUIRE(rhs_blowup(b, F, ts).r == 0);
      b.mu_t = 0;
      b.r = 0.5;
      REQUIRE(rhs_blowup(b, F, ts).mu_t == 0);
    }
  }
}

TEST_CASE("collision manifold") {
  const Masses E;
  const GeneralForm F = form_reduced(E, -1);
  BlownState b = rest_equilateral(0);
  b.v = -std::sqrt(6.0);
  CHECK(std::abs(energy_residual(b, F, TimeScale::f1())) < 1e-14);
  CHECK(energy_v(b, F, TimeScale::f1(), true) == doctest::Approx(-std::sqrt(6.0)));
  CHECK(energy_v(b, F, TimeScale::f1(), false) == doctest::Approx(std::sqrt(6.0)));
  // the equilateral rest point on the collision manifold
  const BlownState d = rhs_blowup(b, F, TimeScale::f1());
  CHECK(std::abs(d.v) < 1e-13);
  CHECK(max_abs(d.q) < 1e-14);
  CHECK(max_abs(d.alpha) < 1e-13);
}

TEST_CASE("homothetic collapse") {
  const Masses E;
  const double h = -1;
  const TimeScale f1 = TimeScale::f1();
  const System B = make_system("blowup_round", E, 0, h, f1);
  BlownState b;
  b.r = 0.5;
  b.q = Eigen::Vector3d::Constant(1 / std::sqrt(3.0));
  b.alpha = Eigen::Vector3d::Zero();
  b.v = energy_v(b, form_reg_round(E, h), f1, true);
  const Trajectory tr = integrate(B.field(), pack(b), 0, 150, B.options(1e-12));
  REQUIRE(tr.status == Status::completed);
  for (size_t k = 1; k < tr.states.size(); ++k) {
    REQUIRE(tr.states[k](0) < tr.states[k - 1](0));
    REQUIRE(tr.states[k](0) > 0);
  }
  CHECK(tr.final_state()(0) < 1e-4);
  CHECK(std::abs(tr.final_state()(1) + std::sqrt(6.0)) < 1e-4);
  for (const auto& rep : monitor_invariants(tr)) CHECK_MESSAGE(rep.max < 1e-9, rep.name << " " << rep.max);
}

TEST_CASE("blown up fields against the unblown charts") {
  for (const char* name : {"blowup_sph", "blowup_reduced", "blowup_affine", "blowup_round"}) {
    for (const TimeScale& ts : {TimeScale::f1(), TimeScale::f2()}) {
      const GradCheckReport rep = fd_gradient_check(make_system(name, Masses(1, 2, 3), 0.3, -1.1, ts), 50, 11);
      CHECK_MESSAGE(rep.pass(), name << "/" << ts.name() << " " << rep.max_rel_err);
    }
  }
}

TEST_CASE("time scales agree on a regular orbit") {
  const Masses M(1, 2, 3);
  const RelState rel = bodies_to_rel(figure_eight(0.1), M);
  auto [A, ya] = system_from_bodies("blowup_round", M, rel, TimeScale::f1());
  auto [B, yb] = system_from_bodies("blowup_round", M, rel, TimeScale::f2());
  const CrossChartReport rep = cross_chart_compare(A, ya, B, yb, 3, 30);
  CHECK(rep.completed);
  CHECK(rep.max_distance < 1e-7);

  const Trajectory tr = integrate(A.field(), ya, 0, 20, A.options(1e-12));
  REQUIRE(tr.status == Status::completed);
  for (const auto& r : monitor_invariants(tr)) CHECK_MESSAGE(r.max < 1e-8, r.name << " " << r.max);
  double drift = 0;
  for (const Vec& y : tr.states) drift = std::max(drift, std::abs(y.segment<3>(3).norm() - ya.segment<3>(3).norm()));
  CHECK(drift < 1e-9);
}

TEST_CASE("bounded time scale keeps escapes finite") {
  const Masses E;
  BodyState e = figure_eight(0.1);
  e.p *= 2.0;
  auto [S, y0] = system_from_bodies("blowup_round", E, bodies_to_rel(e, E), TimeScale::f2());
  REQUIRE(S.h > 0);
  IntegratorOptions o = S.options(1e-10);
  o.keep_steps = false;
  const Trajectory tr = integrate(S.field(), y0, 0, 500, o);
  CHECK(tr.status == Status::completed);
  CHECK(tr.final_state().allFinite());
  CHECK(tr.final_state()(0) > y0(0));
}
