#include "util.hpp"

#include <sstream>

#include "threebody/checks.hpp"
#include "threebody/oracle.hpp"

using namespace threebody;

TEST_CASE("gradient check passes on every chart") {
  const Masses M(1, 2, 3);
  for (const std::string& name : system_names()) {
    const System S = make_system(name, M, 0.3, -1.1);
    const GradCheckReport rep = fd_gradient_check(S, 100, 17);
    CHECK_MESSAGE(rep.pass(), name << " " << rep.max_rel_err);
    CHECK(rep.samples == 100);
    CHECK(rep.seed == 17);
    // blown-up fields are compared after blow-down, which drops mu_t
    const int d = name.rfind("blowup_", 0) == 0 ? S.dim - 1 : S.dim;
    CHECK(static_cast<int>(rep.component_max.size()) == d);
  }
}

TEST_CASE("gradient check flags a corrupted field") {
  const Masses M(1, 2, 3);
  for (const char* name : {"relative", "reduced"}) {
    const System S = make_system(name, M, 0.4);
    const GradCheckReport rep = fd_gradient_check(S, [f = S.rhs](const Vec& y) { return (-f(y)).eval(); }, 100, 3);
    CHECK_FALSE(rep.pass());
    CHECK(rep.max_rel_err == doctest::Approx(2).epsilon(1e-3));
    const auto j = rep.to_json(S);
    CHECK(j["pass"] == false);
    CHECK(j["seed"] == 3);
    CHECK(j.contains("worst_state"));
  }
}

TEST_CASE("gradient check is reproducible") {
  const System S = make_system("spherical", Masses(1, 2, 3));
  const GradCheckReport a = fd_gradient_check(S, 100, 9), b = fd_gradient_check(S, 100, 9);
  CHECK(a.max_rel_err == b.max_rel_err);
  CHECK((a.worst_state.array() == b.worst_state.array()).all());
}

TEST_CASE("reduced features quotient the symmetries") {
  Rng g(4);
  const Masses M(1, 2, 3);
  const RedState s = to_reduced(random_rel_state(g, M), M);
  RedState t = s;
  const cd u = std::polar(1.0, 0.77);
  t.X = u * s.X * 1.9;
  t.Z = u * s.Z / 1.9 + CoConfig3::Constant(cd(0.3, -0.2));
  CHECK(max_abs(reduced_features(s) - reduced_features(t)) < 1e-13);
  t.p_r += 1e-3;
  CHECK(max_abs(reduced_features(s) - reduced_features(t)) > 1e-4);
}

TEST_CASE("cross chart comparison") {
  const Masses E;
  const RelState rel = bodies_to_rel(figure_eight(0.1), E);
  const System R = make_system("relative", E);
  auto [S, ys] = system_from_bodies("spherical", E, rel);
  CrossChartReport rep = cross_chart_compare(R, R.from_rel(rel), S, ys, 5, 50);
  CHECK(rep.completed);
  CHECK(rep.samples == 51);
  CHECK(rep.out_of_chart == 0);
  CHECK(rep.max_distance < 1e-7);

  auto [A, ya] = system_from_bodies("reduced", E, rel);
  auto [B, yb] = system_from_bodies("affine", E, rel);
  rep = cross_chart_compare(A, ya, B, yb, 5, 50);
  CHECK(rep.completed);
  CHECK(rep.max_distance < 1e-7);

  auto [C, yc] = system_from_bodies("reg_mu_z", E, rel);
  rep = cross_chart_compare(A, ya, C, yc, 5, 50);
  CHECK(rep.completed);
  CHECK(rep.max_distance < 1e-6);
  CHECK(rep.to_json()["b"] == "reg_mu_z");

  // different orbits are told apart
  BodyState other = figure_eight(0.1);
  other.p *= 1.01;
  const RelState rel2 = bodies_to_rel(other, E);
  rep = cross_chart_compare(R, R.from_rel(rel), R, R.from_rel(rel2), 5, 50);
  CHECK(rep.max_distance > 1e-3);
}

TEST_CASE("physical time runs") {
  const Masses E;
  const RelState rel = bodies_to_rel(figure_eight(0.1), E);
  auto [C, y] = system_from_bodies("reg_round", E, rel);
  const TimedRun run = run_physical_time(C, y, 2, 20);
  REQUIRE(run.status == Status::completed);
  REQUIRE(run.t.size() == 21);
  for (int k = 0; k <= 20; ++k) CHECK(run.t[k] == doctest::Approx(0.1 * k));
  for (const auto& r : run.invariants) CHECK_MESSAGE(r.max < 1e-9, r.name << " " << r.max);
}

TEST_CASE("covering degree") {
  const CoveringReport rep = covering_degree_estimate(Masses(1, 2, 3), 1000, 21);
  CHECK(rep.seed == 21);
  CHECK(rep.samples == 1000);
  REQUIRE(rep.histogram.size() == 1);
  CHECK(rep.histogram.at(4) == 1000);
  CHECK(rep.collision_counts == std::vector<int>{2, 2, 2});
  CHECK(rep.min_separation > 1e-6);
  CHECK(rep.to_json()["histogram"]["4"] == 1000);

  std::ostringstream os;
  write_covering_csv(os, rep);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "shape_u,shape_v,n_preimages");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == static_cast<int>(rep.rows.size()));

  CHECK_THROWS_AS(covering_degree_estimate(Masses(), 50), invalid_state);
}
