#include "threebody/checks.hpp"

#include <cmath>
#include <sstream>

namespace threebody {

namespace {

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

const cd I(0, 1);

}  // namespace

BodyState figure_eight(double spin) {
  BodyState b;
  b.q = Config3(cd(0.97000436, -0.24308753), cd(-0.97000436, 0.24308753), 0);
  const cd v3(-0.93240737, -0.86473146);
  b.p = Config3(-v3 / 2.0, -v3 / 2.0, v3);
  for (int k = 0; k < 3; ++k) b.p(k) += spin * I * b.q(k);
  return b;
}

RelState bodies_to_rel(const BodyState& b, const Masses& M) { return reduce_translations(b, M); }

// ---- 1

CriterionResult check_gradients(std::uint64_t seed) {
  CriterionResult c{1, "gradient oracle", true, "", nlohmann::json::array()};
  const Masses M(1, 2, 3);
  double worst = 0;
  std::string worst_name;
  for (const auto& name : system_names()) {
    const System S = make_system(name, M, 0.7, -1.3);
    const GradCheckReport r = fd_gradient_check(S, 100, seed);
    c.detail.push_back(r.to_json(S));
    if (!r.pass()) c.pass = false;
    if (!(r.max_rel_err <= worst)) {
      worst = r.max_rel_err;
      worst_name = name;
    }
  }
  c.summary = std::to_string(system_names().size()) + " charts x 100 states, worst " + fmt(worst) + " (" +
              worst_name + "), limit 1e-6";
  return c;
}

// ---- 2

CriterionResult check_conservation() {
  CriterionResult c{2, "conservation", true, "", nlohmann::json::object()};
  const Masses M(1, 1, 1);
  const RelState rel = bodies_to_rel(figure_eight(0.1), M);
  double worst_phys = 0, worst_zero = 0;
  for (const std::string name : {"relative", "spherical"}) {
    auto [S, y] = system_from_bodies(name, M, rel);
    const TimedRun run = run_physical_time(S, y, 10, 10);
    nlohmann::json j{{"status", to_string(run.status)}};
    for (const auto& inv : run.invariants) {
      j[inv.name] = inv.max;
      if (inv.name == "energy" || inv.name == "angular_momentum") {
        worst_phys = std::max(worst_phys, inv.max);
        if (!(inv.max < 1e-9)) c.pass = false;
      }
    }
    if (run.status != Status::completed) c.pass = false;
    c.detail[name] = j;
  }
  for (const std::string name : {"reg_sph_z", "reg_sph_x", "reg_mu_z", "reg_mu_x", "reg_affine", "reg_round"}) {
    auto [S, y] = system_from_bodies(name, M, rel);
    const TimedRun run = run_physical_time(S, y, 10, 10);
    nlohmann::json j{{"status", to_string(run.status)}};
    for (const auto& inv : run.invariants) {
      j[inv.name] = inv.max;
      if (inv.name == "zero_level") {
        worst_zero = std::max(worst_zero, inv.max);
        if (!(inv.max < 1e-9)) c.pass = false;
      }
    }
    if (run.status != Status::completed) c.pass = false;
    c.detail[name] = j;
  }
  c.summary = "span 10: energy/angular momentum drift " + fmt(worst_phys) + ", zero-level drift " + fmt(worst_zero) +
              ", limit 1e-9";
  return c;
}

// ---- 3

namespace {

struct ChartKey {
  std::string name;
  TimeScale ts;
  std::string label() const { return name.rfind("blowup_", 0) == 0 ? name + "/" + ts.name() : name; }
  bool rescaled() const { return name.rfind("reg_", 0) == 0 || name.rfind("blowup_", 0) == 0; }
};

}  // namespace

CriterionResult check_chart_equivalence() {
  CriterionResult c{3, "chart equivalence", true, "", nlohmann::json::array()};
  const TimeScale f1 = TimeScale::f1(), f2 = TimeScale::f2();
  const std::vector<std::pair<ChartKey, ChartKey>> pairs = {
      {{"relative", f1}, {"jacobi", f1}},
      {{"relative", f1}, {"spherical", f1}},
      {{"spherical", f1}, {"reduced", f1}},
      {{"reduced", f1}, {"affine", f1}},
      {{"reduced", f1}, {"round", f1}},
      {{"affine", f1}, {"round", f1}},
      {{"spherical", f1}, {"reg_sph_z", f1}},
      {{"reg_sph_z", f1}, {"reg_sph_x", f1}},
      {{"reduced", f1}, {"reg_mu_z", f1}},
      {{"reg_mu_z", f1}, {"reg_mu_x", f1}},
      {{"reg_mu_x", f1}, {"reg_affine", f1}},
      {{"reg_mu_z", f1}, {"reg_round", f1}},
      {{"spherical", f1}, {"blowup_sph", f1}},
      {{"reduced", f1}, {"blowup_reduced", f1}},
      {{"reduced", f1}, {"blowup_reduced", f2}},
      {{"reg_affine", f1}, {"blowup_affine", f1}},
      {{"reg_round", f1}, {"blowup_round", f1}},
      {{"blowup_round", f1}, {"blowup_round", f2}},
  };
  struct Orbit {
    std::string name;
    Masses M;
    RelState rel;
  };
  std::vector<Orbit> orbits;
  orbits.push_back({"figure_eight_spin", Masses(1, 1, 1), bodies_to_rel(figure_eight(0.1), Masses(1, 1, 1))});
  {
    // unequal-mass Lagrange triangle spun 5% faster than the relative equilibrium
    const Masses M(1, 2, 3);
    BodyState b;
    b.q = Config3(1, omega, std::conj(omega));
    const cd com = (M.m1 * b.q(0) + M.m2 * b.q(1) + M.m3 * b.q(2)) / M.m;
    const double a = std::sqrt(3.0), w = 1.05 * std::sqrt(M.m / (a * a * a));
    const Eigen::Vector3d m(M.m1, M.m2, M.m3);
    for (int k = 0; k < 3; ++k) {
      b.q(k) -= com;
      b.p(k) = m(k) * w * I * b.q(k);
    }
    orbits.push_back({"lagrange_unequal", M, bodies_to_rel(b, M)});
  }
  const double span = 5;
  const int n = 50;
  double worst_plain = 0, worst_rescaled = 0;
  for (const auto& orb : orbits) {
    std::map<std::string, TimedRun> runs;
    std::map<std::string, System> systems;
    auto get = [&](const ChartKey& k) -> const TimedRun& {
      const std::string key = k.label();
      if (!runs.count(key)) {
        auto [S, y] = system_from_bodies(k.name, orb.M, orb.rel, k.ts);
        runs[key] = run_physical_time(S, y, span, n);
        systems.emplace(key, S);
      }
      return runs[key];
    };
    for (const auto& [a, b] : pairs) {
      const TimedRun& ra = get(a);
      const TimedRun& rb = get(b);
      const System& Sa = systems.at(a.label());
      const System& Sb = systems.at(b.label());
      double dist = 0;
      int bad = 0;
      const bool done = ra.status == Status::completed && rb.status == Status::completed;
      for (size_t j = 0; j < std::min(ra.states.size(), rb.states.size()); ++j) {
        try {
          const Vec fa = reduced_features(Sa.to_reduced(ra.states[j]));
          const Vec fb = reduced_features(Sb.to_reduced(rb.states[j]));
          dist = std::max(dist, (fa - fb).cwiseAbs().maxCoeff());
        } catch (const std::exception&) {
          ++bad;
        }
      }
      const bool rescaled = a.rescaled() || b.rescaled();
      const double limit = rescaled ? 1e-6 : 1e-7;
      const bool ok = done && bad == 0 && dist < limit;
      if (!ok) c.pass = false;
      (rescaled ? worst_rescaled : worst_plain) = std::max(rescaled ? worst_rescaled : worst_plain, dist);
      c.detail.push_back({{"orbit", orb.name},
                          {"a", a.label()},
                          {"b", b.label()},
                          {"max_distance", dist},
                          {"limit", limit},
                          {"out_of_chart", bad},
                          {"completed", done},
                          {"pass", ok}});
    }
  }
  c.summary = std::to_string(pairs.size()) + " chart pairs x " + std::to_string(orbits.size()) +
              " orbits over span 5: " + fmt(worst_plain) + " (limit 1e-7), rescaled " + fmt(worst_rescaled) +
              " (limit 1e-6)";
  return c;
}

// ---- 4

BodyState isosceles_collision_orbit() {
  BodyState b;
  b.q = Config3(cd(-1, 0), cd(1, 0), cd(0, 3));
  b.p = Config3(cd(0.1, 0.2), cd(-0.1, 0.2), cd(0, -0.4));
  return b;
}

CriterionResult check_regularization() {
  CriterionResult c{4, "regularized collision transit", true, "", nlohmann::json::object()};
  const Masses M(1, 1, 1);
  const RelState rel = bodies_to_rel(isosceles_collision_orbit(), M);
  c.detail["angular_momentum"] = angular_momentum(rel);

  auto [R, y_first] = system_from_bodies("reg_affine", M, rel);
  const int d = R.dim;
  // the binary collision happens near t = 1.8 and recurs near t = 3 at the other end of the chart
  const double horizon = 2.5;
  VectorField f = [rhs = R.rhs, rate = R.time_rate, d](double, const Vec& x) {
    const Vec y = x.head(d);
    Vec o(d + 1);
    o << rhs(y), rate(y);
    return o;
  };
  IntegratorOptions o;
  o.rel_tol = o.abs_tol = 1e-12;
  o.events.push_back({"rho12_min", [g = R.events[0].fn, d](double t, const Vec& x) { return g(t, x.head(d)); },
                      Direction::up, EventAction::record});
  o.events.push_back({"horizon", [horizon, d](double, const Vec& x) { return x(d) - horizon; }, Direction::up,
                      EventAction::halt});

  struct Transit {
    Vec y0, yc;
    double tc = NAN, rho12 = INFINITY, max_deriv = INFINITY;
    Status status = Status::completed;
    unsigned branch = 0;
  };
  // the affine chart sees binary collision 12 at z = 0 and at z = infinity; keep the lift that meets it at 0
  Transit best;
  const RedState red = to_reduced(rel, M);
  for (unsigned b = 0; b < 8; ++b) {
    Transit t;
    try {
      t.y0 = pack(quad_to_affine(cone_to_quad(reduced_to_cone(red, b, R.h))));
    } catch (const std::exception&) {
      continue;
    }
    t.branch = b;
    Vec z0(d + 1);
    z0 << t.y0, 0.0;
    const Trajectory tr = integrate(f, z0, 0, 1e6, o);
    t.status = tr.status;
    for (const auto& e : tr.events) {
      if (e.label != "rho12_min") continue;
      const Eigen::Vector3d rho = affine_rho(e.y(2), e.y(3));
      if (rho(0) / rho.sum() < t.rho12) {
        t.rho12 = rho(0) / rho.sum();
        t.tc = e.y(d);
        t.yc = e.y.head(d);
      }
    }
    t.max_deriv = 0;
    for (const auto& x : tr.states) t.max_deriv = std::max(t.max_deriv, R.rhs(x.head(d)).cwiseAbs().maxCoeff());
    if (t.yc.size() == d) t.max_deriv = std::max(t.max_deriv, R.rhs(t.yc).cwiseAbs().maxCoeff());
    if (!std::isfinite(t.max_deriv)) t.max_deriv = INFINITY;
    if (t.max_deriv < best.max_deriv) best = t;
  }
  if (best.yc.size() != d) {
    c.pass = false;
    c.summary = "no rho12 minimum found on any lift";
    return c;
  }
  const Vec yr = best.y0;
  const double tc = best.tc, rho12 = best.rho12, max_deriv = best.max_deriv;
  const bool transit = best.status == Status::halted && max_deriv < 1e3 && rho12 < 1e-10;
  c.detail["branch"] = best.branch;
  (void)y_first;
  c.detail["collision_time"] = tc;
  c.detail["min_rho12_normalized"] = rho12;
  c.detail["max_derivative"] = max_deriv;
  c.detail["regularized_status"] = to_string(best.status);

  // agreement before the collision
  const System rel_sys = make_system("relative", M);
  const CrossChartReport before = cross_chart_compare(rel_sys, rel_sys.from_rel(rel), R, yr, 0.9 * tc, 30);
  c.detail["before"] = before.to_json();

  // agreement after the collision, restarting an unregularized chart off-collision
  const TimedRun after_run = run_physical_time(R, yr, tc + 0.2, 1);
  CrossChartReport after;
  if (after_run.status == Status::completed) {
    const Vec ya = after_run.states.back();
    RedState red = R.to_reduced(ya);
    normalize_gauge(red, M);
    const System U = make_system("reduced", M, R.mu, R.h);
    after = cross_chart_compare(U, pack(red), R, ya, 0.4, 20);
  }
  c.detail["after"] = after.to_json();

  // the designed contrast
  IntegratorOptions uo = rel_sys.options(1e-12);
  uo.keep_steps = false;
  const Trajectory ut = integrate(rel_sys.field(), rel_sys.from_rel(rel), 0, horizon, uo);
  c.detail["unregularized_status"] = to_string(ut.status);
  c.detail["unregularized_t_end"] = ut.t_end();
  c.detail["unregularized_message"] = ut.message;
  const bool contrast = ut.status == Status::step_underflow && std::abs(ut.t_end() - tc) < 1e-3;

  const bool match = before.completed && before.out_of_chart == 0 && before.max_distance < 1e-6 && after.completed &&
                     after.out_of_chart == 0 && after.max_distance < 1e-6;
  c.pass = transit && match && contrast;
  c.summary = "rho12 min " + fmt(rho12) + " at t=" + fmt(tc) + ", max |rhs| " + fmt(max_deriv) +
              ", off-collision match " + fmt(std::max(before.max_distance, after.max_distance)) +
              " (limit 1e-6), unregularized: " + to_string(ut.status) + " at t=" + fmt(ut.t_end());
  return c;
}

// ---- 5

CriterionResult check_blowup() {
  CriterionResult c{5, "blow-up regression", true, "", nlohmann::json::object()};
  const Masses M(1, 1, 1);
  const TimeScale f1 = TimeScale::f1(), f2 = TimeScale::f2();

  // homothetic collapse
  const double h = -1;
  const System B = make_system("blowup_round", M, 0, h, f1);
  BlownState b;
  b.r = 1e-3;
  b.mu_t = 0;
  b.q = Eigen::Vector3d::Constant(1 / std::sqrt(3.0));
  b.alpha = Eigen::Vector3d::Zero();
  b.v = energy_v(b, form_reg_round(M, h), f1, true);
  const Trajectory tr = integrate(B.field(), pack(b), 0, 50, B.options(1e-12));
  bool decreasing = true, positive = true, v_monotone = true;
  for (size_t k = 1; k < tr.states.size(); ++k) {
    if (!(tr.states[k](0) < tr.states[k - 1](0))) decreasing = false;
    if (!(tr.states[k](0) > 0)) positive = false;
    if (tr.states[k - 1](1) < 0 && !(tr.states[k](1) <= tr.states[k - 1](1))) v_monotone = false;
  }
  const double v_final = tr.final_state()(1);
  const double err = std::abs(v_final + 2.4494897);
  const auto inv = monitor_invariants(tr);
  nlohmann::json hj{{"v_final", v_final},         {"r_final", tr.final_state()(0)}, {"steps", tr.accepted},
                    {"r_decreasing", decreasing}, {"r_positive", positive},         {"v_monotone", v_monotone},
                    {"status", to_string(tr.status)}};
  for (const auto& i : inv) hj[i.name] = i.max;
  c.detail["homothetic_f1"] = hj;
  const bool homothetic = tr.status == Status::completed && err < 1e-4 && decreasing && positive;

  // escape orbits with the bounded time scale
  BodyState e = figure_eight(0.1);
  e.p *= 2.0;
  const RelState rel = bodies_to_rel(e, M);
  auto [E, ye] = system_from_bodies("blowup_round", M, rel, f2);
  IntegratorOptions eo = E.options(1e-10);
  eo.keep_steps = false;
  const Trajectory et = integrate(E.field(), ye, 0, 1000, eo);
  const bool escape_finite = et.status == Status::completed && et.final_state().allFinite();
  nlohmann::json ej{{"energy", E.h}, {"status", to_string(et.status)}, {"r_final", et.final_state()(0)},
                    {"v_final", et.final_state()(1)}, {"steps", et.accepted}};
  for (const auto& i : monitor_invariants(et)) ej[i.name] = i.max;
  c.detail["escape_f2"] = ej;

  const System H = make_system("blowup_round", M, 0, 1.0, f2);
  BlownState x;
  x.r = 1;
  x.mu_t = 0;
  x.q = Eigen::Vector3d::Constant(1 / std::sqrt(3.0));
  x.alpha = Eigen::Vector3d::Zero();
  x.v = energy_v(x, form_reg_round(M, 1.0), f2, false);
  IntegratorOptions ho = H.options(1e-10);
  ho.keep_steps = false;
  const Trajectory ht = integrate(H.field(), pack(x), 0, 1000, ho);
  const bool homothetic_escape = ht.status == Status::completed && ht.final_state().allFinite();
  c.detail["homothetic_escape_f2"] = {{"status", to_string(ht.status)}, {"r_final", ht.final_state()(0)}};

  c.pass = homothetic && escape_finite && homothetic_escape;
  c.summary = "f1 collapse v_final=" + fmt(v_final) + " |v+sqrt6|=" + fmt(err) + " (limit 1e-4), r decreasing " +
              (decreasing && positive ? "yes" : "no") + "; f2 escape over 1000: " +
              (escape_finite && homothetic_escape ? "finite" : "not finite") + " (r=" + fmt(et.final_state()(0)) + ")";
  return c;
}

// ---- 6

CriterionResult check_geometry(std::uint64_t seed) {
  CriterionResult c{6, "geometry identities", true, "", nlohmann::json::object()};
  const Masses M(1, 2, 3);
  Rng g(seed);
  std::normal_distribution<double> N;
  auto crandn = [&] {
    const double a = N(g);
    return cd(a, N(g));
  };
  auto cone_point = [&] {
    const Config3 z = quad_param(Pair2(crandn(), crandn()));
    return Config3(z / z.norm());
  };
  auto fs_mass = [&](const Config3& X, const Config3& U) {
    const double x2 = mass_norm_sq(X, M);
    return (mass_norm_sq(U, M) * x2 - std::norm(mass_inner(X, U, M))) / (x2 * x2);
  };
  auto fs_euclid = [](const Config3& z, const Config3& V) {
    const double z2 = z.squaredNorm();
    return (V.squaredNorm() * z2 - std::norm(z.dot(V))) / (z2 * z2);
  };
  double pull = 0, rho_err = 0, orth = 0, det = 0;
  for (int i = 0; i < 100; ++i) {
    const Config3 z = cone_point();
    Config3 V(crandn(), crandn(), crandn());
    V -= ((z.transpose() * V)(0) / z.squaredNorm()) * z.conjugate();
    const Config3 X = z.cwiseProduct(z), U = 2.0 * z.cwiseProduct(V);
    const double lhs = fs_mass(X, U), rhs = lambda_conformal(z, M) * fs_euclid(z, V);
    pull = std::max(pull, std::abs(lhs - rhs) / std::abs(lhs));

    const Eigen::Vector3d rz = rho_of(z), rc = rho_of_c(Eigen::Vector3d(c_map(z)));
    rho_err = std::max(rho_err, (rz / rz.sum() - rc / rc.sum()).cwiseAbs().maxCoeff());

    const Eigen::Matrix3d A = so3_frame(z);
    orth = std::max(orth, (A.transpose() * A - Eigen::Matrix3d::Identity()).norm());
    det = std::max(det, std::abs(A.determinant() - 1));
  }
  double tau_max = 0, tau_min = 1;
  std::uniform_real_distribution<double> U01(0, 1);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d r(U01(g), U01(g), U01(g));
    const double t = rho_tau(r);
    tau_max = std::max(tau_max, t);
    tau_min = std::min(tau_min, t);
  }
  const double tau_eq = rho_tau(Eigen::Vector3d(1, 1, 1));
  const bool tau_ok = tau_min >= 0 && tau_max <= 1.0 / 27 && std::abs(tau_eq - 1.0 / 27) < 1e-17;

  const RoundChart Req = RoundChart::equilateral(Masses(1, 1, 1));
  double kappa = 0;
  for (int i = 0; i < 100; ++i) {
    Eigen::Vector3d w(N(g), N(g), N(g));
    kappa = std::max(kappa, std::abs(Req.kappa(w.normalized()) - 1));
  }
  c.detail = {{"seed", seed},       {"lambda_pullback", pull}, {"rho_c_vs_z", rho_err},     {"frame_orthogonality", orth},
              {"frame_det", det},   {"tau_max", tau_max},      {"tau_min", tau_min},        {"tau_equilateral", tau_eq},
              {"kappa_dev", kappa}};
  c.pass = pull < 1e-10 && rho_err < 1e-12 && orth < 1e-12 && det < 1e-12 && tau_ok && kappa < 1e-12;
  c.summary = "pullback " + fmt(pull) + ", rho(c) " + fmt(rho_err) + ", |A^T A - I| " + fmt(orth) + ", |det-1| " +
              fmt(det) + ", tau in [0,1/27] " + (tau_ok ? "yes" : "no") + ", |kappa-1| " + fmt(kappa);
  return c;
}

// ---- 7

CriterionResult check_covering(std::uint64_t seed) {
  CriterionResult c{7, "covering degree", true, "", nlohmann::json::object()};
  const CoveringReport rep = covering_degree_estimate(Masses(1, 1, 1), 1000, seed);
  c.detail = rep.to_json();
  const int fours = rep.histogram.count(4) ? rep.histogram.at(4) : 0;
  bool coll = rep.collision_counts.size() == 3;
  for (int k : rep.collision_counts) coll = coll && k == 2;
  c.pass = fours == 1000 && coll && rep.min_separation > 1e-6;
  std::string cc;
  for (int k : rep.collision_counts) cc += (cc.empty() ? "" : ",") + std::to_string(k);
  c.summary = std::to_string(fours) + "/1000 shapes with 4 preimages, collision shapes " + cc +
              ", min separation " + fmt(rep.min_separation);
  return c;
}

// ---- 8

CriterionResult check_potential() {
  CriterionResult c{8, "potential landscape", true, "", nlohmann::json::object()};
  const int res = 183;
  std::string summary;
  for (const Masses& M : {Masses(1, 1, 1), Masses(1, 2, 10)}) {
    const bool equal = M.m1 == M.m2 && M.m2 == M.m3;
    const GridCounts gc = count_grid_extrema(potential_grid(GridChart::round, res, M), res);
    const RoundChart R = RoundChart::equilateral(M);
    const auto cps = find_critical_points(R);
    int mins = 0, saddles = 0;
    double min_dev = 0, saddle_dev = 0, grad = 0;
    for (const auto& p : cps) {
      grad = std::max(grad, p.grad_norm);
      if (p.index == 0) {
        ++mins;
        min_dev = std::max(min_dev, std::abs(p.value - 3));
      } else if (p.index == 1) {
        ++saddles;
        saddle_dev = std::max(saddle_dev, std::abs(p.value - 5 / std::sqrt(2.0)));
      }
    }
    const bool grid_ok = gc.minima == 2 && gc.saddles == 3 && gc.maxima == 3;
    const bool cp_ok = int(cps.size()) == 5 && mins == 2 && saddles == 3 && grad < 1e-8 &&
                       (!equal || (min_dev < 1e-6 && saddle_dev < 1e-6));
    if (!(grid_ok && cp_ok)) c.pass = false;
    const std::string key = equal ? "equal" : "1,2,10";
    nlohmann::json j{{"grid_minima", gc.minima}, {"grid_saddles", gc.saddles}, {"grid_collisions", gc.maxima},
                     {"critical_points", cps.size()}, {"max_grad", grad}};
    if (equal) {
      j["minimum_value_dev"] = min_dev;
      j["saddle_value_dev"] = saddle_dev;
    }
    c.detail[key] = j;
    summary += (summary.empty() ? "" : "; ") + key + ": " + std::to_string(gc.minima) + " min/" +
               std::to_string(gc.saddles) + " saddle/" + std::to_string(gc.maxima) + " collision on grid, " +
               std::to_string(cps.size()) + " critical points";
    if (equal) summary += " (values off by " + fmt(std::max(min_dev, saddle_dev)) + ")";
  }
  c.summary = summary;
  return c;
}

// ---- 9

CriterionResult check_kepler() {
  CriterionResult c{9, "Kepler Levi-Civita", true, "", nlohmann::json::object()};
  const KeplerLC K{-1.0, 1.0};
  const cd z0(0.8, 0), eta0(0, 0.6);
  VectorField f = [K](double, const Vec& y) {
    const auto [dz, de] = K.rhs(cd(y(0), y(1)), cd(y(2), y(3)));
    Vec o(4);
    o << dz.real(), dz.imag(), de.real(), de.imag();
    return o;
  };
  IntegratorOptions o;
  o.invariants.push_back({"kepler_energy",
                          [K](const Vec& y) {
                            const cd z(y(0), y(1)), eta(y(2), y(3));
                            return K.kepler_energy(KeplerLC::position(z), KeplerLC::momentum(z, eta)) - K.h;
                          },
                          false});
  o.invariants.push_back({"zero_level", [K](const Vec& y) { return K.hamiltonian(cd(y(0), y(1)), cd(y(2), y(3))); },
                          false});
  o.events.push_back({"re_z_up", [](double, const Vec& y) { return y(0); }, Direction::up, EventAction::record});
  Vec y0(4);
  y0 << z0.real(), z0.imag(), eta0.real(), eta0.imag();
  const Trajectory tr = integrate(f, y0, 0, 6 * M_PI, o);
  std::vector<double> ups;
  for (const auto& e : tr.events) ups.push_back(e.t);
  double period = NAN;
  if (ups.size() >= 2) period = ups[1] - ups[0];
  const auto mx = tr.max_residuals();
  c.detail = {{"period", period}, {"crossings", ups}, {"energy_residual", mx[0]}, {"zero_level", mx[1]}};
  c.pass = std::abs(period - 2 * M_PI) < 1e-6 && mx[0] < 1e-9;
  c.summary = "period " + std::to_string(period) + " (2pi +- 1e-6, off by " + fmt(std::abs(period - 2 * M_PI)) +
              "), Kepler energy residual " + fmt(mx[0]) + " (limit 1e-9)";
  return c;
}

std::vector<std::string> suite_names() {
  return {"gradients", "conservation", "charts", "regularization", "blowup",
          "geometry",  "covering",     "potential", "kepler", "all"};
}

std::vector<CriterionResult> run_suite(const std::string& suite, std::uint64_t seed) {
  std::vector<CriterionResult> out;
  const bool all = suite == "all";
  if (all || suite == "gradients") out.push_back(check_gradients(seed));
  if (all || suite == "conservation") out.push_back(check_conservation());
  if (all || suite == "charts") out.push_back(check_chart_equivalence());
  if (all || suite == "charts" || suite == "regularization") out.push_back(check_regularization());
  if (all || suite == "blowup") out.push_back(check_blowup());
  if (all || suite == "geometry") out.push_back(check_geometry(seed));
  if (all || suite == "covering") out.push_back(check_covering(seed));
  if (all || suite == "potential") out.push_back(check_potential());
  if (all || suite == "kepler") out.push_back(check_kepler());
  if (out.empty()) throw invalid_state("unknown check suite '" + suite + "'");
  return out;
}

}  // namespace threebody
