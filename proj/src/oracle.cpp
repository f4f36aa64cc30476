#include "threebody/oracle.hpp"

#include <cmath>
#include <ostream>

#include "threebody/regularize.hpp"

namespace threebody {

namespace {

std::string blown_base(const std::string& name) {
  if (name == "blowup_sph") return "spherical";
  if (name == "blowup_reduced") return "reduced";
  if (name == "blowup_affine") return "reg_affine";
  if (name == "blowup_round") return "reg_round";
  return {};
}


Vec expected_hamiltonian(const System& S, const Vec& y, double h) {
  Vec e = S.curvature(y);
  Vec yp = y, ym = y;
  auto d = [&](int i) {
    yp(i) = y(i) + h;
    ym(i) = y(i) - h;
    const double g = (S.hamiltonian(yp) - S.hamiltonian(ym)) / (2 * h);
    yp(i) = ym(i) = y(i);
    return g;
  };
  for (auto [q, p] : S.canonical) {
    e(q) += d(p);
    e(p) -= d(q);
  }
  return e;
}

}  // namespace

GradCheckReport fd_gradient_check(const System& S, int n, std::uint64_t seed, double step) {
  return fd_gradient_check(S, S.rhs, n, seed, step);
}

GradCheckReport fd_gradient_check(const System& S, const std::function<Vec(const Vec&)>& rhs, int n,
                                  std::uint64_t seed, double step) {
  GradCheckReport rep;
  rep.system = S.name;
  rep.seed = seed;
  rep.step = step;
  Rng g(seed);

  const std::string base_name = blown_base(S.name);
  std::optional<System> base;
  if (!base_name.empty()) base = make_system(base_name, S.M, S.mu, S.h, S.ts);
  const int n_q = base ? (S.dim - 3) / 2 : 0;

  // blow-down with the recovered angular momentum appended
  auto down = [&](const Vec& y) {
    double mu = 0;
    const Vec x = blow_down(unpack_blown(y, n_q), S.ts, &mu);
    Vec o(x.size() + 1);
    o << x, mu;
    return o;
  };

  rep.component_max.assign(base ? S.dim - 1 : S.dim, 0.0);
  int attempts = 0;
  while (rep.samples < n && attempts < 20 * n) {
    ++attempts;
    Vec y, got, exp;
    try {
      y = S.sample(g);
      if (base) {
        const Vec v = rhs(y);
        got = (down(y + step * v) - down(y - step * v)) / (2 * step);
        const Vec x = down(y);
        exp = Vec::Zero(x.size());
        exp.head(x.size() - 1) = S.ts.f(y(0)) * base->rhs(x.head(x.size() - 1));
      } else {
        got = rhs(y);
        exp = expected_hamiltonian(S, y, step);
      }
    } catch (const std::exception&) {
      ++rep.skipped;
      continue;
    }
    const double scale = std::max(exp.cwiseAbs().maxCoeff(), 1e-300);
    const Vec err = (got - exp).cwiseAbs() / scale;
    for (Eigen::Index i = 0; i < err.size() && i < Eigen::Index(rep.component_max.size()); ++i)
      rep.component_max[i] = std::max(rep.component_max[i], err(i));
    const double e = err.maxCoeff();
    if (!(e <= rep.max_rel_err)) {
      rep.max_rel_err = std::isnan(e) ? INFINITY : e;
      rep.worst_state = y;
    }
    ++rep.samples;
  }
  return rep;
}

nlohmann::json GradCheckReport::to_json(const System& sys) const {
  nlohmann::json j;
  j["system"] = system;
  j["seed"] = seed;
  j["samples"] = samples;
  j["skipped"] = skipped;
  j["step"] = step;
  j["max_rel_err"] = max_rel_err;
  j["pass"] = pass();
  if (worst_state.size() == sys.dim) j["worst_state"] = state_to_json(sys, worst_state);
  j["component_max"] = component_max;
  return j;
}

TimedRun run_physical_time(const System& S, const Vec& y0, double span, int n, double tol) {
  const int d = S.dim;
  Vec z(d + 1);
  z << y0, 0.0;
  auto rhs = S.rhs;
  auto rate = S.time_rate;
  VectorField f = [rhs, rate, d](double, const Vec& x) {
    const Vec y = x.head(d);
    Vec o(d + 1);
    o << rhs(y), rate(y);
    return o;
  };
  IntegratorOptions o;
  o.rel_tol = o.abs_tol = tol;
  o.keep_steps = false;
  if (S.gauge) {
    o.gauge = [gauge = S.gauge, d](Vec& x) {
      Vec y = x.head(d);
      gauge(y);
      x.head(d) = y;
    };
  }
  for (const auto& inv : S.invariants)
    o.invariants.push_back({inv.name, [fn = inv.fn, d](const Vec& x) { return fn(x.head(d)); }, inv.drift});
  for (int j = 1; j <= n; ++j) {
    const double tj = span * j / n;
    o.events.push_back({std::to_string(j), [tj, d](double, const Vec& x) { return x(d) - tj; }, Direction::up,
                        j == n ? EventAction::halt : EventAction::record});
  }
  TimedRun run;
  run.t.push_back(0);
  run.states.push_back(y0);
  // independent-variable horizon generous enough for tau <= 1/27 and the blow-up clocks
  const Trajectory tr = integrate(f, z, 0, 1e6 * span, o);
  run.status = tr.status;
  run.message = tr.message;
  run.invariants = monitor_invariants(tr);
  run.steps = tr.accepted;
  for (const auto& ev : tr.events) {
    if (ev.label != std::to_string(run.t.size())) continue;
    run.t.push_back(span * double(run.t.size()) / n);
    run.states.push_back(ev.y.head(d));
  }
  if (tr.status == Status::halted && int(run.t.size()) == n + 1) run.status = Status::completed;
  return run;
}

Vec reduced_features(const RedState& s) {
  const Config3 X = s.X / s.X.norm();
  const CoConfig3 Z = (s.Z - CoConfig3::Constant(s.Z.mean())) * s.X.norm();
  const Eigen::Matrix3cd P = X * X.adjoint(), Q = Z * X.adjoint();
  Vec f(3 + 36);
  f(0) = s.r;
  f(1) = s.p_r;
  f(2) = s.mu;
  for (int i = 0; i < 9; ++i) {
    f(3 + 2 * i) = P(i).real();
    f(4 + 2 * i) = P(i).imag();
    f(21 + 2 * i) = Q(i).real();
    f(22 + 2 * i) = Q(i).imag();
  }
  return f;
}

CrossChartReport cross_chart_compare(const System& A, const Vec& ya, const System& B, const Vec& yb, double span,
                                     int n, double tol) {
  CrossChartReport rep;
  rep.a = A.name;
  rep.b = B.name;
  rep.span = span;
  const TimedRun ra = run_physical_time(A, ya, span, n, tol);
  const TimedRun rb = run_physical_time(B, yb, span, n, tol);
  rep.completed = ra.status == Status::completed && rb.status == Status::completed;
  if (!rep.completed) rep.message = A.name + ": " + ra.message + "; " + B.name + ": " + rb.message;
  const size_t m = std::min(ra.states.size(), rb.states.size());
  for (size_t j = 0; j < m; ++j) {
    try {
      const Vec fa = reduced_features(A.to_reduced(ra.states[j]));
      const Vec fb = reduced_features(B.to_reduced(rb.states[j]));
      rep.max_distance = std::max(rep.max_distance, (fa - fb).cwiseAbs().maxCoeff());
      ++rep.samples;
    } catch (const std::exception& e) {
      ++rep.out_of_chart;
      if (rep.message.empty()) rep.message = "sample " + std::to_string(j) + ": " + e.what();
    }
  }
  return rep;
}

nlohmann::json CrossChartReport::to_json() const {
  return {{"a", a},
          {"b", b},
          {"span", span},
          {"samples", samples},
          {"max_distance", max_distance},
          {"out_of_chart", out_of_chart},
          {"completed", completed},
          {"message", message}};
}

CoveringReport covering_degree_estimate(const Masses& M, int n, std::uint64_t seed) {
  if (n < 100) throw invalid_state("covering: at least 100 samples");
  const RoundChart R = RoundChart::equilateral(M);
  CoveringReport rep;
  rep.seed = seed;
  rep.samples = n;
  rep.min_separation = INFINITY;
  Rng g(seed);
  std::normal_distribution<double> N;
  auto separation = [](const Config3& a, const Config3& b) {
    const double c = std::norm(a.dot(b)) / (a.squaredNorm() * b.squaredNorm());
    return std::sqrt(std::max(0.0, 1 - c));
  };
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d w(N(g), N(g), N(g));
    w.normalize();
    const auto pre = lemaitre_preimages(R.shape(w));
    const int k = int(pre.size());
    ++rep.histogram[k];
    rep.rows.push_back({std::atan2(w(1), w(0)), std::asin(std::clamp(w(2), -1.0, 1.0)), k});
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) rep.min_separation = std::min(rep.min_separation, separation(pre[a], pre[b]));
  }
  for (const Config3& X : {Config3(0, 1, -1), Config3(1, 0, -1), Config3(1, -1, 0)})
    rep.collision_counts.push_back(int(lemaitre_preimages(X).size()));
  return rep;
}

nlohmann::json CoveringReport::to_json() const {
  nlohmann::json h = nlohmann::json::object();
  for (auto [k, c] : histogram) h[std::to_string(k)] = c;
  return {{"seed", seed},
          {"samples", samples},
          {"histogram", h},
          {"collision_counts", collision_counts},
          {"min_separation", min_separation}};
}

void write_covering_csv(std::ostream& os, const CoveringReport& rep) {
  os << "shape_u,shape_v,n_preimages\n";
  os.precision(17);
  for (const auto& r : rep.rows) os << r.u << ',' << r.v << ',' << r.n << '\n';
}

}  // namespace threebody
