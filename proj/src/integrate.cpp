#include "threebody/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace threebody {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double beta = 0.04, expo1 = 0.2 - beta * 0.75, safe = 0.9, facc1 = 1 / 0.2, facc2 = 1 / 10.0;

struct Evaluator {
  const VectorField& f;
  long* count;
  // nonfinite or domain errors come back as an empty vector
  Vec operator()(double t, const Vec& y) const {
    ++*count;
    try {
      Vec d = f(t, y);
      if (!d.allFinite()) return Vec();
      return d;
    } catch (const std::domain_error&) {
      return Vec();
    }
  }
};

double rms(const Vec& e, const Vec& y0, const Vec& y1, double atol, double rtol) {
  double s = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double sk = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    s += (e(i) / sk) * (e(i) / sk);
  }
  return std::sqrt(s / double(e.size()));
}

double initial_step(const Evaluator& F, double t, const Vec& y, const Vec& f0, double dir, double hmax,
                    const IntegratorOptions& o) {
  Vec sk = (o.abs_tol + o.rel_tol * y.array().abs()).matrix();
  const double dn0 = std::sqrt((y.array() / sk.array()).square().mean());
  const double dn1 = std::sqrt((f0.array() / sk.array()).square().mean());
  double h = (dn0 < 1e-10 || dn1 < 1e-10) ? 1e-6 : 0.01 * dn0 / dn1;
  h = std::min(h, hmax);
  const Vec f1 = F(t + dir * h, y + dir * h * f0);
  if (f1.size() == 0) return h * 1e-3;
  const double dn2 = std::sqrt(((f1 - f0).array() / sk.array()).square().mean()) / h;
  const double der = std::max(dn1, dn2);
  const double h1 = der <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der, 0.2);
  return std::min({100 * h, h1, hmax});
}

bool crosses(double ga, double gb, Direction d) {
  if (!(std::isfinite(ga) && std::isfinite(gb))) return false;
  switch (d) {
    case Direction::up: return ga < 0 && gb >= 0;
    case Direction::down: return ga > 0 && gb <= 0;
    default: return (ga < 0 && gb >= 0) || (ga > 0 && gb <= 0);
  }
}

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::completed: return "completed";
    case Status::halted: return "halted";
    case Status::step_underflow: return "step_underflow";
    case Status::max_steps: return "max_steps";
    case Status::guarded: return "guarded";
    case Status::invalid_initial: return "invalid_initial";
  }
  return "unknown";
}

Vec DenseSegment::eval(double t) const {
  const double th = (t - t0) / h, th1 = 1 - th;
  return c[0] + th * (c[1] + th1 * (c[2] + th * (c[3] + th1 * c[4])));
}

Vec Trajectory::dense(double t) const {
  if (segments.empty()) throw std::out_of_range("dense: trajectory has no stored steps");
  const bool fwd = segments.front().h > 0;
  auto it = std::lower_bound(segments.begin(), segments.end(), t, [fwd](const DenseSegment& s, double x) {
    return fwd ? s.t0 + s.h < x : s.t0 + s.h > x;
  });
  if (it == segments.end()) --it;
  return it->eval(t);
}

std::vector<double> Trajectory::max_residuals() const {
  if (residual_max.size() == invariant_names.size()) return residual_max;
  std::vector<double> m(invariant_names.size(), 0.0);
  for (const auto& row : residuals)
    for (size_t k = 0; k < row.size(); ++k) m[k] = std::max(m[k], std::isfinite(row[k]) ? row[k] : INFINITY);
  return m;
}

double refine_event(const DenseSegment& seg, const std::function<double(double, const Vec&)>& g, double ta, double tb,
                    double tol) {
  double ga = g(ta, seg.eval(ta));
  for (int it = 0; it < 200 && std::abs(tb - ta) > tol; ++it) {
    const double tm = 0.5 * (ta + tb);
    const double gm = g(tm, seg.eval(tm));
    if ((ga < 0) == (gm < 0) && gm != 0) {
      ta = tm;
      ga = gm;
    } else {
      tb = tm;
    }
  }
  return tb;
}

Trajectory integrate(const VectorField& f, const Vec& y0, double t0, double t1, const IntegratorOptions& o) {
  Trajectory tr;
  for (const auto& inv : o.invariants) tr.invariant_names.push_back(inv.name);
  Evaluator F{f, &tr.evaluations};

  if (!y0.allFinite()) {
    tr.status = Status::invalid_initial;
    tr.message = "initial state is not finite";
    return tr;
  }
  Vec y = y0;
  if (o.gauge) o.gauge(y);

  std::vector<double> inv0;
  for (const auto& inv : o.invariants) inv0.push_back(inv.fn(y));
  auto log_row = [&](const Vec& s) {
    std::vector<double> row;
    for (size_t k = 0; k < o.invariants.size(); ++k) {
      const double g = o.invariants[k].fn(s);
      row.push_back(o.invariants[k].drift ? std::abs(g - inv0[k]) : std::abs(g));
    }
    return row;
  };

  tr.residual_max.assign(o.invariants.size(), 0.0);
  auto note_max = [&](const std::vector<double>& row) {
    for (size_t k = 0; k < row.size(); ++k)
      tr.residual_max[k] = std::max(tr.residual_max[k], std::isfinite(row[k]) ? row[k] : INFINITY);
  };

  double t = t0;
  tr.times.push_back(t);
  tr.states.push_back(y);
  tr.residuals.push_back(log_row(y));
  note_max(tr.residuals.back());

  Vec k1 = F(t, y);
  if (k1.size() == 0) {
    tr.status = Status::invalid_initial;
    tr.message = "vector field is not finite at the initial state";
    return tr;
  }

  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const double hmax = std::min(o.max_step, std::abs(t1 - t0));
  double h = o.fixed_step > 0 ? o.fixed_step
             : o.initial_step > 0 ? std::min(o.initial_step, hmax)
                                  : initial_step(F, t, y, k1, dir, hmax, o);
  double facold = 1e-4;
  bool last_rejected = false;

  std::vector<double> gprev;
  for (const auto& ev : o.events) gprev.push_back(ev.fn(t, y));
  size_t next_sample = 0;
  std::vector<double> samples = o.sample_times;
  std::sort(samples.begin(), samples.end(), [dir](double a, double b) { return dir > 0 ? a < b : a > b; });
  while (next_sample < samples.size() && dir * (samples[next_sample] - t0) < 0) ++next_sample;
  while (next_sample < samples.size() && samples[next_sample] == t0) {
    tr.sample_t.push_back(t0);
    tr.samples.push_back(y);
    ++next_sample;
  }

  long steps = 0;
  while (dir * (t1 - t) > 0) {
    if (++steps > o.max_steps) {
      tr.status = Status::max_steps;
      tr.message = "maximum number of steps reached at t = " + std::to_string(t);
      break;
    }
    const double floor = std::max(o.min_step, 1e-14 * std::max(1.0, std::abs(t)));
    if (o.fixed_step <= 0 && h < floor) {
      std::ostringstream msg;
      msg << "step size underflow at t = " << t << " (h = " << h << ")";
      tr.status = Status::step_underflow;
      tr.message = msg.str();
      break;
    }
    bool final_step = false;
    // fixed steps absorb accumulated rounding instead of taking a sliver step
    const double slack = o.fixed_step > 0 ? 1e-9 * h : 0.0;
    if (dir * (t + dir * h - t1) >= -slack) {
      h = std::abs(t1 - t);
      final_step = true;
    }
    const double hs = dir * h;
    Vec k2, k3, k4, k5, k6, k7, y1;
    bool ok = true;
    auto stage = [&](Vec& k, double c, const Vec& arg) {
      if (!ok) return;
      k = F(t + c * hs, arg);
      if (k.size() == 0) ok = false;
    };
    stage(k2, c2, y + hs * a21 * k1);
    if (ok) stage(k3, c3, y + hs * (a31 * k1 + a32 * k2));
    if (ok) stage(k4, c4, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    if (ok) stage(k5, c5, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    if (ok) stage(k6, 1.0, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    if (ok) {
      y1 = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      stage(k7, 1.0, y1);
    }
    double err = INFINITY;
    if (ok) {
      const Vec e = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      err = o.fixed_step > 0 ? 0.0 : rms(e, y, y1, o.abs_tol, o.rel_tol);
      if (!std::isfinite(err)) err = INFINITY;
    }
    if (o.fixed_step > 0 && !ok) {
      tr.status = Status::step_underflow;
      tr.message = "vector field not finite in fixed-step mode at t = " + std::to_string(t);
      break;
    }
    if (err > 1.0) {
      ++tr.rejected;
      const double fac11 = std::pow(err, expo1);
      h = h / std::min(facc1, fac11 / safe);
      last_rejected = true;
      continue;
    }

    // accepted
    ++tr.accepted;
    DenseSegment seg;
    seg.t0 = t;
    seg.h = hs;
    const Vec ydiff = y1 - y;
    const Vec bspl = hs * k1 - ydiff;
    seg.c[0] = y;
    seg.c[1] = ydiff;
    seg.c[2] = bspl;
    seg.c[3] = ydiff - hs * k7 - bspl;
    seg.c[4] = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    double tnew = final_step ? t1 : t + hs;

    bool halt = false;
    for (size_t k = 0; k < o.events.size(); ++k) {
      const double gn = o.events[k].fn(tnew, y1);
      if (crosses(gprev[k], gn, o.events[k].direction)) {
        const double te = refine_event(seg, o.events[k].fn, t, tnew);
        tr.events.push_back({te, o.events[k].label, seg.eval(te)});
        if (o.events[k].action == EventAction::halt) {
          halt = true;
          tnew = te;
          y1 = seg.eval(te);
        }
      }
      gprev[k] = gn;
    }

    while (next_sample < samples.size() && dir * (samples[next_sample] - tnew) <= 0) {
      Vec s = seg.eval(samples[next_sample]);
      if (o.gauge) o.gauge(s);
      tr.sample_t.push_back(samples[next_sample]);
      tr.samples.push_back(s);
      ++next_sample;
    }
    if (o.keep_steps) tr.segments.push_back(std::move(seg));

    const bool gauged = o.gauge && (o.gauge_every <= 1 || tr.accepted % o.gauge_every == 0);
    if (gauged) o.gauge(y1);
    t = tnew;
    y = y1;
    std::vector<double> row;
    if (!o.invariants.empty()) {
      row = log_row(y);
      note_max(row);
    }
    if (o.keep_steps || halt || dir * (t1 - t) <= 0) {
      tr.times.push_back(t);
      tr.states.push_back(y);
      tr.residuals.push_back(row.size() == o.invariants.size() ? row : log_row(y));
    }
    if (halt) {
      tr.status = Status::halted;
      tr.message = "halted by event '" + tr.events.back().label + "'";
      break;
    }
    if (o.guard) {
      const std::string why = o.guard(t, y);
      if (!why.empty()) {
        tr.status = Status::guarded;
        tr.message = why;
        break;
      }
    }
    if (gauged) {
      k1 = F(t, y);
      if (k1.size() == 0) {
        tr.status = Status::step_underflow;
        tr.message = "vector field not finite after gauge at t = " + std::to_string(t);
        break;
      }
    } else {
      k1 = k7;
    }

    if (o.fixed_step > 0) {
      h = o.fixed_step;
      continue;
    }
    const double fac11 = std::pow(err, expo1);
    double fac = fac11 / std::pow(facold, beta);
    fac = std::max(facc2, std::min(facc1, fac / safe));
    double hnew = h / fac;
    if (last_rejected) hnew = std::min(hnew, h);
    facold = std::max(err, 1e-4);
    last_rejected = false;
    h = std::min(hnew, hmax);
  }
  if (!o.keep_steps && tr.times.back() != t) {
    tr.times.push_back(t);
    tr.states.push_back(y);
    tr.residuals.push_back(log_row(y));
  }
  return tr;
}

std::vector<InvariantReport> monitor_invariants(const Trajectory& traj) {
  std::vector<InvariantReport> out;
  const auto mx = traj.max_residuals();
  for (size_t k = 0; k < traj.invariant_names.size(); ++k) {
    const double fin = traj.residuals.empty() ? 0.0 : traj.residuals.back()[k];
    out.push_back({traj.invariant_names[k], mx[k], fin});
  }
  return out;
}

bool invariants_ok(const std::vector<InvariantReport>& rep, double threshold) {
  for (const auto& r : rep)
    if (!(r.max <= threshold)) return false;
  return true;
}

}  // namespace threebody
