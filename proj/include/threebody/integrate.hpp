#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace threebody {

using Vec = Eigen::VectorXd;
using VectorField = std::function<Vec(double t, const Vec& y)>;

enum class Direction { any, up, down };
enum class EventAction { record, halt };

struct EventSpec {
  std::string label;
  std::function<double(double t, const Vec& y)> fn;
  Direction direction = Direction::any;
  EventAction action = EventAction::record;
};

struct EventHit {
  double t;
  std::string label;
  Vec y;
};

// drift: |g(y) - g(y0)|; otherwise |g(y)|
struct InvariantSpec {
  std::string name;
  std::function<double(const Vec& y)> fn;
  bool drift = true;
};

struct IntegratorOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0;  // 0 picks one automatically
  double min_step = 0;      // 0 means 1e-14 |t| floor only
  long max_steps = 2'000'000;
  double fixed_step = 0;    // > 0 disables error control
  int gauge_every = 1;
  std::function<void(Vec&)> gauge;
  // returns a message to stop integration, empty to continue
  std::function<std::string(double t, const Vec& y)> guard;
  std::vector<EventSpec> events;
  std::vector<InvariantSpec> invariants;
  std::vector<double> sample_times;
  bool keep_steps = true;  // store every accepted step and its dense segment
};

enum class Status { completed, halted, step_underflow, max_steps, guarded, invalid_initial };
std::string to_string(Status s);

struct DenseSegment {
  double t0, h;
  std::array<Vec, 5> c;
  Vec eval(double t) const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<std::string> invariant_names;
  std::vector<std::vector<double>> residuals;  // one row per stored state
  std::vector<double> residual_max;            // over every accepted step, stored or not
  std::vector<EventHit> events;
  std::vector<double> sample_t;
  std::vector<Vec> samples;
  std::vector<DenseSegment> segments;
  Status status = Status::completed;
  std::string message;
  long accepted = 0, rejected = 0, evaluations = 0;

  double t_end() const { return times.empty() ? 0.0 : times.back(); }
  const Vec& final_state() const { return states.back(); }
  // interpolated state (ungauged representative inside the step)
  Vec dense(double t) const;
  // max over the log, per invariant
  std::vector<double> max_residuals() const;
};

Trajectory integrate(const VectorField& f, const Vec& y0, double t0, double t1, const IntegratorOptions& opts = {});

// root of an event function inside a dense segment, bisection to tol in time
double refine_event(const DenseSegment& seg, const std::function<double(double, const Vec&)>& g, double ta, double tb,
                    double tol = 1e-12);

struct InvariantReport {
  std::string name;
  double max, final;
};
std::vector<InvariantReport> monitor_invariants(const Trajectory& traj);
bool invariants_ok(const std::vector<InvariantReport>& rep, double threshold);

}  // namespace threebody
