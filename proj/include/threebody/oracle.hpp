#pragma once

#include <cstdint>
#include <map>

#include "threebody/system.hpp"

namespace threebody {

struct GradCheckReport {
  std::string system;
  std::uint64_t seed = 0;
  int samples = 0;
  double step = 1e-6;
  double max_rel_err = 0;
  Vec worst_state;
  std::vector<double> component_max;  // per state component, relative to |expected|_inf
  int skipped = 0;                    // samples the sampler could not evaluate
  bool pass(double tol = 1e-6) const { return samples > 0 && max_rel_err < tol; }
  nlohmann::json to_json(const System& sys) const;
};

// Hamiltonian systems: rhs against (dH/dp, -dH/dq + curvature) by central differences.
// Blown-up systems: the blow-down pushforward of rhs against f(r) times the unblown field.
GradCheckReport fd_gradient_check(const System& sys, int n_samples = 100, std::uint64_t seed = 1,
                                  double step = 1e-6);
GradCheckReport fd_gradient_check(const System& sys, const std::function<Vec(const Vec&)>& rhs, int n_samples,
                                  std::uint64_t seed, double step = 1e-6);

// physical-time sampled run of a chart, t in [0, span] on a uniform grid of n + 1 points
struct TimedRun {
  std::vector<double> t;
  std::vector<Vec> states;
  Status status = Status::completed;
  std::string message;
  std::vector<InvariantReport> invariants;  // the chart's own invariants over every step
  long steps = 0;
};
TimedRun run_physical_time(const System& sys, const Vec& y0, double span, int n, double tol = 1e-12);

// gauge and phase invariant coordinates of a reduced state
Vec reduced_features(const RedState& s);

struct CrossChartReport {
  std::string a, b;
  double span = 0;
  int samples = 0;
  double max_distance = 0;
  int out_of_chart = 0;
  bool completed = false;
  std::string message;
  nlohmann::json to_json() const;
};

CrossChartReport cross_chart_compare(const System& A, const Vec& ya, const System& B, const Vec& yb, double span,
                                     int n = 50, double tol = 1e-12);

struct CoveringReport {
  std::uint64_t seed = 0;
  int samples = 0;
  std::map<int, int> histogram;  // preimage count -> number of shapes
  std::vector<int> collision_counts;
  double min_separation = 0;
  struct Row {
    double u, v;
    int n;
  };
  std::vector<Row> rows;
  nlohmann::json to_json() const;
};

CoveringReport covering_degree_estimate(const Masses& M, int n_samples = 1000, std::uint64_t seed = 1);
void write_covering_csv(std::ostream& os, const CoveringReport& rep);

}  // namespace threebody
