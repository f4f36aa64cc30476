#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "threebody/blowup.hpp"
#include "threebody/integrate.hpp"

namespace threebody {

using Rng = std::mt19937_64;

struct FieldSpec {
  std::string name;
  int offset;
  int count;     // number of entries
  bool complex;  // entries are (re, im) pairs
};

struct System {
  std::string name;
  int dim = 0;
  Masses M;
  double mu = 0, h = 0;
  TimeScale ts;
  bool reduced = false;
  bool regularized = false;
  std::vector<FieldSpec> fields;
  // canonical (q, p) index pairs; empty for non-Hamiltonian systems
  std::vector<std::pair<int, int>> canonical;

  std::function<Vec(const Vec&)> rhs;
  std::function<double(const Vec&)> hamiltonian;
  std::function<Vec(const Vec&)> curvature;
  std::function<void(Vec&)> gauge;
  std::function<Vec(Rng&)> sample;
  std::function<Vec(const RelState&)> from_rel;
  // reduced charts; signs picks the square-root branch where the chart has one
  std::function<Vec(const RedState&, unsigned signs)> from_reduced;
  // unreduced regularized charts
  std::function<Vec(const RelState&, unsigned signs)> from_rel_branch;
  std::function<RedState(const Vec&)> to_reduced;
  std::function<std::optional<RelState>(const Vec&)> to_rel;
  // d(physical time) / d(independent variable)
  std::function<double(const Vec&)> time_rate;
  std::vector<InvariantSpec> invariants;
  std::vector<EventSpec> events;

  VectorField field() const {
    auto f = rhs;
    return [f](double, const Vec& y) { return f(y); };
  }
  IntegratorOptions options(double tol, bool with_gauge = true) const;
};

std::vector<std::string> system_names();
// mu and h are the fixed angular momentum and energy parameters of the chart
System make_system(const std::string& name, const Masses& M, double mu = 0, double h = 0,
                   TimeScale ts = TimeScale::f1());
// picks mu and h from a physical state and converts it into the named chart
std::pair<System, Vec> system_from_bodies(const std::string& name, const Masses& M, const RelState& s,
                                          TimeScale ts = TimeScale::f1());

// stops integration once min |X_ij| < ratio |X|, for use as IntegratorOptions::guard
std::function<std::string(double, const Vec&)> collision_guard(const System& sys, double ratio = 1e-6);

// appends physical time as a trailing "t_phys" component advanced at time_rate
System with_clock(const System& sys);

RelState random_rel_state(Rng& rng, const Masses& M, double min_ratio = 0.3);

nlohmann::json state_to_json(const System& sys, const Vec& y);
Vec state_from_json(const System& sys, const nlohmann::json& j);
std::vector<std::string> csv_columns(const System& sys);

void write_jsonl(std::ostream& os, const System& sys, const Trajectory& tr, bool use_samples = false);
void write_csv(std::ostream& os, const System& sys, const Trajectory& tr, bool use_samples = false);

}  // namespace threebody
