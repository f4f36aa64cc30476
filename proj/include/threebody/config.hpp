#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "threebody/system.hpp"

namespace threebody {

struct config_error : std::runtime_error {
  std::string field;
  config_error(const std::string& field, const std::string& msg)
      : std::runtime_error(field.empty() ? msg : "field '" + field + "': " + msg), field(field) {}
};

struct RunConfig {
  std::array<double, 3> masses{1, 1, 1};
  std::string chart = "relative";
  std::string timescale = "f1";
  std::optional<double> mu, energy;
  // chart fields, or {"q": [[x, y] x3], "v": [[x, y] x3]} for bodies; random bodies when both are null
  nlohmann::json state, bodies;
  double span = 10;
  double tol = 1e-12;
  int samples = 0;  // 0 writes every accepted step
  bool events = false;
  double threshold = 1e-8;
  std::string out;
  std::string format = "jsonl";
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  // JSON text with line and column in syntax errors
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
};

Masses parse_masses(const std::array<double, 3>& m);

struct PreparedRun {
  System sys;
  Vec y0;
};

// builds the chart and its initial state; a blown-up state without "v" takes the collapsing root of the energy relation
PreparedRun prepare(const RunConfig& cfg);

// empty when y0 is a usable initial state of the chart
std::string validate_initial(const System& sys, const Vec& y0, double tol = 1e-8);

}  // namespace threebody
