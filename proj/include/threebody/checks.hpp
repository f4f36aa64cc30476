#pragma once

#include <cstdint>

#include "threebody/oracle.hpp"

namespace threebody {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string summary;
  nlohmann::json detail;
};

// equal-mass figure-eight bodies; spin adds a rigid rotation omega * i q to every velocity
BodyState figure_eight(double spin = 0);
RelState bodies_to_rel(const BodyState& b, const Masses& M);

CriterionResult check_gradients(std::uint64_t seed = 1);
CriterionResult check_conservation();
CriterionResult check_chart_equivalence();
CriterionResult check_regularization();
CriterionResult check_blowup();
CriterionResult check_geometry(std::uint64_t seed = 1);
CriterionResult check_covering(std::uint64_t seed = 1);
CriterionResult check_potential();
CriterionResult check_kepler();

// suite in {gradients, conservation, charts, covering, blowup, geometry, potential, kepler, all}
std::vector<CriterionResult> run_suite(const std::string& suite, std::uint64_t seed = 1);
std::vector<std::string> suite_names();

}  // namespace threebody
