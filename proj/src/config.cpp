#include "threebody/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace threebody {

namespace {

using json = nlohmann::json;

double number(const json& j, const std::string& key) {
  if (!j.at(key).is_number()) throw config_error(key, "expected a number");
  return j.at(key).get<double>();
}

std::string text(const json& j, const std::string& key) {
  if (!j.at(key).is_string()) throw config_error(key, "expected a string");
  return j.at(key).get<std::string>();
}

Config3 planar_triple(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 3) throw config_error(field, "expected three [x, y] points");
  Config3 c;
  for (int k = 0; k < 3; ++k) {
    const json& e = j[k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw config_error(field, "entry " + std::to_string(k) + " is not an [x, y] pair");
    c(k) = cd(e[0].get<double>(), e[1].get<double>());
  }
  return c;
}

GeneralForm blown_form(const std::string& chart, const Masses& M, double h) {
  if (chart == "blowup_sph") return form_spherical(M, h);
  if (chart == "blowup_reduced") return form_reduced(M, h);
  if (chart == "blowup_affine") return form_reg_affine(M, h);
  return form_reg_round(M, h);
}

}  // namespace

Masses parse_masses(const std::array<double, 3>& m) {
  try {
    return Masses(m[0], m[1], m[2]);
  } catch (const invalid_state& e) {
    throw config_error("masses", e.what());
  }
}

json RunConfig::to_json() const {
  json j = {{"masses", masses}, {"chart", chart},   {"timescale", timescale}, {"span", span},
            {"tol", tol},       {"samples", samples}, {"events", events},     {"threshold", threshold},
            {"out", out},       {"format", format}, {"seed", seed}};
  if (mu) j["mu"] = *mu;
  if (energy) j["energy"] = *energy;
  if (!state.is_null()) j["state"] = state;
  if (!bodies.is_null()) j["bodies"] = bodies;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw config_error("", "configuration must be a JSON object");
  static const std::set<std::string> known = {"masses", "chart",  "timescale", "mu",        "energy",
                                              "state",  "bodies", "span",      "tol",       "samples",
                                              "events", "threshold", "out",    "format",    "seed"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw config_error(k, "unknown field");
  RunConfig c;
  if (j.contains("masses")) {
    const json& m = j["masses"];
    if (!m.is_array() || m.size() != 3) throw config_error("masses", "expected three numbers");
    for (int k = 0; k < 3; ++k) {
      if (!m[k].is_number()) throw config_error("masses", "expected three numbers");
      c.masses[k] = m[k].get<double>();
    }
    parse_masses(c.masses);
  }
  if (j.contains("chart")) c.chart = text(j, "chart");
  if (j.contains("timescale")) c.timescale = text(j, "timescale");
  if (j.contains("mu")) c.mu = number(j, "mu");
  if (j.contains("energy")) c.energy = number(j, "energy");
  if (j.contains("state")) {
    if (!j["state"].is_object()) throw config_error("state", "expected an object of chart fields");
    c.state = j["state"];
  }
  if (j.contains("bodies")) {
    const json& b = j["bodies"];
    if (!b.is_object() || !b.contains("q") || !b.contains("v"))
      throw config_error("bodies", "expected {\"q\": [...], \"v\": [...]}");
    planar_triple(b["q"], "bodies.q");
    planar_triple(b["v"], "bodies.v");
    c.bodies = b;
  }
  if (!c.state.is_null() && !c.bodies.is_null()) throw config_error("state", "give either state or bodies");
  if (j.contains("span")) c.span = number(j, "span");
  if (!(c.span > 0)) throw config_error("span", "must be positive");
  if (j.contains("tol")) c.tol = number(j, "tol");
  if (!(c.tol > 0 && c.tol < 1)) throw config_error("tol", "must lie in (0, 1)");
  if (j.contains("samples")) {
    if (!j["samples"].is_number_integer() || j["samples"].get<int>() < 0)
      throw config_error("samples", "expected a non-negative integer");
    c.samples = j["samples"].get<int>();
  }
  if (j.contains("events")) {
    if (!j["events"].is_boolean()) throw config_error("events", "expected true or false");
    c.events = j["events"].get<bool>();
  }
  if (j.contains("threshold")) c.threshold = number(j, "threshold");
  if (j.contains("out")) c.out = text(j, "out");
  if (j.contains("format")) c.format = text(j, "format");
  if (c.format != "jsonl" && c.format != "csv") throw config_error("format", "expected jsonl or csv");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw config_error("seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  return c;
}

RunConfig RunConfig::parse(const std::string& s) {
  json j;
  try {
    j = json::parse(s);
  } catch (const json::parse_error& e) {
    const size_t end = std::min<size_t>(e.byte == 0 ? 0 : e.byte - 1, s.size());
    size_t line = 1, col = 1;
    for (size_t i = 0; i < end; ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw config_error("", "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
  }
  return from_json(j);
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

PreparedRun prepare(const RunConfig& c) {
  const Masses M = parse_masses(c.masses);
  TimeScale ts;
  try {
    ts = TimeScale::parse(c.timescale);
  } catch (const std::exception& e) {
    throw config_error("timescale", e.what());
  }
  const auto names = system_names();
  if (std::find(names.begin(), names.end(), c.chart) == names.end())
    throw config_error("chart", "unknown chart '" + c.chart + "'");

  PreparedRun run;
  auto from_bodies = [&](const RelState& rel, const std::string& field) {
    auto [S, y] = system_from_bodies(c.chart, M, rel, ts);
    auto clash = [&](const std::optional<double>& given, double derived, const std::string& name) {
      if (given && std::abs(*given - derived) > 1e-9 * std::max(1.0, std::abs(derived)))
        throw config_error(name, "conflicts with the value " + std::to_string(derived) + " implied by " + field);
    };
    clash(c.mu, angular_momentum(rel), "mu");
    clash(c.energy, h_rel(rel, M), "energy");
    run.sys = S;
    run.y0 = y;
  };

  if (!c.bodies.is_null()) {
    BodyState b;
    b.q = planar_triple(c.bodies["q"], "bodies.q");
    const Config3 v = planar_triple(c.bodies["v"], "bodies.v");
    b.p = Config3(c.masses[0] * v(0), c.masses[1] * v(1), c.masses[2] * v(2));
    try {
      from_bodies(reduce_translations(b, M), "bodies");
    } catch (const config_error&) {
      throw;
    } catch (const std::exception& e) {
      throw config_error("bodies", e.what());
    }
  } else if (!c.state.is_null()) {
    run.sys = make_system(c.chart, M, c.mu.value_or(0), c.energy.value_or(0), ts);
    json st = c.state;
    const bool fill_v = c.chart.rfind("blowup_", 0) == 0 && !st.contains("v");
    if (fill_v) st["v"] = 0.0;
    try {
      run.y0 = state_from_json(run.sys, st);
      if (fill_v) {
        const int n = (run.sys.dim - 3) / 2;
        BlownState b = unpack_blown(run.y0, n);
        b.v = energy_v(b, blown_form(c.chart, M, run.sys.h), ts, true);
        run.y0 = pack(b);
      }
    } catch (const std::exception& e) {
      throw config_error("state", e.what());
    }
  } else {
    Rng g(c.seed);
    from_bodies(random_rel_state(g, M), "the random state");
  }
  if (const std::string err = validate_initial(run.sys, run.y0); !err.empty()) throw config_error("state", err);
  return run;
}

std::string validate_initial(const System& S, const Vec& y, double tol) {
  if (y.size() != S.dim) return "expected " + std::to_string(S.dim) + " components";
  if (!y.allFinite()) return "non-finite component";
  try {
    if (!S.rhs(y).allFinite()) return "vector field is not finite at the initial state";
  } catch (const std::exception& e) {
    return std::string("vector field undefined: ") + e.what();
  }
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  for (const auto& inv : S.invariants) {
    if (inv.drift && inv.name != "zero_level") continue;
    const double g = std::abs(inv.fn(y));
    if (!(g <= tol * scale)) {
      std::ostringstream os;
      os << inv.name << " residual " << g << " exceeds " << tol * scale;
      return os.str();
    }
  }
  return {};
}

}  // namespace threebody
