#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "threebody/checks.hpp"
#include "threebody/config.hpp"

using namespace threebody;
using nlohmann::json;

namespace {

constexpr int kInvariantFailure = 1;
constexpr int kConfigError = 2;

struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file.open(path);
    if (!file) throw config_error("out", "cannot write " + path);
    os = &file;
  }
  std::ostream& operator*() { return *os; }
};

bool time_rescaled(const System& S) { return S.regularized || S.name.rfind("blowup_", 0) == 0; }

json report_of(const System& S, const Trajectory& tr, double threshold, const std::vector<InvariantReport>& inv) {
  json r;
  r["chart"] = S.name;
  r["masses"] = {S.M.m1, S.M.m2, S.M.m3};
  r["mu"] = S.mu;
  r["energy"] = S.h;
  r["timescale"] = S.ts.name();
  r["status"] = to_string(tr.status);
  if (!tr.message.empty()) r["message"] = tr.message;
  r["t_end"] = tr.t_end();
  r["steps"] = {{"accepted", tr.accepted}, {"rejected", tr.rejected}, {"evaluations", tr.evaluations}};
  r["final_state"] = state_to_json(S, tr.final_state());
  json ij = json::array();
  for (const auto& i : inv) ij.push_back({{"name", i.name}, {"max", i.max}, {"final", i.final}});
  r["invariants"] = ij;
  r["threshold"] = threshold;
  json ev = json::array();
  for (const auto& e : tr.events) ev.push_back({{"t", e.t}, {"label", e.label}, {"state", state_to_json(S, e.y)}});
  r["events"] = ev;
  return r;
}

int run_integrate(RunConfig cfg, const std::string& report_path) {
  PreparedRun run = prepare(cfg);
  System S = run.sys;
  Vec y0 = run.y0;
  if (time_rescaled(S)) {
    S = with_clock(S);
    y0.conservativeResize(S.dim);
    y0(S.dim - 1) = 0;
  }
  IntegratorOptions o = S.options(cfg.tol);
  if (cfg.events) o.events = S.events;
  if (cfg.samples > 0) {
    for (int k = 0; k <= cfg.samples; ++k) o.sample_times.push_back(cfg.span * k / cfg.samples);
    o.keep_steps = false;
  }
  const Trajectory tr = integrate(S.field(), y0, 0, cfg.span, o);

  Output out(cfg.out);
  if (cfg.format == "csv")
    write_csv(*out, S, tr, cfg.samples > 0);
  else
    write_jsonl(*out, S, tr, cfg.samples > 0);

  const auto inv = monitor_invariants(tr);
  const bool inv_ok = invariants_ok(inv, cfg.threshold);
  const bool run_ok = tr.status == Status::completed || tr.status == Status::halted;
  json rep = report_of(S, tr, cfg.threshold, inv);
  rep["pass"] = inv_ok && run_ok;
  if (report_path.empty()) {
    std::cerr << rep.dump(2) << '\n';
  } else {
    std::ofstream f(report_path);
    if (!f) throw config_error("report", "cannot write " + report_path);
    f << rep.dump(2) << '\n';
  }
  if (!run_ok) std::cerr << "integration stopped: " << to_string(tr.status) << ' ' << tr.message << '\n';
  if (!inv_ok) std::cerr << "invariant residual above " << cfg.threshold << '\n';
  return inv_ok && run_ok ? 0 : kInvariantFailure;
}

struct TransformArgs {
  std::string in, from, to, out, format = "jsonl", timescale = "f1";
  std::vector<double> masses{1, 1, 1};
  std::optional<double> mu, energy;
  unsigned branch = 0;
};

int run_transform(const TransformArgs& a) {
  const Masses M = parse_masses({a.masses[0], a.masses[1], a.masses[2]});
  const TimeScale ts = TimeScale::parse(a.timescale);
  std::ifstream in(a.in);
  if (!in) throw config_error("in", "cannot read " + a.in);

  struct Rec {
    double t;
    json state;
  };
  std::vector<Rec> recs;
  std::string line;
  for (int ln = 1; std::getline(in, line); ++ln) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw config_error("in", "line " + std::to_string(ln) + ": " + e.what());
    }
    if (!j.contains("t") || !j.contains("state"))
      throw config_error("in", "line " + std::to_string(ln) + ": expected {\"t\", \"state\"}");
    recs.push_back({j["t"].get<double>(), j["state"]});
  }
  if (recs.empty()) throw config_error("in", "no records");

  auto make = [&](const std::string& name, const std::string& field, double mu, double h) {
    try {
      return make_system(name, M, mu, h, ts);
    } catch (const invalid_state& e) {
      throw config_error(field, e.what());
    }
  };
  // the physical mu and energy default to those of the first record
  System A = make(a.from, "from", a.mu.value_or(0), a.energy.value_or(0));
  if (A.reduced && !a.mu) throw config_error("mu", "required for the reduced chart " + a.from);
  double mu = a.mu.value_or(0), h = a.energy.value_or(0);
  if (!a.mu || !a.energy) {
    const RedState r0 = A.to_reduced(state_from_json(A, recs[0].state));
    if (!a.mu) mu = r0.mu;
    if (!a.energy) h = h_mu(r0, M);
    A = make(a.from, "from", mu, h);
  }
  const System B = make(a.to, "to", mu, h);
  if (!B.reduced && !A.to_rel)
    throw config_error("to", a.from + " carries no orientation, so " + a.to + " is unreachable");

  const int nb = (B.from_reduced && B.regularized) || B.from_rel_branch ? 8 : 1;
  auto convert = [&](const Vec& y, unsigned b) -> Vec {
    if (B.reduced) {
      const RedState r = A.to_reduced(y);
      return B.from_reduced(r, b);
    }
    const auto rel = A.to_rel(y);
    if (!rel) throw out_of_chart("no relative state");
    return B.from_rel_branch ? B.from_rel_branch(*rel, b) : B.from_rel(*rel);
  };

  Output out(a.out);
  const bool csv = a.format == "csv";
  if (csv) {
    *out << "t,t_phys,ok";
    for (const auto& c : csv_columns(B)) *out << ',' << c;
    *out << '\n';
    (*out).precision(17);
  }
  std::optional<Vec> prev;
  double t_phys = 0, rate_prev = 0;
  int bad = 0;
  for (size_t i = 0; i < recs.size(); ++i) {
    std::optional<Vec> y;
    std::string err;
    try {
      y = state_from_json(A, recs[i].state);
    } catch (const std::exception& e) {
      throw config_error("in", "record " + std::to_string(i + 1) + ": " + e.what());
    }
    if (recs[i].state.contains("t_phys")) {
      t_phys = recs[i].state["t_phys"].get<double>();
    } else if (time_rescaled(A)) {
      const double rate = A.time_rate(*y);
      if (i > 0) t_phys += 0.5 * (rate + rate_prev) * (recs[i].t - recs[i - 1].t);
      rate_prev = rate;
    } else {
      t_phys = recs[i].t;
    }
    std::optional<Vec> best;
    for (int b = 0; b < nb; ++b) {
      const unsigned bits = prev ? unsigned(b) : (a.branch + unsigned(b)) % 8;
      try {
        Vec x = convert(*y, bits);
        if (!x.allFinite()) throw out_of_chart("non-finite image");
        if (!best || (prev && (x - *prev).norm() < (*best - *prev).norm())) best = x;
        if (!prev) break;
      } catch (const std::exception& e) {
        if (err.empty()) err = e.what();
      }
    }
    if (best) prev = best;
    else ++bad;
    if (csv) {
      *out << recs[i].t << ',' << t_phys << ',' << (best ? 1 : 0);
      for (int k = 0; k < B.dim; ++k) *out << ',' << (best ? (*best)(k) : NAN);
      *out << '\n';
    } else {
      json r = {{"t", recs[i].t}, {"t_phys", t_phys}};
      if (best) r["state"] = state_to_json(B, *best);
      else r["error"] = err;
      *out << r.dump() << '\n';
    }
  }
  if (bad) std::cerr << bad << " of " << recs.size() << " samples fall outside " << B.name << '\n';
  return 0;
}

int run_potential(const std::string& chart, const std::string& field, int res, const std::vector<double>& m,
                  double extent, const std::string& path, bool summary) {
  const Masses M = parse_masses({m[0], m[1], m[2]});
  std::vector<GridNode> g;
  if (field == "V") {
    if (chart != "round" && chart != "affine") throw config_error("chart", "expected round or affine");
    g = potential_grid(chart == "round" ? GridChart::round : GridChart::affine, res, M, extent);
  } else {
    g = regularized_grid(field == "W" ? RegGridField::W : RegGridField::pullback, res, M, extent);
  }
  Output out(path);
  *out << "u,v,V\n";
  (*out).precision(17);
  for (const auto& n : g) {
    *out << n.u << ',' << n.v << ',';
    if (std::isinf(n.V)) *out << "inf";
    else *out << n.V;
    *out << '\n';
  }
  if (summary && field == "V" && chart == "round") {
    const GridCounts c = count_grid_extrema(g, res);
    std::cerr << json{{"minima", c.minima}, {"saddles", c.saddles}, {"maxima", c.maxima}}.dump() << '\n';
  }
  return 0;
}

int run_check(const std::string& suite, std::uint64_t seed, const std::string& path) {
  const auto results = run_suite(suite, seed);
  json all = json::array();
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << ' ' << r.name << "  " << r.summary << '\n';
    all.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"summary", r.summary}, {"detail", r.detail}});
    ok = ok && r.pass;
  }
  if (!path.empty()) {
    std::ofstream f(path);
    if (!f) throw config_error("out", "cannot write " + path);
    f << all.dump(2) << '\n';
  }
  return ok ? 0 : kInvariantFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planar three-body integrator over reduced and regularized charts"};
  app.require_subcommand(1);

  // integrate
  auto* integ = app.add_subcommand("integrate", "integrate one chart and write the trajectory");
  std::string config_path, report_path;
  std::vector<double> masses;
  std::string chart, timescale, out, format;
  std::optional<double> mu, energy, tol, span, threshold;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  bool events = false;
  integ->add_option("--config", config_path, "JSON run configuration");
  integ->add_option("--masses", masses, "m1,m2,m3")->delimiter(',')->expected(3);
  integ->add_option("--chart", chart)->check(CLI::IsMember(system_names()));
  integ->add_option("--mu", mu, "angular momentum");
  integ->add_option("--energy", energy, "energy level h");
  integ->add_option("--timescale", timescale, "f1 or f2");
  integ->add_option("--tol", tol);
  integ->add_option("--span", span, "length in the chart's independent variable");
  integ->add_option("--samples", samples, "uniform output samples instead of every step");
  integ->add_flag("--events", events, "record pairwise distance minima");
  integ->add_option("--threshold", threshold, "invariant residual limit");
  integ->add_option("--seed", seed, "random initial bodies when no state is given");
  integ->add_option("--out", out, "trajectory file, stdout by default");
  integ->add_option("--format", format)->check(CLI::IsMember({"jsonl", "csv"}));
  integ->add_option("--report", report_path, "summary JSON, stderr by default");

  // transform
  auto* trans = app.add_subcommand("transform", "map a JSONL trajectory into another chart");
  TransformArgs ta;
  trans->add_option("input", ta.in)->required();
  trans->add_option("--from", ta.from)->required()->check(CLI::IsMember(system_names()));
  trans->add_option("--to", ta.to)->required()->check(CLI::IsMember(system_names()));
  trans->add_option("--masses", ta.masses)->delimiter(',')->expected(3);
  trans->add_option("--mu", ta.mu);
  trans->add_option("--energy", ta.energy);
  trans->add_option("--timescale", ta.timescale);
  trans->add_option("--branch", ta.branch, "square-root sign bits of the first sample")->check(CLI::Range(0, 7));
  trans->add_option("--out", ta.out);
  trans->add_option("--format", ta.format)->check(CLI::IsMember({"jsonl", "csv"}));

  // potential
  auto* pot = app.add_subcommand("potential", "shape potential on a grid as CSV u,v,V");
  std::string pchart = "round", pfield = "V", pout;
  int pres = 181;
  double extent = 2.0;
  std::vector<double> pmasses{1, 1, 1};
  bool psummary = false;
  pot->add_option("--chart", pchart)->check(CLI::IsMember({"round", "affine"}));
  pot->add_option("--field", pfield, "V, W (regularized) or pullback")->check(CLI::IsMember({"V", "W", "pullback"}));
  pot->add_option("--resolution", pres)->check(CLI::Range(2, 4096));
  pot->add_option("--extent", extent);
  pot->add_option("--masses", pmasses)->delimiter(',')->expected(3);
  pot->add_option("--out", pout);
  pot->add_flag("--summary", psummary, "print grid extremum counts to stderr");

  // covering
  auto* cov = app.add_subcommand("covering", "count squaring-map preimages of random shapes");
  int csamples = 1000;
  std::uint64_t cseed = 1;
  std::string cout_path;
  std::vector<double> cmasses{1, 1, 1};
  cov->add_option("--samples", csamples)->check(CLI::Range(100, 10000000));
  cov->add_option("--seed", cseed);
  cov->add_option("--masses", cmasses)->delimiter(',')->expected(3);
  cov->add_option("--out", cout_path, "CSV shape_u,shape_v,n_preimages");

  // check
  auto* chk = app.add_subcommand("check", "run a verification suite");
  std::string suite = "all", chk_out;
  std::uint64_t chk_seed = 1;
  chk->add_option("suite", suite)->check(CLI::IsMember(suite_names()));
  chk->add_option("--seed", chk_seed);
  chk->add_option("--out", chk_out, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*integ) {
      RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
      if (!masses.empty()) cfg.masses = {masses[0], masses[1], masses[2]};
      if (!chart.empty()) cfg.chart = chart;
      if (!timescale.empty()) cfg.timescale = timescale;
      if (mu) cfg.mu = mu;
      if (energy) cfg.energy = energy;
      if (tol) cfg.tol = *tol;
      if (span) cfg.span = *span;
      if (samples) cfg.samples = *samples;
      if (events) cfg.events = true;
      if (threshold) cfg.threshold = *threshold;
      if (seed) cfg.seed = *seed;
      if (!out.empty()) cfg.out = out;
      if (!format.empty()) cfg.format = format;
      cfg = RunConfig::from_json(cfg.to_json());
      return run_integrate(cfg, report_path);
    }
    if (*trans) return run_transform(ta);
    if (*pot) return run_potential(pchart, pfield, pres, pmasses, extent, pout, psummary);
    if (*cov) {
      const CoveringReport rep =
          covering_degree_estimate(parse_masses({cmasses[0], cmasses[1], cmasses[2]}), csamples, cseed);
      if (!cout_path.empty()) {
        Output o(cout_path);
        write_covering_csv(*o, rep);
      }
      std::cout << rep.to_json().dump(2) << '\n';
      return 0;
    }
    if (*chk) return run_check(suite, chk_seed, chk_out);
  } catch (const config_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const invalid_state& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariantFailure;
  }
  return 0;
}
