#include "util.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "threebody/config.hpp"

using namespace threebody;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("threebody_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (scratch() / name).string(); }

void write_file(const std::string& name, const std::string& text) { std::ofstream(path(name)) << text; }

std::string read_file(const std::string& name) {
  std::ifstream f(path(name));
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run(const std::string& args, const std::string& err_name = "stderr.txt") {
  const std::string cmd = std::string(THREEBODY_CLI) + " " + args + " 2>" + path(err_name);
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::vector<json> read_jsonl(const std::string& name) {
  std::vector<json> out;
  std::istringstream is(read_file(name));
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

void flatten(const json& j, std::vector<double>& out) {
  if (j.is_number()) out.push_back(j.get<double>());
  else if (j.is_array() || j.is_object())
    for (const auto& x : j) flatten(x, out);
}

std::vector<double> numbers(const json& j) {
  std::vector<double> v;
  flatten(j, v);
  return v;
}

std::string config_error_field(const std::function<void()>& f) {
  try {
    f();
  } catch (const config_error& e) {
    return e.field;
  }
  return "<none>";
}

json homothetic_config() {
  return {{"chart", "blowup_round"},
          {"energy", -1},
          {"state", {{"r", 1e-3}, {"mu_t", 0}, {"c", {1 / std::sqrt(3.0), 1 / std::sqrt(3.0), 1 / std::sqrt(3.0)}},
                     {"alpha", {0, 0, 0}}}},
          {"span", 50},
          {"samples", 10}};
}

}  // namespace

TEST_CASE("config round trip") {
  RunConfig c;
  c.masses = {1, 2, 3.5};
  c.chart = "reg_round";
  c.timescale = "f2";
  c.mu = 0.25;
  c.energy = -1.5;
  c.bodies = {{"q", {{1, 0}, {0, 1}, {-1, -1}}}, {"v", {{0, 0}, {0.1, 0}, {0, 0.2}}}};
  c.span = 3;
  c.tol = 1e-10;
  c.samples = 7;
  c.events = true;
  c.out = "x.jsonl";
  c.format = "csv";
  c.seed = 99;
  const json j = c.to_json();
  const RunConfig d = RunConfig::parse(j.dump());
  CHECK(d.to_json() == j);
  CHECK(RunConfig::from_json(RunConfig{}.to_json()).to_json() == RunConfig{}.to_json());
}

TEST_CASE("config diagnostics") {
  try {
    RunConfig::parse("{\n  \"span\": 1,\n  \"chart\" ; \"x\"\n}");
    FAIL("no error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("column") != std::string::npos);
  }
  CHECK(config_error_field([] { RunConfig::parse(R"({"bogus": 1})"); }) == "bogus");
  CHECK(config_error_field([] { RunConfig::parse(R"({"span": -1})"); }) == "span");
  CHECK(config_error_field([] { RunConfig::parse(R"({"masses": [1, 2]})"); }) == "masses");
  CHECK(config_error_field([] { RunConfig::parse(R"({"tol": 2})"); }) == "tol");
  CHECK(config_error_field([] { prepare(RunConfig::parse(R"({"masses": [1, 0, 1]})")); }) == "masses");
  CHECK(config_error_field([] { prepare(RunConfig::parse(R"({"chart": "polar"})")); }) == "chart");
  CHECK(config_error_field([] { prepare(RunConfig::parse(R"({"timescale": "f9"})")); }) == "timescale");
}

TEST_CASE("prepare") {
  RunConfig c = RunConfig::parse(R"({"chart": "reduced",
    "bodies": {"q": [[-1, 0], [1, 0], [0, 3]], "v": [[0.1, 0.2], [-0.1, 0.2], [0, -0.4]]}})");
  PreparedRun r = prepare(c);
  CHECK(r.sys.name == "reduced");
  CHECK(std::abs(r.sys.mu) < 1e-15);
  CHECK(validate_initial(r.sys, r.y0).empty());

  c.mu = 0.5;
  CHECK(config_error_field([&] { prepare(c); }) == "mu");

  r = prepare(RunConfig::from_json(homothetic_config()));
  CHECK(r.y0(1) == doctest::Approx(-std::sqrt(6.0)).epsilon(1e-2));
  CHECK(r.y0(1) < 0);

  const RunConfig a = RunConfig::parse(R"({"chart": "spherical", "seed": 4})");
  const RunConfig b = RunConfig::parse(R"({"chart": "spherical", "seed": 4})");
  CHECK((prepare(a).y0.array() == prepare(b).y0.array()).all());
}

TEST_CASE("initial state validation") {
  const Masses M(1, 2, 3);
  const System S = make_system("spherical", M);
  Rng g(3);
  SphState s = to_spherical(random_rel_state(g, M), M);
  CHECK(validate_initial(S, pack(s)).empty());
  CHECK_FALSE(validate_initial(S, Vec::Zero(3)).empty());
  s.Y += 0.1 * dual_vector(s.X, M);
  const std::string msg = validate_initial(S, pack(s));
  CHECK_MESSAGE(msg.find("pairing") != std::string::npos, msg);
  Vec bad = pack(s);
  bad(0) = NAN;
  CHECK_FALSE(validate_initial(S, bad).empty());
}

TEST_CASE("exit codes") {
  CHECK(run("integrate --chart relative --span 1 --seed 3 --out " + path("a.jsonl")) == 0);
  CHECK(read_jsonl("a.jsonl").size() > 2);
  CHECK(run("integrate --chart relative --span 1 --seed 3 --threshold 1e-30 --out " + path("b.jsonl")) == 1);
  CHECK(run("integrate --masses 1,0,1 --out " + path("c.jsonl")) == 2);
  CHECK(read_file("stderr.txt").find("masses") != std::string::npos);
  write_file("broken.json", "{\n  \"span\": 1,\n  oops\n}");
  CHECK(run("integrate --config " + path("broken.json")) == 2);
  CHECK(read_file("stderr.txt").find("line 3") != std::string::npos);
  CHECK(run("integrate --chart nowhere") == 2);
  CHECK(run("frobnicate") == 2);
}

TEST_CASE("homothetic run report") {
  write_file("homothetic.json", homothetic_config().dump());
  REQUIRE(run("integrate --config " + path("homothetic.json") + " --out " + path("h.jsonl") + " --report " +
              path("h_report.json")) == 0);
  const json rep = json::parse(read_file("h_report.json"));
  CHECK(rep["pass"] == true);
  CHECK(rep["status"] == "completed");
  CHECK(std::abs(rep["final_state"]["v"].get<double>() + 2.4494897) < 1e-4);
  const auto recs = read_jsonl("h.jsonl");
  CHECK(recs.size() == 11);
  CHECK(recs.back()["state"].contains("t_phys"));
}

TEST_CASE("collision transit run") {
  write_file("transit.json", R"({"chart": "reg_affine", "span": 70, "samples": 70, "events": true,
    "bodies": {"q": [[-1, 0], [1, 0], [0, 3]], "v": [[0.1, 0.2], [-0.1, 0.2], [0, -0.4]]}})");
  REQUIRE(run("integrate --config " + path("transit.json") + " --out " + path("t.jsonl") + " --report " +
              path("t_report.json")) == 0);
  const json rep = json::parse(read_file("t_report.json"));
  int hits = 0;
  for (const auto& e : rep["events"]) {
    if (e["label"] != "rho12_min") continue;
    ++hits;
    CHECK(std::hypot(e["state"]["z"][0].get<double>(), e["state"]["z"][1].get<double>()) < 1e-8);
    CHECK(e["state"]["t_phys"].get<double>() == doctest::Approx(1.7934).epsilon(1e-4));
  }
  CHECK(hits == 1);
}

TEST_CASE("transform") {
  REQUIRE(run("integrate --chart spherical --span 2 --samples 8 --seed 5 --out " + path("s.jsonl")) == 0);
  REQUIRE(run("transform " + path("s.jsonl") + " --from spherical --to relative --out " + path("r.jsonl")) == 0);
  REQUIRE(run("transform " + path("r.jsonl") + " --from relative --to spherical --out " + path("s2.jsonl")) == 0);
  REQUIRE(run("transform " + path("s2.jsonl") + " --from spherical --to relative --out " + path("r2.jsonl")) == 0);
  REQUIRE(run("transform " + path("r2.jsonl") + " --from relative --to spherical --out " + path("s3.jsonl")) == 0);
  auto distance = [](const json& x, const json& y) {
    const auto a = numbers(x), b = numbers(y);
    REQUIRE(a.size() == b.size());
    double d = 0;
    for (size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
  };
  const auto s1 = read_jsonl("s.jsonl"), s2 = read_jsonl("s2.jsonl"), s3 = read_jsonl("s3.jsonl");
  REQUIRE(s1.size() == s2.size());
  REQUIRE(s2.size() == s3.size());
  double drift = 0, worst = 0;
  for (size_t i = 0; i < s1.size(); ++i) {
    // integrated samples sit off the pairing constraint by their residual; the first pass projects it away
    drift = std::max(drift, distance(s1[i]["state"], s2[i]["state"]));
    worst = std::max(worst, distance(s2[i]["state"], s3[i]["state"]));
    CHECK(s2[i]["t_phys"].get<double>() == doctest::Approx(s1[i]["t"].get<double>()));
  }
  CHECK(drift < 1e-10);
  CHECK(worst < 1e-12);

  // regularized to reduced, with the physical time reconstructed
  REQUIRE(run("integrate --chart reg_mu_z --span 2 --samples 20 --seed 5 --out " + path("z.jsonl") + " --report " +
              path("z_report.json")) == 0);
  const json zrep = json::parse(read_file("z_report.json"));
  const std::string level =
      " --mu " + std::to_string(zrep["mu"].get<double>()) + " --energy " + std::to_string(zrep["energy"].get<double>());
  CHECK(run("transform " + path("z.jsonl") + " --from reg_mu_z --to reduced") == 2);
  REQUIRE(run("transform " + path("z.jsonl") + " --from reg_mu_z --to reduced --out " + path("zr.jsonl") + level) == 0);
  const auto z = read_jsonl("z.jsonl"), zr = read_jsonl("zr.jsonl");
  REQUIRE(z.size() == zr.size());
  for (size_t i = 0; i < z.size(); ++i) {
    REQUIRE(zr[i].contains("state"));
    CHECK(zr[i]["t_phys"].get<double>() == doctest::Approx(z[i]["state"]["t_phys"].get<double>()));
  }

  // the collision manifold has no preimage
  const double k = 1 / std::sqrt(3.0);
  write_file("r0.jsonl",
             json{{"t", 0},
                  {"state",
                   {{"r", 0}, {"v", -2.4}, {"mu_t", 0}, {"c", {k, k, k}}, {"alpha", {0, 0, 0}}}}}.dump() + "\n" +
                 json{{"t", 1},
                      {"state",
                       {{"r", 0.5}, {"v", -1}, {"mu_t", 0}, {"c", {k, k, k}}, {"alpha", {0, 0, 0}}}}}.dump() + "\n");
  REQUIRE(run("transform " + path("r0.jsonl") + " --from blowup_round --to reg_round --mu 0 --energy -1 --out " +
              path("r0_out.jsonl")) == 0);
  const auto r0 = read_jsonl("r0_out.jsonl");
  REQUIRE(r0.size() == 2);
  CHECK(r0[0].contains("error"));
  CHECK(r0[1].contains("state"));

  write_file("garbage.jsonl", "{\"t\": 0}\n");
  CHECK(run("transform " + path("garbage.jsonl") + " --from relative --to spherical") == 2);
}

TEST_CASE("potential and covering commands") {
  REQUIRE(run("potential --chart round --resolution 21 --out " + path("v.csv")) == 0);
  std::istringstream is(read_file("v.csv"));
  std::string line;
  std::getline(is, line);
  CHECK(line == "u,v,V");
  int rows = 0, infs = 0;
  double vmin = INFINITY;
  while (std::getline(is, line)) {
    ++rows;
    const std::string last = line.substr(line.rfind(',') + 1);
    if (last == "inf") ++infs;
    else vmin = std::min(vmin, std::stod(last));
  }
  // both hemispheres
  CHECK(rows == 2 * 21 * 21);
  CHECK(vmin == doctest::Approx(3).epsilon(1e-6));

  REQUIRE(run("potential --field W --resolution 21 --out " + path("w.csv")) == 0);
  CHECK(read_file("w.csv").find("inf") == std::string::npos);
  CHECK(run("potential --resolution 1") == 2);

  REQUIRE(run("covering --samples 200 --seed 2 --out " + path("cov.csv") + " > " + path("cov.json")) == 0);
  const json cov = json::parse(read_file("cov.json"));
  CHECK(cov["histogram"]["4"] == 200);
  CHECK(cov["seed"] == 2);
}

TEST_CASE("check command") {
  CHECK(run("check covering > " + path("check.txt")) == 0);
  CHECK(read_file("check.txt").find("[PASS]") != std::string::npos);
}
