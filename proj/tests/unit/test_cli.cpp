#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dpp/cli.hpp"
#include "dpp/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dpp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dpp::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dpp-cli-test-" + name);
  fs::remove_all(dir);
  return dir;
}

std::string scenario(const std::string& name) { return std::string(DPP_SCENARIO_DIR) + "/" + name + ".json"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("run writes its reports and passes on power-min") {
  const auto dir = scratch("run");
  const auto r = cli({"run", "--scenario", scenario("power-min"), "--V", "10", "--T", "100000",
                      "--ensemble", "2", "--trace", "--out", dir.string()});
  CHECK(r.code == 0);
  for (const char* f : {"summary.json", "stability.json", "bounds.json", "constraints.json", "tail.csv",
                        "trace.csv", "report.txt", "config.json"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  const auto summary = load(dir / "summary.json");
  CHECK(summary["scenario_hash"].get<std::string>().size() == 16);
  CHECK(summary["seed"] == 1);
  CHECK(summary["runs"].size() == 2);
  CHECK(slurp(dir / "trace.csv").starts_with("# scenario_hash="));
  CHECK(r.out.find("PASS") != std::string::npos);
}

TEST_CASE("exit status 2 for configuration errors") {
  const auto dir = scratch("bad");
  CHECK(cli({"run", "--scenario", scenario("power-min"), "--V", "-1", "--out", dir.string()}).code == 2);
  const auto missing = cli({"run", "--scenario", scenario("nope"), "--out", dir.string()});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("scenario") != std::string::npos);
  CHECK(cli({"run", "--scenario", scenario("power-min"), "--T", "0", "--out", dir.string()}).code == 2);
  CHECK(cli({"run", "--scenario", scenario("power-min"), "--controller", "magic", "--out", dir.string()}).code == 2);
  CHECK(cli({"run", "--scenario", scenario("power-min"), "--controller", "fixed-action", "--action", "nap",
             "--out", dir.string()}).code == 2);
  CHECK(cli({"run", "--scenario", scenario("power-min"), "--V", "1,2", "--out", dir.string()}).code == 2);
  CHECK(cli({"run"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"run", "--config", (dir / "absent.json").string()}).code == 2);

  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"scenario": ")" << scenario("power-min") << R"(", "V": -1})";
  CHECK(cli({"run", "--config", (dir / "cfg.json").string(), "--out", dir.string()}).code == 2);
  std::ofstream(dir / "typo.json") << R"({"scenari": "x"})";
  const auto typo = cli({"run", "--config", (dir / "typo.json").string()});
  CHECK(typo.code == 2);
  CHECK(typo.err.find("scenari") != std::string::npos);
}

TEST_CASE("exit status 1 when stability fails") {
  const auto dir = scratch("idle");
  const auto r = cli({"run", "--scenario", scenario("power-min"), "--controller", "fixed-action", "--action",
                      "idle", "--T", "5000", "--ensemble", "1", "--out", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL") != std::string::npos);
}

TEST_CASE("omega-only controller run") {
  const auto dir = scratch("omega");
  const auto r = cli({"run", "--scenario", scenario("constrained-2q"), "--controller", "omega-only", "--epsilon",
                      "0.1", "--T", "100000", "--ensemble", "1", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(cli({"run", "--scenario", scenario("constrained-2q"), "--controller", "omega-only", "--epsilon", "0.5",
             "--out", dir.string()}).code == 2);
}

TEST_CASE("flags override config fields and configs round-trip to identical traces") {
  const auto dir = scratch("roundtrip");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << json{{"scenario", scenario("constrained-2q")}, {"V", 3.0}, {"T", 20000},
                                          {"seed", 9}, {"ensemble", 1}, {"trace", true},
                                          {"out", (dir / "a").string()}}
                                         .dump();
  REQUIRE(cli({"run", "--config", (dir / "cfg.json").string()}).code == 0);
  REQUIRE(cli({"run", "--config", (dir / "a" / "config.json").string(), "--out", (dir / "b").string()}).code == 0);
  CHECK(slurp(dir / "a" / "trace.csv") == slurp(dir / "b" / "trace.csv"));

  REQUIRE(cli({"run", "--config", (dir / "cfg.json").string(), "--V", "7", "--out", (dir / "c").string()}).code == 0);
  CHECK(load(dir / "c" / "summary.json")["V"] == 7.0);
  CHECK(load(dir / "c" / "config.json")["T"] == 20000);

  const auto cfg = dpp::cli::ExperimentConfig::from_json(load(dir / "a" / "config.json"));
  CHECK(cfg.to_json() == load(dir / "a" / "config.json"));
}

TEST_CASE("sweep tabulates the tradeoff") {
  const auto dir = scratch("sweep");
  const auto r = cli({"sweep", "--scenario", scenario("power-min"), "--V", "1,10,100,10", "--T", "100000",
                      "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.err.find("duplicate V") != std::string::npos);
  std::ifstream csv(dir / "sweep.csv");
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(csv, line)) {
    if (!line.starts_with('#')) rows.push_back(line);
  }
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].starts_with("V,seed,ybar0,gap"));
  const auto doc = load(dir / "sweep.json");
  REQUIRE(doc["runs"].size() == 3);
  double previous = 1e300;
  for (const auto& run : doc["runs"]) {
    const double gap = run["y_avg"][0].get<double>() - 0.5;
    CHECK(gap <= previous + 1e-12);
    previous = gap;
  }
  CHECK(cli({"sweep", "--scenario", scenario("power-min"), "--V", "5", "--out", dir.string()}).code == 2);
  CHECK(cli({"sweep", "--scenario", scenario("power-min"), "--V", "5,5", "--out", dir.string()}).code == 2);
}

TEST_CASE("oracle command") {
  const auto dir = scratch("oracle");
  const auto r = cli({"oracle", "--scenario", scenario("power-min"), "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto doc = json::parse(r.out);
  CHECK(doc["epsilon_max"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(doc["y0_opt"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(doc["curve"].size() == 1);
  CHECK(fs::exists(dir / ("oracle-" + doc["scenario_hash"].get<std::string>() + ".json")));

  const auto grid = cli({"oracle", "--scenario", scenario("power-min"), "--eps-grid", "0,0.25,0.5,0.6",
                         "--out", dir.string()});
  const auto g = json::parse(grid.out);
  REQUIRE(g["curve"].size() == 4);
  CHECK(g["curve"][1]["y0_opt"].get<double>() == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(g["curve"][3]["y0_opt"].is_null());

  fs::create_directories(dir);
  std::ofstream(dir / "overloaded.json") << R"({"K": 1, "M": 0, "y0_min": 0,
    "omega": [{"id": "w", "prob": 1, "payload": []}],
    "actions": {"w": [{"id": "a", "a": [2], "b": [1], "y": [0]}]}})";
  const auto inf = cli({"oracle", "--scenario", (dir / "overloaded.json").string(), "--out", dir.string()});
  CHECK(inf.code == 0);
  CHECK(inf.out == "infeasible\n");
  CHECK(cli({"oracle", "--scenario", (dir / "missing.json").string(), "--out", dir.string()}).code == 2);
}

TEST_CASE("verify re-runs diagnostics on a stored trace") {
  const auto dir = scratch("verify");
  REQUIRE(cli({"run", "--scenario", scenario("constrained-2q"), "--V", "10", "--T", "50000", "--ensemble", "1",
               "--trace", "--out", (dir / "run").string()}).code == 0);
  const auto r = cli({"verify", "--scenario", scenario("constrained-2q"), "--trace-file",
                      (dir / "run" / "trace.csv").string(), "--summary", (dir / "run" / "summary.json").string(),
                      "--out", (dir / "v").string()});
  CHECK(r.code == 0);
  const auto doc = load(dir / "v" / "verify.json");
  CHECK(doc["replay_exact"] == true);
  CHECK(doc.contains("bounds"));
  CHECK(doc["pass"] == true);

  // Corrupt one stored queue value: replay must catch it.
  std::string text = slurp(dir / "run" / "trace.csv");
  std::istringstream in(text);
  std::ostringstream edited;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.starts_with('#') && row++ == 101) {
      const auto last = line.rfind(',');
      line = line.substr(0, last + 1) + "12345.5";
    }
    edited << line << '\n';
  }
  std::ofstream(dir / "bad.csv") << edited.str();
  const auto bad = cli({"verify", "--scenario", scenario("constrained-2q"), "--trace-file",
                        (dir / "bad.csv").string(), "--out", (dir / "v2").string()});
  CHECK(bad.code == 1);
  CHECK(bad.out.find("MISMATCH at slot 100") != std::string::npos);
}

TEST_CASE("fixtures emit the corpus") {
  const auto dir = scratch("fixtures");
  CHECK(cli({"fixtures", "--out", dir.string()}).code == 0);
  for (const char* name : {"power-min", "constrained-2q", "opportunistic-3s"}) {
    const auto shipped = dpp::io::load_scenario(scenario(name));
    const auto emitted = dpp::io::load_scenario(dir / (std::string(name) + ".json"));
    CHECK(dpp::io::content_hash(shipped) == dpp::io::content_hash(emitted));
  }
  CHECK(fs::exists(dir / "corpus.json"));
}

TEST_CASE("help exits cleanly") { CHECK(cli({"--help"}).code == 0); }
