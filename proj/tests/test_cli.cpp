#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = CARBONX_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string stderr_text;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path errfile = dir / "stderr.txt";
  const std::string cmd = kCli + " " + args + " 2>" + errfile.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(errfile);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.stderr_text = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / "carbonx_cli_test" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// small but complete scenario: 2x2 cells, 50 years, SM-coupled injections
void write_synth_config(const fs::path& p) {
  std::ofstream out(p);
  out << R"({
    "name": "cli-smoke",
    "seed": 11,
    "n_lat": 2, "n_lon": 2,
    "start_year": 1850, "years": 50,
    "couplings": [{"driver": "SM", "lag": 1, "gain": 1.0,
                   "noise": {"phi": 0.0, "sigma": 0.05}, "scope": "all"}]
  })";
}

}  // namespace

TEST_CASE("missing input file fails with error JSON naming the path") {
  const auto dir = fresh_dir("missing");
  const fs::path cfg = dir / "run.json";
  {
    std::ofstream out(cfg);
    out << R"({"inputs": {"nbp": ")" << (dir / "no_such.grid").string() << R"("}})";
  }
  const auto r = run_cli("decompose --config " + cfg.string() + " --out " + dir.string(), dir);
  CHECK(r.exit_code == 3);
  CHECK(r.stderr_text.find("\"error\"") != std::string::npos);
  CHECK(r.stderr_text.find("no_such.grid") != std::string::npos);
}

TEST_CASE("malformed config exits with code 2") {
  const auto dir = fresh_dir("badcfg");
  const fs::path cfg = dir / "run.json";
  {
    std::ofstream out(cfg);
    out << "{ not json";
  }
  const auto r = run_cli("decompose --config " + cfg.string(), dir);
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("\"kind\":\"config\"") != std::string::npos);
  // missing required flag is also a config error
  const auto r2 = run_cli("decompose", dir);
  CHECK(r2.exit_code == 2);
}

TEST_CASE("synth, pipeline, and scorecard run end to end; extremes is deterministic") {
  const auto dir = fresh_dir("smoke");
  const fs::path synth_cfg = dir / "synth.json";
  write_synth_config(synth_cfg);

  const auto gen = run_cli("synth --config " + synth_cfg.string() + " --out " + dir.string(), dir);
  REQUIRE(gen.exit_code == 0);
  REQUIRE(fs::exists(dir / "nbp.grid"));
  REQUIRE(fs::exists(dir / "run_config.json"));
  REQUIRE(fs::exists(dir / "ground_truth.json"));

  // seed override changes the payload
  const auto alt = fresh_dir("smoke_alt");
  const auto gen2 = run_cli(
      "synth --config " + synth_cfg.string() + " --out " + alt.string() + " --seed 12", alt);
  REQUIRE(gen2.exit_code == 0);
  CHECK(slurp(dir / "nbp.grid") != slurp(alt / "nbp.grid"));

  const std::string rc = (dir / "run_config.json").string();
  const auto pipe =
      run_cli("pipeline --config " + rc + " --out " + (dir / "artifacts").string(), dir);
  REQUIRE(pipe.exit_code == 0);
  for (const char* f : {"thresholds.csv", "intensity.csv", "tce_events.csv", "attribution.csv",
                        "dominant.csv", "compound.csv", "regions_net.csv", "sensitivity.csv"})
    CHECK(fs::exists(dir / "artifacts" / f));

  const auto sc = run_cli("scorecard --config " + rc + " --out " +
                              (dir / "artifacts").string() + " --truth " +
                              (dir / "ground_truth.json").string(),
                          dir);
  CHECK(sc.exit_code == 0);
  CHECK(fs::exists(dir / "artifacts" / "scorecard.json"));

  // rerunning one stage into a second directory reproduces the bytes
  const auto e1 = run_cli("extremes --config " + rc + " --out " + (dir / "e1").string(), dir);
  const auto e2 = run_cli("extremes --config " + rc + " --out " + (dir / "e2").string(), dir);
  REQUIRE(e1.exit_code == 0);
  REQUIRE(e2.exit_code == 0);
  CHECK(slurp(dir / "e1" / "thresholds.csv") == slurp(dir / "e2" / "thresholds.csv"));
  CHECK(slurp(dir / "e1" / "intensity.csv") == slurp(dir / "e2" / "intensity.csv"));
}

TEST_CASE("svg artifacts appear only when requested") {
  const auto dir = fresh_dir("svg");
  const fs::path synth_cfg = dir / "synth.json";
  write_synth_config(synth_cfg);
  REQUIRE(run_cli("synth --config " + synth_cfg.string() + " --out " + dir.string(), dir)
              .exit_code == 0);
  const std::string rc = (dir / "run_config.json").string();
  REQUIRE(run_cli("extremes --config " + rc + " --out " + (dir / "plain").string(), dir)
              .exit_code == 0);
  CHECK(!fs::exists(dir / "plain" / "intensity.svg"));
  REQUIRE(run_cli("extremes --svg --config " + rc + " --out " + (dir / "plotted").string(), dir)
              .exit_code == 0);
  CHECK(fs::exists(dir / "plotted" / "intensity.svg"));
  const auto svg = slurp(dir / "plotted" / "intensity.svg");
  CHECK(svg.find("<svg") != std::string::npos);
}
