#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace {

std::string cli_binary() {
  const char* env = std::getenv("GHSHIFT_CLI");
  REQUIRE(env != nullptr);
  return env;
}

struct RunResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the tool through the shell, capturing exit code and both streams.
RunResult run(const std::string& args, const std::string& env_prefix = {}) {
  static int counter = 0;
  const std::string tag = "cli_run_" + std::to_string(counter++);
  const std::string out_path = tag + ".out", err_path = tag + ".err";
  const std::string cmd =
      env_prefix + cli_binary() + " " + args + " >" + out_path + " 2>" + err_path;
  const int st = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  REQUIRE(out.good());
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

const char* kCsvHeader =
    "theta_deg,prob_R1,prob_R2,prob_R3,prob_T1,prob_T2,prob_T3,"
    "D_r1,D_r2,D_t1,D_t2,D_t1_excess,D_t2_excess,flux_total";

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("").code == 2);
  CHECK(run("sweep --preset fig2 --no-such-flag").code == 2);
  CHECK(run("oracle1d --preset fig2").code == 2);  // --theta is required
  CHECK(run("sweep --preset fig2 --config x.json").code == 2);

  const RunResult r = run("sweep --preset nosuch --steps 5");
  CHECK(r.code == 2);
  CHECK(contains(r.err, "unknown_preset"));

  CHECK(run("sweep --preset fig2 --steps 5 --theta-max 95").code == 2);
  CHECK(run("sweep").code == 2);  // neither --preset nor --config
}

TEST_CASE("presets list the bundled configurations") {
  const RunResult r = run("presets");
  CHECK(r.code == 0);
  for (const char* name : {"fig2", "fig3", "fig4", "fig5"}) CHECK(contains(r.out, name));
}

TEST_CASE("preset JSON round-trips through the config loader") {
  const RunResult dump = run("presets --json fig2");
  REQUIRE(dump.code == 0);
  const auto j = nlohmann::json::parse(dump.out);
  CHECK(j["slab"]["omega1"] == 2.5);
  CHECK(j["slab"]["omega2"] == 3.5);
  CHECK(j["incident_state"] == "state1");

  write_file("cli_roundtrip.json", dump.out);
  const RunResult via_config = run("sweep --config cli_roundtrip.json --steps 7");
  const RunResult via_preset = run("sweep --preset fig2 --steps 7");
  CHECK(via_config.code == 0);
  CHECK(via_preset.code == 0);
  CHECK(via_config.out == via_preset.out);
  std::remove("cli_roundtrip.json");
}

TEST_CASE("config validation aggregates every violation") {
  write_file("cli_bad.json", R"({
    "slab": {"omega1": 1.0, "bogus": 3.0},
    "k0": -1.0,
    "sweep": {"theta_max_deg": 95.0, "steps": 1}
  })");
  const RunResult r = run("sweep --config cli_bad.json");
  CHECK(r.code == 2);
  CHECK(contains(r.err, "configuration rejected"));
  CHECK(contains(r.err, "bogus"));
  CHECK(contains(r.err, "89.9"));
  CHECK(contains(r.err, "at least 2"));
  CHECK(contains(r.err, "k0 must be positive"));
  CHECK(r.out.empty());
  std::remove("cli_bad.json");
}

TEST_CASE("a transparent slab sweep has unit flux and empty reflected-shift cells") {
  write_file("cli_trivial.json", R"({
    "slab": {"omega1": 0.0, "omega2": 0.0, "delta0": 100.0, "gamma": 0.0,
             "slab_length": 5.0, "k_l1": 0.1, "k_l2": 0.1},
    "k0": 0.8
  })");
  const RunResult r =
      run("sweep --config cli_trivial.json --steps 2 --theta-min 10 --theta-max 45");
  REQUIRE(r.code == 0);

  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == kCsvHeader);

  const auto row = split_csv(lines[2]);  // the 45 degree row
  REQUIRE(row.size() == 14);
  CHECK(std::stod(row[0]) == doctest::Approx(45.0));
  CHECK(std::stod(row[4]) == doctest::Approx(1.0).epsilon(1e-12));  // prob_T1
  CHECK(row[7].empty());                                            // D_r1: no reflected wave
  CHECK(row[8].empty());
  CHECK(std::stod(row[9]) == doctest::Approx(5.0).epsilon(1e-8));  // D_t1 = tan(45) L
  CHECK(std::abs(std::stod(row[11])) < 1e-6);                      // excess shift
  CHECK(std::stod(row[13]) == doctest::Approx(1.0).epsilon(1e-12));
  std::remove("cli_trivial.json");
}

TEST_CASE("sweep output is deterministic across runs and worker counts") {
  const std::string args = "sweep --preset fig5 --steps 101";
  const RunResult a = run(args);
  const RunResult b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);

  const RunResult serial = run(args, "GHSHIFT_THREADS=1 ");
  const RunResult wide = run(args, "GHSHIFT_THREADS=4 ");
  REQUIRE(serial.code == 0);
  REQUIRE(wide.code == 0);
  CHECK(serial.out == wide.out);
  CHECK(serial.out == a.out);
}

TEST_CASE("unnormalized incident vectors are normalized with a notice") {
  const char* slab = R"("slab": {"omega1": 3.5, "omega2": 3.5, "delta0": 100.0, "gamma": 0.1,
                                 "slab_length": 30.0, "k_l1": 0.1, "k_l2": 0.1}, "k0": 0.8)";
  write_file("cli_unnorm.json",
             std::string("{") + slab + R"(, "incident_state": [1.0, 1.0, 0.0]})");
  write_file("cli_super.json", std::string("{") + slab + R"(, "incident_state": "super12"})");

  const std::string range = " --steps 5 --theta-min 10 --theta-max 50";
  const RunResult un = run("sweep --config cli_unnorm.json" + range);
  const RunResult named = run("sweep --config cli_super.json" + range);
  REQUIRE(un.code == 0);
  REQUIRE(named.code == 0);
  CHECK(contains(un.err, "note:"));
  CHECK(contains(un.err, "normalized"));
  CHECK(un.out == named.out);
  std::remove("cli_unnorm.json");
  std::remove("cli_super.json");
}

TEST_CASE("jsonl sweeps mark undefined shifts as null") {
  write_file("cli_trivial2.json", R"({
    "slab": {"omega1": 0.0, "omega2": 0.0, "delta0": 50.0, "gamma": 0.0,
             "slab_length": 5.0, "k_l1": 0.1, "k_l2": 0.1},
    "k0": 0.8
  })");
  const RunResult r = run(
      "sweep --config cli_trivial2.json --steps 3 --theta-min 5 --theta-max 30 --format jsonl");
  REQUIRE(r.code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 3);
  const auto j = nlohmann::json::parse(lines[1]);
  CHECK(j["prob_T1"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j["D_r1"].is_null());
  CHECK(j["D_t1"].is_number());
  std::remove("cli_trivial2.json");
}

TEST_CASE("the 1D oracle reports transmission through a transparent slab") {
  write_file("cli_oracle1d.json", R"({
    "slab": {"omega1": 0.0, "omega2": 0.0, "delta0": 100.0, "gamma": 0.0,
             "slab_length": 10.0, "k_l1": 0.1, "k_l2": 0.1},
    "k0": 0.8
  })");
  const RunResult r = run("oracle1d --config cli_oracle1d.json --theta 17 --packet-width 30");
  REQUIRE(r.code == 0);

  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["command"] == "oracle1d");
  CHECK(j["theta_deg"] == 17.0);
  CHECK(j.contains("ky_fixed"));
  CHECK_FALSE(j["report"].contains("D_r"));  // shifts exist only in 2D reports
  CHECK(j["report"]["prob_T"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(j["warnings"].is_array());
  const auto nx = j["grid"]["nx"].get<std::size_t>();
  CHECK((nx & (nx - 1)) == 0);
  std::remove("cli_oracle1d.json");
}

TEST_CASE("overshooting the flight time trips the absorber leak and exits 3") {
  write_file("cli_leak.json", R"({
    "slab": {"omega1": 0.0, "omega2": 0.0, "delta0": 0.0, "gamma": 0.0,
             "slab_length": 0.0, "k_l1": 0.0, "k_l2": 0.0},
    "k0": 0.8
  })");
  const RunResult r = run(
      "oracle1d --config cli_leak.json --theta 0 --packet-width 10 --steps 1500 "
      "--force-absorber-width 8");
  CHECK(r.code == 3);
  CHECK(contains(r.err, "[forced]"));  // the sub-minimal absorber is warned about
  CHECK(contains(r.err, "absorber_leak"));
  std::remove("cli_leak.json");
}

TEST_CASE("the 2D oracle writes a full report and snapshot frames") {
  write_file("cli_free2d.json", R"({
    "slab": {"omega1": 0.0, "omega2": 0.0, "delta0": 0.0, "gamma": 0.0,
             "slab_length": 0.0, "k_l1": 0.0, "k_l2": 0.0},
    "k0": 1.6
  })");
  const RunResult r = run(
      "oracle2d --config cli_free2d.json --theta 30 --packet-width 6 --dt 1.0 "
      "--snapshot cli_snap.bin --snapshot-stride 20");
  REQUIRE(r.code == 0);

  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["command"] == "oracle2d");
  CHECK(j["grid"]["dt"] == 1.0);
  CHECK(j["report"]["prob_T"][0].get<double>() > 0.999);
  CHECK(j["report"]["D_t"][0].is_number());
  CHECK(std::abs(j["report"]["D_t_excess"][0].get<double>()) < 0.05);
  CHECK(j["report"]["D_r"][0].is_null());  // forward tail only, no reflected lobe
  CHECK(j["report"]["regions"]["transmitted"][0]["defined"] == true);
  CHECK(j["report"]["regions"]["transmitted"][0]["split"] == false);

  std::ifstream snap("cli_snap.bin", std::ios::binary);
  REQUIRE(snap.good());
  std::int64_t nx = 0, ny = 0;
  snap.read(reinterpret_cast<char*>(&nx), sizeof nx);
  snap.read(reinterpret_cast<char*>(&ny), sizeof ny);
  CHECK(nx == static_cast<std::int64_t>(j["grid"]["nx"].get<std::size_t>()));
  CHECK(ny == static_cast<std::int64_t>(j["grid"]["ny"].get<std::size_t>()));
  snap.close();
  std::remove("cli_snap.bin");
  std::remove("cli_free2d.json");
}
