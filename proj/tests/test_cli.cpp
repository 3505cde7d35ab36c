#include <doctest.h>

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/app.hpp"

namespace fs = std::filesystem;
using planarcav::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / "planarcav_cli_test";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("identical invocations give identical bytes") {
  const std::vector<std::string> synth = {"synth", "odmr", "--seed", "17"};
  CHECK(call(synth).out == call(synth).out);
  const std::vector<std::string> sweep = {"sweep", "--x", "sic_nm:130:160:3", "--y", "dipole_rel_pos:0:1:3"};
  const Result a = call(sweep), b = call(sweep);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(call({"synth", "odmr", "--seed", "18"}).out != a.out);
}

TEST_CASE("an output file reproduces itself when fed back as the config") {
  const fs::path dir = scratch();
  const std::string first = (dir / "first.csv").string(), second = (dir / "second.csv").string();
  REQUIRE(call({"synth", "saturation", "--seed", "4", "--points", "12", "--out", first}).code == 0);
  REQUIRE(call({"synth", "--config", first, "--out", second}).code == 0);
  CHECK(slurp(first) == slurp(second));

  const std::string j1 = (dir / "ratio1.json").string(), j2 = (dir / "ratio2.json").string();
  REQUIRE(call({"window-ratio", "--sic-nm", "150", "--window-b", "925:1150:5", "--out", j1}).code == 0);
  REQUIRE(call({"window-ratio", "--config", j1, "--out", j2}).code == 0);
  CHECK(slurp(j1) == slurp(j2));
  const auto j = nlohmann::json::parse(slurp(j1));
  CHECK(j["config"]["sic-nm"] == "150");
  // explicit options win over the config file
  const auto over = nlohmann::json::parse(call({"window-ratio", "--config", j1, "--sic-nm", "140"}).out);
  CHECK(over["config"]["sic-nm"] == "140");
}

TEST_CASE("synthetic g2 trace fits back to a single emitter") {
  const fs::path dir = scratch();
  const std::string trace = (dir / "g2.csv").string();
  REQUIRE(call({"synth", "g2", "--seed", "3", "--out", trace}).code == 0);
  const Result r = call({"fit-g2", "--input", trace});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["dip"].get<double>() < 0.05);
  CHECK(j["emitters"] == 1);
  CHECK(j["single_photon_emitter"] == true);
  CHECK(j["fit"]["converged"] == true);
}

TEST_CASE("preselection from a synthetic polarization trace") {
  const fs::path dir = scratch();
  const std::string pol = (dir / "pol.csv").string();
  REQUIRE(call({"synth", "polarization", "--seed", "1", "--delta-pol", "14.16", "--out", pol}).code == 0);
  const auto j = nlohmann::json::parse(call({"preselect", "--input", pol}).out);
  CHECK(j["delta_pol_percent"].get<double>() == doctest::Approx(14.16).epsilon(1e-9));
  CHECK(j["accepted"] == false);
}

TEST_CASE("exit codes and error records") {
  const Result usage = call({"sweep", "--preset", "none"});
  CHECK(usage.code == 2);
  const auto rec = nlohmann::json::parse(usage.err.substr(0, usage.err.find('\n')));
  CHECK(rec["status"] == "error");
  CHECK(rec["exit_code"] == 2);
  CHECK(call({"no-such-command"}).code == 2);
  CHECK(call({"window-ratio", "--bogus", "1"}).code == 2);
  CHECK(call({"synth", "g2"}).code == 2);  // seed is required
  const Result missing = call({"fit-g2", "--input", "/nonexistent/trace.csv"});
  CHECK(missing.code != 0);
  CHECK(missing.out.empty());
  CHECK(call({"window-ratio", "--window-a", "1300:1400:5"}).code != 0);
}

TEST_CASE("reflectivity of a bare membrane") {
  const fs::path dir = scratch();
  const std::string stack = (dir / "stack.txt").string();
  {
    std::ofstream s(stack);
    s << "incidence air\nsic 500\nexit air\n";
  }
  const Result r = call({"reflectivity", "--stack", stack, "--lambda-min", "900", "--lambda-max", "910"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("wavelength", 0) == 0) continue;
    const double R = std::stod(line.substr(line.find(',') + 1));
    CHECK(R >= 0.0);
    CHECK(R <= 1.0);
    ++rows;
  }
  CHECK(rows == 11);
}

TEST_CASE("coarse thickness sweep peaks at the reference design") {
  const Result r = call({"sweep", "--x", "upper_silver_nm:20:40:3", "--y", "sic_nm:130:160:3"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line, best;
  double best_value = -1.0;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("upper", 0) == 0) continue;
    const double v = std::stod(line.substr(line.rfind(',') + 1));
    if (v > best_value) {
      best_value = v;
      best = line.substr(0, line.rfind(','));
    }
  }
  CHECK(best == "30,145");
  CHECK(best_value > 35.0);
}

#ifdef PLANARCAV_TOOL
TEST_CASE("installed binary returns the usage exit code") {
  const std::string cmd = std::string(PLANARCAV_TOOL) + " sweep --preset none > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 2);
}
#endif
