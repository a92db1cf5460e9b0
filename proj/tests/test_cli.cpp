#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path make_workspace() {
  const fs::path dir = fs::temp_directory_path() / "otma_cli_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path path = dir / name;
  std::ofstream out(path);
  out << body;
  return path;
}

int run_cli(const std::string& args) {
  const std::string command = std::string(OTMA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int raw = std::system(command.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("passing run exits 0 and writes a reproducible report") {
  const fs::path dir = make_workspace();
  const fs::path config = write_config(dir, "ok.json", R"({
    "command": "verify-conformal",
    "cost": {"kind": "quadratic"},
    "source_density": {"kind": "uniform"},
    "target_density": {"kind": "uniform"},
    "sample_count": 25,
    "points_csv": true
  })");

  const fs::path out = dir / "out";
  CHECK(run_cli(config.string() + " --out " + out.string()) == 0);
  const std::string report_a = slurp(out / "report.json");
  const std::string csv_a = slurp(out / "points.csv");
  CHECK(run_cli(config.string() + " --out " + out.string()) == 0);

  CHECK(report_a.find("\"pass\": true") != std::string::npos);
  CHECK(report_a == slurp(out / "report.json"));
  CHECK(csv_a == slurp(out / "points.csv"));
  CHECK(csv_a.rfind("px1,px2,px3,", 0) == 0);
}

TEST_CASE("flag overrides land in the emitted report") {
  const fs::path dir = make_workspace();
  const fs::path config = write_config(dir, "ok.json", R"({
    "command": "verify-conformal",
    "cost": {"kind": "quadratic"},
    "source_density": {"kind": "uniform"},
    "target_density": {"kind": "uniform"}
  })");
  const fs::path out = dir / "out";
  CHECK(run_cli(config.string() + " --seed 11 --samples 7 --tol 1e-6 --out " + out.string()) == 0);
  const std::string report = slurp(out / "report.json");
  CHECK(report.find("\"seed\": 11") != std::string::npos);
  CHECK(report.find("\"sample_count\": 7") != std::string::npos);
  CHECK(report.find("1e-06") != std::string::npos);
  // no per-point output was requested
  CHECK(!fs::exists(out / "points.csv"));
}

TEST_CASE("tolerance failure exits 1 but still writes the report") {
  const fs::path dir = make_workspace();
  const fs::path config = write_config(dir, "fail.json", R"({
    "command": "verify-conformal",
    "cost": {"kind": "exp"},
    "source_density": {"kind": "uniform"},
    "target_density": {"kind": "uniform"},
    "sample_count": 20
  })");
  const fs::path out = dir / "out";
  CHECK(run_cli(config.string() + " --out " + out.string()) == 1);
  CHECK(slurp(out / "report.json").find("\"pass\": false") != std::string::npos);
}

TEST_CASE("configuration problems exit 2 without a report") {
  const fs::path dir = make_workspace();
  const fs::path out = dir / "out";

  CHECK(run_cli((dir / "missing.json").string()) == 2);

  const fs::path malformed = write_config(dir, "malformed.json", "{not json");
  CHECK(run_cli(malformed.string() + " --out " + out.string()) == 2);

  const fs::path unknown = write_config(dir, "unknown.json", R"({"command": "fly"})");
  CHECK(run_cli(unknown.string() + " --out " + out.string()) == 2);

  const fs::path bad_f = write_config(dir, "bad_f.json", R"({
    "command": "sg-demo",
    "coriolis_f": 2.0,
    "source_density": {"kind": "uniform"},
    "target_density": {"kind": "uniform"}
  })");
  CHECK(run_cli(bad_f.string() + " --out " + out.string()) == 2);

  CHECK(!fs::exists(out / "report.json"));
}
