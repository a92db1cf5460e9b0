// Command-line front end: reads a JSON run configuration, applies flag
// overrides, executes it through the C API, and writes report.json (and
// optionally points.csv) to the output directory.
//
// Exit codes: 0 all configured tolerances pass, 1 tolerance failure,
// 2 configuration or validation error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "otma.h"

namespace {

int fail_config(const std::string& message) {
  std::cerr << "otma: " << message << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"otma — pseudo-Riemannian optimal-transport / Monge-Ampère verification toolkit"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<double> tol;
  std::optional<std::string> out_dir;
  app.add_option("config", config_path, "JSON run configuration")->required();
  app.add_option("--seed", seed, "override config.seed");
  app.add_option("--samples", samples, "override config.sample_count");
  app.add_option("--tol", tol, "override config.tolerance");
  app.add_option("--out", out_dir, "output directory (overrides config.output_dir)");
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config_path);
  if (!in) return fail_config("cannot open config file: " + config_path);
  std::stringstream buffer;
  buffer << in.rdbuf();

  nlohmann::ordered_json config;
  try {
    config = nlohmann::ordered_json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    return fail_config(std::string("config parse error: ") + e.what());
  }
  if (!config.is_object()) return fail_config("config: expected a JSON object");

  if (seed) config["seed"] = *seed;
  if (samples) config["sample_count"] = *samples;
  if (tol) config["tolerance"] = *tol;
  if (out_dir) config["output_dir"] = *out_dir;

  std::string output_dir = ".";
  if (config.contains("output_dir")) {
    if (!config["output_dir"].is_string()) return fail_config("config.output_dir: expected a string");
    output_dir = config["output_dir"].get<std::string>();
  }

  char* report = nullptr;
  char* csv = nullptr;
  const otma_status status = otma_run_json(config.dump().c_str(), &report, &csv);
  if (status != OTMA_OK && status != OTMA_ERR_TOLERANCE) {
    return fail_config(otma_last_error());
  }

  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) {
    otma_string_free(report);
    otma_string_free(csv);
    return fail_config("cannot create output directory '" + output_dir + "': " + ec.message());
  }

  const auto report_path = std::filesystem::path(output_dir) / "report.json";
  {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) {
      otma_string_free(report);
      otma_string_free(csv);
      return fail_config("cannot write " + report_path.string());
    }
    out << report;
  }
  if (csv) {
    std::ofstream out(std::filesystem::path(output_dir) / "points.csv", std::ios::binary);
    out << csv;
  }
  otma_string_free(report);
  otma_string_free(csv);

  if (status == OTMA_ERR_TOLERANCE) {
    std::cout << "FAIL: tolerance check failed; see " << report_path.string() << "\n";
    return 1;
  }
  std::cout << "PASS: report written to " << report_path.string() << "\n";
  return 0;
}
