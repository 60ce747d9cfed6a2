// Command-line front end. Talks to the solver only through the C API.
#include <cstdio>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mazt/mazt.h"

namespace {

void print_summary(const std::string& text) {
  const auto sum = nlohmann::json::parse(text, nullptr, false);
  if (sum.is_discarded()) return;
  for (const auto& c : sum.value("checks", nlohmann::json::array())) {
    const bool pass = c.value("pass", false);
    std::printf("%s  %s", pass ? "PASS" : "FAIL",
                c.value("check", std::string()).c_str());
    if (c.contains("margin") && c["margin"].is_number()) {
      std::printf("  (margin %.3g)", c["margin"].get<double>());
    }
    std::printf("\n");
  }
  for (const auto& w : sum.value("warnings", nlohmann::json::array())) {
    std::printf("warning: %s\n", w.get<std::string>().c_str());
  }
  if (sum.contains("error")) {
    std::printf("error: %s\n",
                sum["error"].value("message", std::string()).c_str());
  }
  std::printf("status: %s\n", sum.value("status", std::string()).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monge-Ampere zero-temperature toolkit on the flat torus"};
  app.set_version_flag("--version", mazt_version());
  std::string kind;
  std::string config;
  std::string out_dir;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("kind", kind, "solve | envelope | sweep-beta | hele-shaw | geodesic")
      ->required()
      ->check(CLI::IsMember({"solve", "envelope", "sweep-beta", "hele-shaw",
                             "geodesic"}));
  app.add_option("--config", config, "Scenario file")->required();
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 4;
  }

  int exit_code = 0;
  char* summary = nullptr;
  char* message = nullptr;
  const mazt_status st =
      mazt_scenario_run(kind.c_str(), config.c_str(), threads,
                        out_dir.empty() ? nullptr : out_dir.c_str(), &exit_code,
                        &summary, &message);
  if (st != MAZT_OK) {
    std::fprintf(stderr, "mazt: %s: %s\n", mazt_status_name(st),
                 mazt_last_error());
    return 3;
  }
  if (summary && *summary) print_summary(summary);
  if (exit_code == 4 && message) {
    std::fprintf(stderr, "mazt: config error: %s\n", message);
  }
  mazt_string_free(summary);
  mazt_string_free(message);
  return exit_code;
}
