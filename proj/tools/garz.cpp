#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"GARZ finite-volume solver and verification harness"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  int levels = 4;

  auto add = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "JSON run configuration")->required();
    sub->add_option("--out", out, "output directory (overrides output_dir)");
    return sub;
  };
  auto* run = add("run", "march a configuration and write snapshots and diagnostics");
  auto* riemann = add("riemann", "run a Riemann configuration against the exact solution");
  auto* converge = add("converge", "refinement study over successive grid halvings");
  converge->add_option("--levels", levels, "number of levels (>= 3)");
  auto* check = add("check", "validate the model and run the interface property battery");

  CLI11_PARSE(app, argc, argv);

  const std::optional<std::string> dir = out.empty() ? std::nullopt : std::optional(out);
  if (run->parsed()) return garz::cli::cmd_run(config, dir);
  if (riemann->parsed()) return garz::cli::cmd_riemann(config, dir);
  if (converge->parsed()) return garz::cli::cmd_converge(config, levels, dir);
  if (check->parsed()) return garz::cli::cmd_check(config, dir);
  return 1;
}
