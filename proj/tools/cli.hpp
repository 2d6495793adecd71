#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "garz/grid.hpp"
#include "garz/riemann.hpp"

namespace garz::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigInvalid = 2,
  kInvariantBroken = 3,
  kNoIntermediate = 4,
  kPropertyFailed = 5,
};

struct DiagnosticsConfig {
  bool enabled = true;  // trajectory residuals: fronts, EI, WF
  int k_grid = 11;
  int n_test_functions = 5;
  std::uint64_t seed = 0;
};

struct RunConfig {
  double v_f = 1.0;
  double beta = 0.25;
  double epsilon = 0.2;

  double x_min = -1.0;
  double x_max = 1.0;
  int n_cells = 200;
  std::optional<double> lambda;
  double t_end = 0.5;

  std::optional<InitialData> initial;
  std::optional<RiemannData> riemann;
  double x0 = 0.0;

  std::vector<double> snapshots;  // defaults to {t_end}
  DiagnosticsConfig diagnostics;
  std::string output_dir = "out";
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Initial datum of a config: the explicit one, or the Riemann step at x0.
InitialData initial_data(const RunConfig& c);

/// Config with every default made explicit.
nlohmann::json resolved_json(const RunConfig& c, const MeshConfig& mesh);

/// Shortest decimal spelling used in snapshot file names.
std::string format_time(double t);

/// Worker cap from GARZ_THREADS (0 or unset: sequential).
int threads_from_env();

int cmd_run(const std::string& config_path, const std::optional<std::string>& out = {});
int cmd_riemann(const std::string& config_path, const std::optional<std::string>& out = {});
int cmd_converge(const std::string& config_path, int levels = 4,
                 const std::optional<std::string>& out = {});
int cmd_check(const std::string& config_path, const std::optional<std::string>& out = {});

}  // namespace garz::cli
