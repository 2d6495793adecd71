#include "cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "garz/properties.hpp"
#include "garz/run.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace garz::cli {

namespace {

PiecewiseConstant parse_piecewise(const json& j, const char* what) {
  PiecewiseConstant pc;
  if (j.is_number()) {
    pc = PiecewiseConstant::constant(j.get<double>());
  } else if (j.is_array() && j.size() == 2) {
    pc.breakpoints = j[0].get<std::vector<double>>();
    pc.values = j[1].get<std::vector<double>>();
  } else if (j.is_object()) {
    pc.breakpoints = j.value("breakpoints", std::vector<double>{});
    pc.values = j.at("values").get<std::vector<double>>();
  } else {
    throw ConfigError(std::string(what) + ": expected a number, {breakpoints, values} or [breaks, values]");
  }
  pc.validate(what);
  return pc;
}

json piecewise_json(const PiecewiseConstant& pc) {
  return json{{"breakpoints", pc.breakpoints}, {"values", pc.values}};
}

FluxFamily make_family(const RunConfig& c) {
  return FluxFamily(VelocityModel::builtin(c.v_f, c.beta, c.epsilon));
}

MeshConfig make_config_mesh(const RunConfig& c, const FluxFamily& F) {
  return make_mesh(F, c.x_min, c.x_max, c.n_cells, c.t_end, c.lambda);
}

std::vector<double> snapshot_times(const RunConfig& c) {
  return c.snapshots.empty() ? std::vector<double>{c.t_end} : c.snapshots;
}

RunOptions run_options(const RunConfig& c) {
  RunOptions o;
  o.k_points = c.diagnostics.k_grid;
  o.residuals = c.diagnostics.enabled;
  o.n_test_functions = c.diagnostics.n_test_functions;
  o.seed = c.diagnostics.seed;
  return o;
}

fs::path output_dir(const RunConfig& c, const std::optional<std::string>& out) {
  fs::path dir = out ? fs::path(*out) : fs::path(c.output_dir);
  fs::create_directories(dir);
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

/// CSV with 17 significant digits per column.
void write_csv(const fs::path& path, const std::string& header,
               const std::vector<const std::vector<double>*>& cols) {
  std::FILE* fp = std::fopen(path.string().c_str(), "w");
  if (!fp) throw std::runtime_error("cannot write " + path.string());
  std::fprintf(fp, "%s\n", header.c_str());
  const std::size_t rows = cols.front()->size();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c)
      std::fprintf(fp, c == 0 ? "%.17g" : ",%.17g", (*cols[c])[i]);
    std::fputc('\n', fp);
  }
  std::fclose(fp);
}

std::vector<double> cell_centers(const MeshConfig& m) {
  std::vector<double> x(static_cast<std::size_t>(m.n_cells));
  for (int j = 0; j < m.n_cells; ++j) x[static_cast<std::size_t>(j)] = m.cell_center(j);
  return x;
}

json meta_json(const RunConfig& c, const MeshConfig& mesh, const FluxFamily& F) {
  return json{{"dx", mesh.dx()},
              {"dt", mesh.dt()},
              {"lambda", mesh.lambda},
              {"max_stable_lambda", max_stable_lambda(F)},
              {"L", F.lipschitz_bound()},
              {"epsilon", F.epsilon()},
              {"n_steps", mesh.n_steps()},
              {"t_final", mesh.n_steps() * mesh.dt()},
              {"config", resolved_json(c, mesh)}};
}

json l1_json(const L1Error& e) {
  return json{{"rho", e.rho}, {"w", e.w}, {"total", e.total()}};
}

json wave_json(const RiemannSolution& sol) {
  json j{{"type", wave_name(sol.wave1())}};
  if (const auto* s = std::get_if<Shock>(&sol.wave1())) j["speed"] = s->speed;
  if (const auto* r = std::get_if<Rarefaction>(&sol.wave1()))
    j["speeds"] = {r->speed_lo, r->speed_hi};
  return j;
}

template <class Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const AssumptionViolation& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const CflViolation& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const ConfigError& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const VacuumError& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const DomainError& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const RootNotBracketed& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const json::exception& e) {
    std::cerr << "config rejected: " << e.what() << '\n';
    return kConfigInvalid;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kInvariantBroken;
  } catch (const NoIntermediateState& e) {
    std::cerr << "no intermediate state: " << e.what() << '\n';
    return kNoIntermediate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}

/// L1 distance between a coarse state and the fine state averaged onto it.
L1Error aggregated_distance(const GridState& coarse, const GridState& fine, double dx_coarse) {
  L1Error e;
  for (std::size_t j = 0; j < coarse.size(); ++j) {
    const double u = 0.5 * (fine.u[2 * j] + fine.u[2 * j + 1]);
    const double w = 0.5 * (fine.w[2 * j] + fine.w[2 * j + 1]);
    e.rho += std::abs(coarse.u[j] - u) * dx_coarse;
    e.w += std::abs(coarse.w[j] - w) * dx_coarse;
  }
  return e;
}

double order(double coarse, double fine) {
  if (coarse <= 0.0 || fine <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  if (j.contains("model")) {
    const auto& m = j.at("model");
    c.v_f = m.value("v_f", c.v_f);
    c.beta = m.value("beta", c.beta);
    c.epsilon = m.value("epsilon", c.epsilon);
  }
  const auto& mesh = j.at("mesh");
  c.x_min = mesh.value("x_min", c.x_min);
  c.x_max = mesh.value("x_max", c.x_max);
  c.n_cells = mesh.at("n_cells").get<int>();
  if (mesh.contains("lambda") && !mesh.at("lambda").is_null()) c.lambda = mesh.at("lambda").get<double>();
  c.t_end = mesh.at("t_end").get<double>();

  if (j.contains("riemann")) {
    const auto& r = j.at("riemann");
    c.riemann = RiemannData{r.at("rho_l").get<double>(), r.at("w_l").get<double>(),
                            r.at("rho_r").get<double>(), r.at("w_r").get<double>()};
    c.x0 = r.value("x0", 0.0);
  }
  if (j.contains("initial")) {
    const auto& in = j.at("initial");
    c.initial = InitialData{parse_piecewise(in.at("rho0"), "rho0"), parse_piecewise(in.at("w0"), "w0")};
  }
  if (!c.initial && !c.riemann) throw ConfigError("config needs an 'initial' or a 'riemann' block");

  if (j.contains("snapshots")) c.snapshots = j.at("snapshots").get<std::vector<double>>();
  if (j.contains("diagnostics")) {
    const auto& d = j.at("diagnostics");
    c.diagnostics.enabled = d.value("enabled", c.diagnostics.enabled);
    c.diagnostics.k_grid = d.value("k_grid", c.diagnostics.k_grid);
    c.diagnostics.n_test_functions = d.value("n_test_functions", c.diagnostics.n_test_functions);
    c.diagnostics.seed = d.value("seed", c.diagnostics.seed);
    if (c.diagnostics.k_grid < 2) throw ConfigError("diagnostics.k_grid must be >= 2");
    if (c.diagnostics.n_test_functions < 0) throw ConfigError("diagnostics.n_test_functions must be >= 0");
  }
  c.output_dir = j.value("output_dir", c.output_dir);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

InitialData initial_data(const RunConfig& c) {
  if (c.initial) return *c.initial;
  const RiemannData& r = *c.riemann;
  return InitialData{PiecewiseConstant{{c.x0}, {r.rho_l, r.rho_r}},
                     PiecewiseConstant{{c.x0}, {r.w_l, r.w_r}}};
}

json resolved_json(const RunConfig& c, const MeshConfig& mesh) {
  const InitialData init = initial_data(c);
  json j{{"model", {{"v_f", c.v_f}, {"beta", c.beta}, {"epsilon", c.epsilon}}},
         {"mesh",
          {{"x_min", mesh.x_min},
           {"x_max", mesh.x_max},
           {"n_cells", mesh.n_cells},
           {"lambda", mesh.lambda},
           {"t_end", mesh.t_end}}},
         {"initial",
          {{"rho0", piecewise_json(std::get<PiecewiseConstant>(init.rho0))},
           {"w0", piecewise_json(init.w0)}}},
         {"snapshots", snapshot_times(c)},
         {"diagnostics",
          {{"enabled", c.diagnostics.enabled},
           {"k_grid", c.diagnostics.k_grid},
           {"n_test_functions", c.diagnostics.n_test_functions},
           {"seed", c.diagnostics.seed}}},
         {"output_dir", c.output_dir}};
  if (c.riemann)
    j["riemann"] = {{"rho_l", c.riemann->rho_l}, {"w_l", c.riemann->w_l},
                    {"rho_r", c.riemann->rho_r}, {"w_r", c.riemann->w_r}, {"x0", c.x0}};
  return j;
}

std::string format_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

int threads_from_env() {
  const char* v = std::getenv("GARZ_THREADS");
  if (!v || !*v) return 0;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) return 0;
  return static_cast<int>(std::min(n, 256L));
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& out) {
  return guarded([&] {
    const RunConfig c = load_config(config_path);
    const FluxFamily F = make_family(c);
    const MeshConfig mesh = make_config_mesh(c, F);
    const InitialData init = initial_data(c);
    const auto times = snapshot_times(c);
    const RunResult res = run(init, F, mesh, times, run_options(c));

    const fs::path dir = output_dir(c, out);
    const auto x = cell_centers(mesh);
    for (std::size_t i = 0; i < times.size(); ++i)
      write_csv(dir / ("snap_" + format_time(times[i]) + ".csv"), "x,rho,w",
                {&x, &res.snapshots[i].u, &res.snapshots[i].w});
    write_json(dir / "report.json", to_json(res.report));
    write_json(dir / "meta.json", meta_json(c, mesh, F));
    std::cout << "run: " << res.report.n_steps << " steps, entropy violations "
              << res.report.entropy_violation_count << ", output in " << dir.string() << '\n';
    return int{kOk};
  });
}

int cmd_riemann(const std::string& config_path, const std::optional<std::string>& out) {
  return guarded([&] {
    const RunConfig c = load_config(config_path);
    if (!c.riemann) throw ConfigError("riemann command needs a 'riemann' block");
    const FluxFamily F = make_family(c);
    const MeshConfig mesh = make_config_mesh(c, F);
    const RiemannSolution sol = solve_riemann(F, *c.riemann);
    const auto times = snapshot_times(c);
    const RunResult res = run(initial_data(c), F, mesh, times, run_options(c));

    const fs::path dir = output_dir(c, out);
    const auto x = cell_centers(mesh);
    json snaps = json::array();
    for (std::size_t i = 0; i < times.size(); ++i) {
      const GridState& s = res.snapshots[i];
      std::vector<double> rho_exact(s.size()), w_exact(s.size());
      for (std::size_t j = 0; j < s.size(); ++j) {
        const double xi = x[j] - c.x0;
        const ProfileState p = s.t > 0.0 ? sol.evaluate(xi / s.t)
                                         : (xi < 0.0 ? ProfileState{c.riemann->rho_l, c.riemann->w_l}
                                                     : ProfileState{c.riemann->rho_r, c.riemann->w_r});
        rho_exact[j] = p.rho;
        w_exact[j] = p.w;
      }
      write_csv(dir / ("riemann_" + format_time(times[i]) + ".csv"), "x,rho_num,w_num,rho_exact,w_exact",
                {&x, &s.u, &s.w, &rho_exact, &w_exact});
      snaps.push_back({{"t", s.t}, {"l1_error", l1_json(oracle_l1_error(s, mesh, sol, c.x0))}});
    }
    const json summary{{"wave1", wave_name(sol.wave1())},
                       {"wave1_detail", wave_json(sol)},
                       {"rho_mid", sol.rho_mid()},
                       {"contact_speed", sol.contact_speed()},
                       {"contact_present", sol.has_contact()},
                       {"snapshots", snaps},
                       {"l1_error", snaps.back()["l1_error"]}};
    write_json(dir / "summary.json", summary);
    write_json(dir / "report.json", to_json(res.report));
    write_json(dir / "meta.json", meta_json(c, mesh, F));
    std::cout << "riemann: " << wave_name(sol.wave1()) << " + "
              << (sol.has_contact() ? "contact" : "no contact") << ", L1 error "
              << snaps.back()["l1_error"]["total"].get<double>() << '\n';
    return int{kOk};
  });
}

int cmd_converge(const std::string& config_path, int levels, const std::optional<std::string>& out) {
  return guarded([&] {
    if (levels < 3) throw ConfigError("converge needs --levels >= 3");
    const RunConfig c = load_config(config_path);
    const FluxFamily F = make_family(c);
    const MeshConfig base = make_config_mesh(c, F);
    // Every level reaches the same final time t_end = N0 dt0 exactly.
    const int n0 = base.n_steps();
    const double t_final = n0 * base.dt();
    std::optional<RiemannSolution> sol;
    if (c.riemann) sol = solve_riemann(F, *c.riemann);
    const InitialData init = initial_data(c);

    std::vector<MeshConfig> meshes;
    for (int l = 0; l < levels; ++l) {
      MeshConfig m = base;
      m.n_cells = base.n_cells << l;
      m.t_end = t_final;
      validate_mesh(m, F);
      meshes.push_back(m);
    }
    std::vector<GridState> finals(static_cast<std::size_t>(levels));
    std::vector<DiagnosticsReport> reports(static_cast<std::size_t>(levels));
    RunOptions opt;
    opt.k_points = c.diagnostics.enabled ? c.diagnostics.k_grid : 0;

    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(levels));
    auto worker = [&] {
      for (int l; (l = next++) < levels;) {
        try {
          auto r = run(init, F, meshes[l], {t_final}, opt);
          finals[l] = std::move(r.snapshots.front());
          reports[l] = std::move(r.report);
        } catch (...) {
          errors[l] = std::current_exception();
        }
      }
    };
    const int threads = std::min(threads_from_env(), levels);
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);

    const fs::path dir = output_dir(c, out);
    json jl = json::array();
    std::vector<double> oracle;
    for (int l = 0; l < levels; ++l) {
      const auto x = cell_centers(meshes[l]);
      write_csv(dir / ("level_" + std::to_string(l) + ".csv"), "x,rho,w", {&x, &finals[l].u, &finals[l].w});
      json e{{"level", l},
             {"n_cells", meshes[l].n_cells},
             {"dx", meshes[l].dx()},
             {"dt", meshes[l].dt()},
             {"n_steps", reports[l].n_steps},
             {"t_end", finals[l].t},
             {"entropy_violations", reports[l].entropy_violation_count},
             {"mass_defect", reports[l].mass_defect}};
      if (sol) {
        const L1Error err = oracle_l1_error(finals[l], meshes[l], *sol, c.x0);
        oracle.push_back(err.total());
        e["oracle_l1"] = l1_json(err);
      }
      jl.push_back(e);
    }
    json self = json::array(), self_order = json::array(), oracle_order = json::array();
    std::vector<double> dist;
    for (int l = 0; l + 1 < levels; ++l) {
      const L1Error d = aggregated_distance(finals[l], finals[l + 1], meshes[l].dx());
      dist.push_back(d.total());
      self.push_back({{"levels", {l, l + 1}}, {"rho", d.rho}, {"w", d.w}, {"total", d.total()}});
    }
    for (std::size_t i = 0; i + 1 < dist.size(); ++i) self_order.push_back(nullable(order(dist[i], dist[i + 1])));
    for (std::size_t i = 0; i + 1 < oracle.size(); ++i)
      oracle_order.push_back(nullable(order(oracle[i], oracle[i + 1])));

    json result{{"t_end", t_final}, {"levels", jl}, {"self_distance", self}, {"self_order", self_order}};
    double empirical = std::numeric_limits<double>::quiet_NaN();
    if (sol) {
      result["oracle_order"] = oracle_order;
      result["wave1"] = wave_name(sol->wave1());
      empirical = order(oracle[oracle.size() - 2], oracle.back());
    } else if (dist.size() >= 2) {
      empirical = order(dist[dist.size() - 2], dist.back());
    }
    result["empirical_order"] = nullable(empirical);
    write_json(dir / "convergence.json", result);
    std::cout << "converge: " << levels << " levels, empirical order "
              << (std::isfinite(empirical) ? std::to_string(empirical) : std::string("n/a")) << '\n';
    return int{kOk};
  });
}

int cmd_check(const std::string& config_path, const std::optional<std::string>& out) {
  return guarded([&] {
    const RunConfig c = load_config(config_path);
    const FluxFamily F = make_family(c);
    make_config_mesh(c, F);
    validate_initial(initial_data(c), F.epsilon());

    BatteryOptions bo;
    bo.seed = c.diagnostics.seed;
    const BatteryResult r = run_property_battery(F, bo);
    json props = json::array();
    for (const auto& p : r.properties)
      props.push_back({{"name", p.name}, {"pass", p.pass}, {"worst", p.worst}, {"tol", p.tol},
                       {"samples", p.samples}});
    const json j{{"model", {{"v_f", c.v_f}, {"beta", c.beta}, {"epsilon", c.epsilon}}},
                 {"L", F.lipschitz_bound()},
                 {"mu", r.mu},
                 {"properties", props},
                 {"all_pass", r.all_pass()}};
    const fs::path dir = output_dir(c, out);
    write_json(dir / "check.json", j);
    for (const auto& p : r.properties)
      std::cout << (p.pass ? "PASS " : "FAIL ") << p.name << " (worst " << p.worst << ")\n";
    return r.all_pass() ? int{kOk} : int{kPropertyFailed};
  });
}

}  // namespace garz::cli
