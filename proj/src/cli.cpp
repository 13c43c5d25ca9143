#include "nch/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "nch/config.hpp"
#include "nch/driver.hpp"
#include "nch/errors.hpp"
#include "nch/io.hpp"
#include "nch/oracle/verify.hpp"

namespace nch::cli {

namespace {

namespace fs = std::filesystem;

struct Overrides {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<long> max_steps;
};

RunConfig load_with_overrides(const std::string& path, const Overrides& o) {
  RunConfig cfg = load_config(path);
  if (const char* env = std::getenv("OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.seed) cfg.seed = *o.seed;
  if (o.max_steps) cfg.max_steps = *o.max_steps;
  validate(cfg);
  return cfg;
}

int cmd_check(const std::string& path, std::ostream& out) {
  const RunConfig cfg = load_config(path);
  const GridGeometry g(cfg.grid_n, cfg.grid_l);
  const SpectralCache cache(g);
  const SampledKernel kernel = sample_kernel(kernel_params(cfg), cache);
  const SchemeConfig scheme = scheme_config(cfg);
  const SolvabilityReport r = check_solvability(scheme, kernel, cache);
  out << "scheme        = " << to_string(scheme.scheme) << "\n"
      << "tau           = " << format_double(scheme.tau) << "\n"
      << "gamma0        = " << format_double(r.gamma0) << "\n"
      << "conv_one      = " << format_double(r.conv_one) << "\n"
      << "beta          = " << format_double(r.beta) << "\n"
      << "S             = " << format_double(r.stabilization) << "\n"
      << "per_mode_min  = " << format_double(r.per_mode_min) << "\n"
      << "margin        = " << format_double(r.margin) << "\n";
  if (r.cj_tau_bound) out << "cj_tau_bound  = " << format_double(*r.cj_tau_bound) << "\n";
  out << "verdict       = " << (r.admissible ? "admissible" : "inadmissible") << "\n";
  if (!r.admissible) out << "reason        = " << r.detail << "\n";
  return r.admissible ? kOk : kInadmissible;
}

void write_summary(const fs::path& path, const RunResult& result, double wall_seconds,
                   const Model& model) {
  std::ofstream s(path, std::ios::trunc);
  if (!s) throw IoError("cannot write '" + path.string() + "'");
  s << "termination = " << to_string(result.termination) << "\n"
    << "steps = " << result.final_state.step_index << "\n"
    << "final_time = " << format_double(result.final_state.time) << "\n"
    << "final_energy = " << format_double(energy(result.final_state.u_curr, model)) << "\n"
    << "equilibrium_residual = " << format_double(result.equilibrium_residual) << "\n"
    << "wall_time_s = " << format_double(wall_seconds) << "\n";
  if (!result.error_detail.empty()) s << "error = " << result.error_detail << "\n";
}

int cmd_run(const std::string& path, const Overrides& overrides,
            const std::optional<std::string>& resume, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = load_with_overrides(path, overrides);
  const GridGeometry g(cfg.grid_n, cfg.grid_l);
  const SpectralCache cache(g);
  const SampledKernel kernel = sample_kernel(kernel_params(cfg), cache);
  const SchemeConfig scheme = scheme_config(cfg);

  std::optional<SchemeState> state;
  if (resume) {
    try {
      state.emplace(read_checkpoint(*resume));
    } catch (const Error& e) {
      throw ConfigError("--resume", e.what());
    }
    if (!(state->u_curr.geometry() == g)) {
      throw ConfigError("--resume", "checkpoint grid does not match grid.N / grid.L");
    }
  } else {
    state.emplace(SchemeState{initial_field(cfg, g), std::nullopt, std::nullopt, 0, 0.0});
  }

  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  {
    std::ofstream resolved(dir / "config.resolved", std::ios::trunc);
    resolved << emit_config(cfg);
  }
  const fs::path csv = dir / "diagnostics.csv";
  if (!resume && fs::exists(csv)) fs::remove(csv);
  DiagnosticsWriter writer(csv);
  RunOptions options = run_options(cfg);
  options.on_record = [&](const DiagnosticsRecord& r) { writer.write(r); };
  options.on_snapshot = [&](const SchemeState& s) {
    write_field(dir / snapshot_name(s.step_index), s.u_curr, s.time);
  };
  if (cfg.snapshot_every > 0 && !resume) write_field(dir / snapshot_name(0), state->u_curr, 0.0);

  const auto start = std::chrono::steady_clock::now();
  RunResult result = run(std::move(*state), scheme, kernel, cache, options);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  write_checkpoint(dir / "checkpoint.nchk", result.final_state);
  const Model model{kernel, scheme.epsilon, scheme.potential, cache};
  write_summary(dir / "summary.txt", result, wall, model);

  out << "termination: " << to_string(result.termination) << " after "
      << result.final_state.step_index << " steps (t = " << result.final_state.time << ")\n"
      << "equilibrium residual: " << result.equilibrium_residual << "\n"
      << "output: " << dir.string() << "\n";
  if (result.termination == Termination::error) {
    err << "error: " << result.error_detail << "\n";
    return kSolverError;
  }
  return kOk;
}

int cmd_verify(std::ostream& out) {
  const auto results = oracle::run_verify();
  oracle::print_verify_table(out, results);
  const bool ok = oracle::all_passed(results);
  out << (ok ? "all checks passed" : "some checks FAILED") << "\n";
  return ok ? kOk : kSolverError;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlocal Cahn-Hilliard solver"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_path;
  Overrides overrides;
  std::optional<std::string> resume;

  auto* run_cmd = app.add_subcommand("run", "Run a simulation");
  run_cmd->add_option("config", config_path, "Configuration file")->required();
  run_cmd->add_option("--output-dir", overrides.output_dir, "Override output.dir");
  run_cmd->add_option("--seed", overrides.seed, "Override run.seed");
  run_cmd->add_option("--max-steps", overrides.max_steps, "Override run.max_steps");
  run_cmd->add_option("--resume", resume, "Continue from a checkpoint file");

  auto* check_cmd = app.add_subcommand("check", "Report the solvability/stability check");
  check_cmd->add_option("config", config_path, "Configuration file")->required();

  auto* verify_cmd = app.add_subcommand("verify", "Run the oracle suite");
  auto* init_cmd = app.add_subcommand("init-config", "Print a configuration template");

  // CLI11 parses argv-style input in reverse order.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, overrides, resume, out, err);
    if (check_cmd->parsed()) return cmd_check(config_path, out);
    if (verify_cmd->parsed()) return cmd_verify(out);
    if (init_cmd->parsed()) {
      out << "# nch configuration; see README for the key reference\n" << emit_config(RunConfig{});
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const StabilityError& e) {
    // enforce policy refused to start: same verdict as `check`.
    err << "inadmissible: " << e.what() << "\n";
    return kInadmissible;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kSolverError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSolverError;
  }
  return kConfigError;
}

}  // namespace nch::cli
