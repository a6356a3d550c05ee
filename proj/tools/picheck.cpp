// picheck: verify path-independence properties of ancilla-controlled gates.
//
// Exit codes: 0 all checks pass, 1 at least one check fails, 2 configuration
// or usage error, 3 a check landed in the numerical gray zone.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "picheck/runner.hpp"

namespace {

// PICHECK_THREADS caps worker parallelism. The current engine is sequential,
// so any positive cap is honored trivially; the value is validated and
// reported so configs behave identically once parallel paths exist.
int resolve_threads() {
  const char* env = std::getenv("PICHECK_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == nullptr || *end != '\0' || v < 1) {
    std::cerr << "warning: ignoring invalid PICHECK_THREADS=\"" << env << "\"\n";
    return 1;
  }
  return static_cast<int>(v);
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed, bool strict) {
  std::vector<std::string> warnings;
  const picheck::RunConfig config =
      picheck::load_config(config_path, strict, strict ? nullptr : &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

  const int threads = resolve_threads();
  const picheck::RunReport report = picheck::run(config, seed);
  std::cout << "threads: " << threads << "\n" << picheck::report_text(report);
  for (const std::string& path : picheck::write_outputs(report, config, out_dir))
    std::cout << "wrote " << path << "\n";
  // Abort messages also go to stderr so scripted callers see them even when
  // stdout is redirected to a file.
  if (report.aborted) std::cerr << "gray zone: " << report.abort_message << "\n";
  return report.exit_code();
}

int cmd_validate(const std::string& config_path, bool echo) {
  const picheck::RunConfig config = picheck::load_config(config_path, /*strict=*/true);
  if (echo)
    std::cout << config.echo();
  else
    std::cout << "ok\n";
  return 0;
}

int cmd_builtin(const std::string& name, bool print_config) {
  const picheck::Json doc = picheck::builtin_config(name);
  if (print_config)
    std::cout << picheck::canonical_dump(doc);
  else
    std::cout << "builtin \"" << name << "\" is available; use --print-config to emit it\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"path-independence checker for ancilla-controlled quantum gates"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool strict = false;
  CLI::App* run_cmd = app.add_subcommand("run", "run the checks in a config file");
  run_cmd->add_option("config", config_path, "JSON config file")->required();
  run_cmd->add_option("--out", out_dir, "output directory (default: current directory)");
  run_cmd->add_option("--seed", seed, "override the config seed");
  run_cmd->add_flag("--strict", strict, "reject unknown config keys instead of warning");

  std::string validate_path;
  bool echo = false;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check a config file without running anything");
  validate_cmd->add_option("config", validate_path, "JSON config file")->required();
  validate_cmd->add_flag("--echo", echo, "print the canonical normalized config");

  std::string builtin_name;
  bool print_config = false;
  CLI::App* builtin_cmd = app.add_subcommand("builtin", "inspect a built-in model config");
  builtin_cmd->add_option("name", builtin_name, "builtin name: snap or error_transparent")
      ->required();
  builtin_cmd->add_flag("--print-config", print_config, "print the full default config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, out_dir, seed, strict);
    if (validate_cmd->parsed()) return cmd_validate(validate_path, echo);
    return cmd_builtin(builtin_name, print_config);
  } catch (const picheck::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
