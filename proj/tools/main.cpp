#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace affdim::cli;
  CLI::App app{"affdim: dimension computations for self-affine iterated function systems"};
  app.require_subcommand(1);
  app.fallthrough();

  RunOptions opt;
  std::uint64_t seed = 0;
  double tol = 0.0;
  auto* seed_opt = app.add_option("--seed", seed, "Seed (overrides the config)");
  auto* tol_opt = app.add_option("--tol", tol, "Command tolerance (overrides <command>.tol)");
  app.add_option("--config", opt.config_path, "Config file (JSON, comments allowed)")->required();
  app.add_option("--threads", opt.threads, "Worker threads (default $AFFDIM_THREADS or 1)")->check(CLI::Range(1, 1024));
  app.add_option("--out", opt.out_dir, "Output directory")->capture_default_str();

  std::string command;
  for (const auto& name : command_names()) {
    app.add_subcommand(name)->callback([&command, name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (*seed_opt) opt.seed = seed;
  if (*tol_opt) opt.tol = tol;

  const RunResult res = run(command, opt);
  for (const auto& f : res.files) std::cout << f << '\n';
  (res.exit_code == kExitOk ? std::cout : std::cerr) << command << ": " << res.message << '\n';
  return res.exit_code;
}
