#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "rfs/cli.hpp"
#include "rfs/error.hpp"
#include "rfs/log.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Robust and fair logistic scorecards: preprocessing, training and experiments"};
  std::string command;
  std::string config_path;
  std::string output;
  std::uint64_t seed = 0;
  int threads = 1;
  bool verbose = false;

  app.add_option("command", command, "prep | train | cv | sweep | shift | table1 | run (dispatch on experiment.kind)")
      ->required()
      ->check(CLI::IsMember(rfs::cli::kCommands));
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  auto* output_opt = app.add_option("--output", output, "Output directory (overrides output_dir)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for folds and sampling (overrides eval.seed)");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads; results do not depend on it")
                          ->check(CLI::PositiveNumber);
  app.add_flag("--verbose,-v", verbose, "Debug logging (RFS_LOG sets the level otherwise)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(rfs::ExitCode::ConfigError);
  }

  rfs::init_logging(verbose);
  try {
    auto cfg = rfs::cli::RunConfig::load(config_path);
    rfs::cli::Overrides o;
    if (*output_opt) o.output = std::filesystem::path(output);
    if (*seed_opt) o.seed = seed;
    if (*threads_opt) o.threads = threads;
    rfs::cli::apply(cfg, o);
    rfs::cli::run_command(command, cfg);
  } catch (const rfs::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.exit_code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(rfs::ExitCode::DataError);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
