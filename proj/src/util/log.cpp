#include "rfs/log.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>

namespace rfs {

void init_logging(bool verbose) {
  auto logger = spdlog::get("rfs");
  if (!logger) logger = spdlog::stderr_color_mt("rfs");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("RFS_LOG")) {
    level = spdlog::level::from_str(env);
  }
  if (verbose && level > spdlog::level::debug) level = spdlog::level::debug;
  spdlog::set_level(level);
}

}  // namespace rfs
