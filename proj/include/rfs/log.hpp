#pragma once

#include <spdlog/spdlog.h>

namespace rfs {

/// Configures the default logger from the RFS_LOG environment variable
/// (trace|debug|info|warn|error|off). `verbose` forces at least debug.
void init_logging(bool verbose = false);

}  // namespace rfs
