#include "rfs/types.hpp"

#include "rfs/error.hpp"

namespace rfs {

std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::LR: return "LR";
    case ModelFamily::LRL2: return "LRL2";
    case ModelFamily::FLR: return "FLR";
    case ModelFamily::DRLR: return "DRLR";
    case ModelFamily::DRFLR: return "DRFLR";
  }
  return "?";
}

ModelFamily parse_family(std::string_view name) {
  for (ModelFamily f : kAllFamilies) {
    if (to_string(f) == name) return f;
  }
  throw ConfigError("unknown model family '" + std::string(name) + "'");
}

}  // namespace rfs
