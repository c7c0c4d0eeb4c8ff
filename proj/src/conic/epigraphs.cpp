#include "rfs/conic.hpp"
#include "rfs/error.hpp"

namespace rfs::conic {

SoftplusEpigraph add_softplus_epigraph(Program& p, const Affine& z, const Affine& d, const std::string& label) {
  SoftplusEpigraph e;
  e.u = p.add_var(label + ".u");
  e.v = p.add_var(label + ".v");
  // e^(z-d) + e^(-d) <= 1  <=>  log(1 + e^z) <= d.
  e.budget = p.add_nonneg(Affine(1.0).add(e.u, -1.0).add(e.v, -1.0), label);
  e.exp_z = p.add_exp(z - d, 1.0, e.u, label);
  e.exp_0 = p.add_exp(-d, 1.0, e.v, label);
  return e;
}

Handle add_norm_epigraph(Program& p, const std::vector<Affine>& v, const Affine& t, double scale,
                         const std::string& label) {
  if (!(scale >= 0.0)) throw ConfigError("norm epigraph scale must be >= 0");
  if (scale == 0.0 || v.empty()) return p.add_nonneg(t, label);
  std::vector<Affine> scaled;
  scaled.reserve(v.size());
  for (const auto& e : v) scaled.push_back(scale * e);
  return p.add_soc(t, std::move(scaled), label);
}

}  // namespace rfs::conic
