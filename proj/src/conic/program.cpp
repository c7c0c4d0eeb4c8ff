#include <cmath>

#include "rfs/conic.hpp"
#include "rfs/error.hpp"

namespace rfs::conic {

Affine& Affine::add(Var v, double coef) {
  terms_.emplace_back(v.id, coef);
  return *this;
}

Affine& Affine::add(const Affine& other, double scale) {
  for (const auto& [j, c] : other.terms_) terms_.emplace_back(j, scale * c);
  constant_ += scale * other.constant_;
  return *this;
}

double Affine::eval(const Eigen::VectorXd& x) const {
  double v = constant_;
  for (const auto& [j, c] : terms_) v += c * x[j];
  return v;
}

Affine operator+(Affine a, const Affine& b) { return a.add(b, 1.0); }
Affine operator-(Affine a, const Affine& b) { return a.add(b, -1.0); }
Affine operator*(double s, const Affine& a) { return Affine().add(a, s); }
Affine operator-(const Affine& a) { return Affine().add(a, -1.0); }

std::string to_string(ConeKind k) {
  switch (k) {
    case ConeKind::Zero: return "ZERO";
    case ConeKind::NonNeg: return "NONNEG";
    case ConeKind::SOC: return "SOC";
    case ConeKind::Exp: return "EXP";
  }
  return "?";
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::MaxIter: return "MaxIter";
  }
  return "?";
}

Var Program::add_var(std::string name) {
  names_.push_back(std::move(name));
  return Var{static_cast<int>(names_.size() - 1)};
}

std::vector<Var> Program::add_vars(std::size_t count, const std::string& prefix) {
  std::vector<Var> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(add_var(prefix + "[" + std::to_string(i) + "]"));
  return out;
}

Handle Program::push(ConeKind kind, std::vector<Affine> rows, std::string label) {
  blocks_.push_back({kind, std::move(rows), std::move(label)});
  return Handle{blocks_.size() - 1};
}

Handle Program::add_equality(Affine e, std::string label) {
  return push(ConeKind::Zero, {std::move(e)}, std::move(label));
}

Handle Program::add_nonneg(Affine e, std::string label) {
  return push(ConeKind::NonNeg, {std::move(e)}, std::move(label));
}

Handle Program::add_soc(Affine t, std::vector<Affine> v, std::string label) {
  std::vector<Affine> rows;
  rows.reserve(v.size() + 1);
  rows.push_back(std::move(t));
  for (auto& e : v) rows.push_back(std::move(e));
  return push(ConeKind::SOC, std::move(rows), std::move(label));
}

Handle Program::add_exp(Affine a, Affine b, Affine c, std::string label) {
  return push(ConeKind::Exp, {std::move(a), std::move(b), std::move(c)}, std::move(label));
}

void Program::validate() const {
  const auto n = static_cast<int>(names_.size());
  auto check = [&](const Affine& e, const std::string& where) {
    if (!std::isfinite(e.constant())) throw ConfigError(where + ": non-finite constant");
    for (const auto& [j, c] : e.terms()) {
      if (j < 0 || j >= n) throw ConfigError(where + ": reference to undeclared variable " + std::to_string(j));
      if (!std::isfinite(c)) throw ConfigError(where + ": non-finite coefficient");
    }
  };
  check(objective_, "objective");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& blk = blocks_[b];
    const std::string where = "block " + std::to_string(b) + (blk.label.empty() ? "" : " (" + blk.label + ")");
    if (blk.kind == ConeKind::Exp && blk.rows.size() != 3) throw ConfigError(where + ": exponential cone needs 3 rows");
    if (blk.kind == ConeKind::SOC && blk.rows.empty()) throw ConfigError(where + ": empty second-order cone");
    for (const auto& r : blk.rows) check(r, where);
  }
}

}  // namespace rfs::conic
