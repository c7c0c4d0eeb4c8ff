#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rfs::conic {

struct Var {
  int id = -1;
};

/// Sparse affine expression sum_j coef_j * x_j + constant.
class Affine {
 public:
  Affine() = default;
  Affine(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)
  Affine(Var v, double coef = 1.0) { add(v, coef); }  // NOLINT(google-explicit-constructor)

  Affine& add(Var v, double coef);
  Affine& add(const Affine& other, double scale = 1.0);
  Affine& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }
  double eval(const Eigen::VectorXd& x) const;

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

Affine operator+(Affine a, const Affine& b);
Affine operator-(Affine a, const Affine& b);
Affine operator*(double s, const Affine& a);
Affine operator-(const Affine& a);

/// Zero: every row == 0. NonNeg: every row >= 0. SOC: ||rows[1:]||_2 <= rows[0].
/// Exp: (a, b, c) with b * exp(a / b) <= c, b > 0, or a <= 0, b = 0, c >= 0.
enum class ConeKind { Zero, NonNeg, SOC, Exp };

std::string to_string(ConeKind k);

struct ConstraintBlock {
  ConeKind kind = ConeKind::NonNeg;
  std::vector<Affine> rows;
  std::string label;
};

struct Handle {
  std::size_t block = 0;
};

/// Minimize an affine objective over linear, second-order and exponential
/// cone constraints on named scalar variables.
class Program {
 public:
  Var add_var(std::string name);
  std::vector<Var> add_vars(std::size_t count, const std::string& prefix);

  Handle add_equality(Affine e, std::string label = {});
  Handle add_nonneg(Affine e, std::string label = {});
  Handle add_soc(Affine t, std::vector<Affine> v, std::string label = {});
  Handle add_exp(Affine a, Affine b, Affine c, std::string label = {});

  void minimize(Affine objective) { objective_ = std::move(objective); }

  std::size_t num_vars() const { return names_.size(); }
  const std::vector<std::string>& var_names() const { return names_; }
  const Affine& objective() const { return objective_; }
  const std::vector<ConstraintBlock>& blocks() const { return blocks_; }
  const ConstraintBlock& block(Handle h) const { return blocks_.at(h.block); }

  /// Throws ConfigError on unknown variables or non-finite coefficients.
  void validate() const;

 private:
  Handle push(ConeKind kind, std::vector<Affine> rows, std::string label);

  std::vector<std::string> names_;
  std::vector<ConstraintBlock> blocks_;
  Affine objective_;
};

enum class Status { Optimal, Infeasible, Unbounded, MaxIter };

std::string to_string(Status s);

struct SolveOptions {
  double gap_tol = 1e-7;
  double feas_tol = 1e-7;
  int max_iter = 200;
};

/// Primal values plus one dual vector per constraint block. Duals follow the
/// Lagrangian  c'x + sum_eq y'e(x) - sum_cone z'e(x),  z in the dual cone.
/// For Infeasible the duals hold a normalized Farkas ray; for Unbounded the
/// primal holds an improving ray.
struct Solution {
  Status status = Status::MaxIter;
  Eigen::VectorXd x;
  std::vector<Eigen::VectorXd> duals;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  std::string message;

  double value(Var v) const { return x[v.id]; }
  double value(const Affine& a) const { return a.eval(x); }
};

/// Homogeneous self-dual interior-point method.
Solution solve(const Program& p, const SolveOptions& opts = {});

/// Independent check of a solution against the program's own affine rows.
struct Certificate {
  double primal_violation = 0.0;
  double dual_cone_violation = 0.0;
  double dual_residual = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;

  bool passes(double feas_tol, double gap_tol) const {
    return primal_violation <= feas_tol && dual_cone_violation <= feas_tol && dual_residual <= feas_tol &&
           relative_gap <= gap_tol;
  }
};

Certificate verify(const Program& p, const Solution& s);

// ---------------------------------------------------------------------------
// Modeling helpers

struct SoftplusEpigraph {
  Var u;
  Var v;
  Handle budget;
  Handle exp_z;
  Handle exp_0;
};

/// log(1 + e^z) <= d via u + v <= 1, (z - d, 1, u) and (-d, 1, v) in K_exp.
SoftplusEpigraph add_softplus_epigraph(Program& p, const Affine& z, const Affine& d, const std::string& label = {});

/// scale * ||v||_2 <= t, scale >= 0.
Handle add_norm_epigraph(Program& p, const std::vector<Affine>& v, const Affine& t, double scale,
                         const std::string& label = {});

// ---------------------------------------------------------------------------
// Plain-text dump
//
//   RFSCONE 1
//   VARS <n>
//   <index> <name>                     (n lines)
//   OBJ <nnz> <constant>
//   <var> <coef>                       (nnz lines)
//   BLOCKS <count>
//   BLOCK <ZERO|NONNEG|SOC|EXP> <rows> <label or ->
//   ROW <nnz> <constant>               (then nnz "<var> <coef>" lines, per row)
//   END
//
// Numbers use "%.17g". Rows are affine expressions in the cone's orientation.

void dump(const Program& p, std::ostream& out);
std::string dump(const Program& p);
Program parse_dump(std::istream& in);

// ---------------------------------------------------------------------------
// Barrier of the exponential cone, exposed for testing.

namespace expcone {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Primal interior: b > 0, c > 0, b log(c / b) - a > 0.
bool primal_interior(const Vec3& s);
/// Dual interior: u < 0, w > 0, log(-u) + v / u < 1 + log w.
bool dual_interior(const Vec3& z);
/// Gradient of -log(b log(c/b) - a) - log b - log c.
Vec3 gradient(const Vec3& s);
Mat3 hessian(const Vec3& s);
/// The point with s = -gradient(s), about (-0.8278, 0.8051, 1.2909).
const Vec3& central_point();

}  // namespace expcone

}  // namespace rfs::conic
