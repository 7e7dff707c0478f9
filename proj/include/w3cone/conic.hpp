#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace w3cone {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Sparse affine function of the program variables: sum(coef * x[var]) + constant.
// Terms are kept in insertion order; duplicates are allowed and summed on use.
class AffineExpr {
 public:
  struct Term {
    int var;
    double coef;
  };

  AffineExpr() = default;
  explicit AffineExpr(double constant) : constant_(constant) {}

  static AffineExpr variable(int var, double coef = 1.0) {
    AffineExpr e;
    e.add_term(var, coef);
    return e;
  }

  AffineExpr& add_term(int var, double coef) {
    if (coef != 0.0) terms_.push_back({var, coef});
    return *this;
  }
  AffineExpr& add_constant(double c) {
    constant_ += c;
    return *this;
  }

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }
  int max_var() const;

  double evaluate(std::span<const double> x) const;

  // Merges duplicate variables and drops zero coefficients; terms end up
  // sorted by variable index.
  AffineExpr canonical() const;

  AffineExpr& operator+=(const AffineExpr& o);
  AffineExpr& operator-=(const AffineExpr& o);
  AffineExpr& operator*=(double s);

  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator*(AffineExpr a, double s) { return a *= s; }
  friend AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
  friend AffineExpr operator-(AffineExpr a) { return a *= -1.0; }

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

struct VariableBounds {
  double lower = -kInf;
  double upper = kInf;
};

// lower <= expr <= upper; lower == upper is an equality.
struct LinearRow {
  AffineExpr expr;
  double lower = -kInf;
  double upper = kInf;
  std::string label;

  bool is_equality() const { return lower == upper; }
};

// ||(exprs[1], ..., exprs[k])||_2 <= exprs[0]
struct SocBlock {
  std::vector<AffineExpr> exprs;
  std::string label;
};

// ||(exprs[2], ..., exprs[k])||^2 <= 2 * exprs[0] * exprs[1], exprs[0], exprs[1] >= 0
struct RsocBlock {
  std::vector<AffineExpr> exprs;
  std::string label;
};

// d x d real symmetric matrix required PSD. `entries` lists the lower
// triangle row by row: (0,0), (1,0), (1,1), (2,0), (2,1), (2,2), ...
struct PsdBlock {
  int dim = 0;
  std::vector<AffineExpr> entries;
  std::string label;

  static int packed_size(int dim) { return dim * (dim + 1) / 2; }
  static int packed_index(int row, int col);  // requires col <= row
};

// Minimise objective over the intersection of all blocks.
class ConicProgram {
 public:
  int add_variable(double lower = -kInf, double upper = kInf, std::string name = {});

  int add_linear(AffineExpr expr, double lower, double upper, std::string label = {});
  int add_equality(AffineExpr expr, double rhs, std::string label = {}) {
    return add_linear(std::move(expr), rhs, rhs, std::move(label));
  }
  int add_soc(std::vector<AffineExpr> exprs, std::string label = {});
  int add_rsoc(std::vector<AffineExpr> exprs, std::string label = {});
  int add_psd(int dim, std::vector<AffineExpr> entries, std::string label = {});

  void set_objective(AffineExpr objective);

  int num_vars() const { return static_cast<int>(bounds_.size()); }
  const std::vector<VariableBounds>& bounds() const { return bounds_; }
  const std::vector<std::string>& var_names() const { return names_; }
  const std::vector<LinearRow>& linear_rows() const { return linear_; }
  const std::vector<SocBlock>& soc_blocks() const { return soc_; }
  const std::vector<RsocBlock>& rsoc_blocks() const { return rsoc_; }
  const std::vector<PsdBlock>& psd_blocks() const { return psd_; }
  const AffineExpr& objective() const { return objective_; }

 private:
  void check_expr(const AffineExpr& e, const char* where) const;

  std::vector<VariableBounds> bounds_;
  std::vector<std::string> names_;
  std::vector<LinearRow> linear_;
  std::vector<SocBlock> soc_;
  std::vector<RsocBlock> rsoc_;
  std::vector<PsdBlock> psd_;
  AffineExpr objective_;
};

// Worst violation per constraint, using the measures
//   bounds/linear: max(lower - a.x, a.x - upper, 0)
//   SOC:           max(||u|| - t, 0)
//   rotated SOC:   the same on the equivalent SOC ((t1+t2)/sqrt2; (t1-t2)/sqrt2, u)
//   PSD:           max(-lambda_min, 0)
struct CheckReport {
  std::vector<double> bounds;
  std::vector<double> linear;
  std::vector<double> soc;
  std::vector<double> rsoc;
  std::vector<double> psd;
  double worst = 0.0;
  bool feasible = true;
};

CheckReport check_point(const ConicProgram& p, std::span<const double> x, double tol);

// Slack of a block at x, positive inside; zero on the boundary.
double soc_slack(const SocBlock& b, std::span<const double> x);
// 2 t1 t2 - ||u||^2 when t1, t2 >= 0, otherwise min(t1, t2).
double rsoc_slack(const RsocBlock& b, std::span<const double> x);

// Deterministic JSON dump (variables, rows, blocks, labels) for golden tests.
nlohmann::json to_json(const ConicProgram& p);

}  // namespace w3cone
