#include "w3cone/conic.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace w3cone {

int AffineExpr::max_var() const {
  int m = -1;
  for (const auto& t : terms_) m = std::max(m, t.var);
  return m;
}

double AffineExpr::evaluate(std::span<const double> x) const {
  double v = constant_;
  for (const auto& t : terms_) v += t.coef * x[t.var];
  return v;
}

AffineExpr AffineExpr::canonical() const {
  std::vector<Term> sorted = terms_;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Term& a, const Term& b) { return a.var < b.var; });
  AffineExpr out(constant_);
  for (std::size_t i = 0; i < sorted.size();) {
    double coef = 0.0;
    std::size_t j = i;
    for (; j < sorted.size() && sorted[j].var == sorted[i].var; ++j) coef += sorted[j].coef;
    out.add_term(sorted[i].var, coef);
    i = j;
  }
  return out;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  constant_ += o.constant_;
  return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& o) {
  for (const auto& t : o.terms_) add_term(t.var, -t.coef);
  constant_ -= o.constant_;
  return *this;
}

AffineExpr& AffineExpr::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    constant_ = 0.0;
    return *this;
  }
  for (auto& t : terms_) t.coef *= s;
  constant_ *= s;
  return *this;
}

int PsdBlock::packed_index(int row, int col) {
  if (col > row) std::swap(row, col);
  return row * (row + 1) / 2 + col;
}

int ConicProgram::add_variable(double lower, double upper, std::string name) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw ContractViolation(fmt::format("add_variable: invalid bounds [{}, {}]", lower, upper));
  }
  bounds_.push_back({lower, upper});
  names_.push_back(std::move(name));
  return num_vars() - 1;
}

void ConicProgram::check_expr(const AffineExpr& e, const char* where) const {
  for (const auto& t : e.terms()) {
    if (t.var < 0 || t.var >= num_vars()) {
      throw ContractViolation(
          fmt::format("{}: variable index {} out of range (n_vars = {})", where, t.var, num_vars()));
    }
  }
}

int ConicProgram::add_linear(AffineExpr expr, double lower, double upper, std::string label) {
  check_expr(expr, "add_linear");
  if (std::isnan(lower) || std::isnan(upper) || lower > upper) {
    throw ContractViolation(fmt::format("add_linear: invalid range [{}, {}]", lower, upper));
  }
  linear_.push_back({std::move(expr), lower, upper, std::move(label)});
  return static_cast<int>(linear_.size()) - 1;
}

int ConicProgram::add_soc(std::vector<AffineExpr> exprs, std::string label) {
  if (exprs.size() < 2) throw ContractViolation("add_soc: a cone needs at least 2 expressions");
  for (const auto& e : exprs) check_expr(e, "add_soc");
  soc_.push_back({std::move(exprs), std::move(label)});
  return static_cast<int>(soc_.size()) - 1;
}

int ConicProgram::add_rsoc(std::vector<AffineExpr> exprs, std::string label) {
  if (exprs.size() < 3) {
    throw ContractViolation("add_rsoc: a rotated cone needs at least 3 expressions");
  }
  for (const auto& e : exprs) check_expr(e, "add_rsoc");
  rsoc_.push_back({std::move(exprs), std::move(label)});
  return static_cast<int>(rsoc_.size()) - 1;
}

int ConicProgram::add_psd(int dim, std::vector<AffineExpr> entries, std::string label) {
  if (dim < 1) throw ContractViolation("add_psd: dimension must be positive");
  if (static_cast<int>(entries.size()) != PsdBlock::packed_size(dim)) {
    throw ContractViolation(fmt::format("add_psd: expected {} entries for dimension {}, got {}",
                                        PsdBlock::packed_size(dim), dim, entries.size()));
  }
  for (const auto& e : entries) check_expr(e, "add_psd");
  psd_.push_back({dim, std::move(entries), std::move(label)});
  return static_cast<int>(psd_.size()) - 1;
}

void ConicProgram::set_objective(AffineExpr objective) {
  check_expr(objective, "set_objective");
  objective_ = std::move(objective);
}

double soc_slack(const SocBlock& b, std::span<const double> x) {
  double norm2 = 0.0;
  for (std::size_t k = 1; k < b.exprs.size(); ++k) {
    const double u = b.exprs[k].evaluate(x);
    norm2 += u * u;
  }
  return b.exprs[0].evaluate(x) - std::sqrt(norm2);
}

double rsoc_slack(const RsocBlock& b, std::span<const double> x) {
  const double t1 = b.exprs[0].evaluate(x);
  const double t2 = b.exprs[1].evaluate(x);
  if (t1 < 0.0 || t2 < 0.0) return std::min(t1, t2);
  double norm2 = 0.0;
  for (std::size_t k = 2; k < b.exprs.size(); ++k) {
    const double u = b.exprs[k].evaluate(x);
    norm2 += u * u;
  }
  return 2.0 * t1 * t2 - norm2;
}

namespace {

double range_violation(double v, double lower, double upper) {
  return std::max({lower - v, v - upper, 0.0});
}

double rsoc_violation(const RsocBlock& b, std::span<const double> x) {
  const double t1 = b.exprs[0].evaluate(x);
  const double t2 = b.exprs[1].evaluate(x);
  const double d = (t1 - t2) / std::sqrt(2.0);
  double norm2 = d * d;
  for (std::size_t k = 2; k < b.exprs.size(); ++k) {
    const double u = b.exprs[k].evaluate(x);
    norm2 += u * u;
  }
  return std::max(std::sqrt(norm2) - (t1 + t2) / std::sqrt(2.0), 0.0);
}

double psd_violation(const PsdBlock& b, std::span<const double> x) {
  Eigen::MatrixXd m(b.dim, b.dim);
  for (int i = 0; i < b.dim; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = b.entries[PsdBlock::packed_index(i, j)].evaluate(x);
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return std::max(-eig.eigenvalues()(0), 0.0);
}

}  // namespace

CheckReport check_point(const ConicProgram& p, std::span<const double> x, double tol) {
  if (static_cast<int>(x.size()) != p.num_vars()) {
    throw ContractViolation(
        fmt::format("check_point: point has {} entries, program has {}", x.size(), p.num_vars()));
  }
  CheckReport r;
  auto record = [&r](std::vector<double>& into, double v) {
    into.push_back(v);
    r.worst = std::max(r.worst, v);
  };
  for (int i = 0; i < p.num_vars(); ++i) {
    record(r.bounds, range_violation(x[i], p.bounds()[i].lower, p.bounds()[i].upper));
  }
  for (const auto& row : p.linear_rows()) {
    record(r.linear, range_violation(row.expr.evaluate(x), row.lower, row.upper));
  }
  for (const auto& b : p.soc_blocks()) record(r.soc, std::max(-soc_slack(b, x), 0.0));
  for (const auto& b : p.rsoc_blocks()) record(r.rsoc, rsoc_violation(b, x));
  for (const auto& b : p.psd_blocks()) record(r.psd, psd_violation(b, x));
  r.feasible = r.worst <= tol;
  return r;
}

namespace {

nlohmann::json expr_json(const AffineExpr& e) {
  const AffineExpr c = e.canonical();
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : c.terms()) terms.push_back({t.var, t.coef});
  return {{"terms", terms}, {"constant", c.constant()}};
}

nlohmann::json bound_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

nlohmann::json exprs_json(const std::vector<AffineExpr>& exprs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : exprs) out.push_back(expr_json(e));
  return out;
}

}  // namespace

nlohmann::json to_json(const ConicProgram& p) {
  nlohmann::json vars = nlohmann::json::array();
  for (int i = 0; i < p.num_vars(); ++i) {
    vars.push_back({{"name", p.var_names()[i]},
                    {"lower", bound_json(p.bounds()[i].lower)},
                    {"upper", bound_json(p.bounds()[i].upper)}});
  }
  nlohmann::json linear = nlohmann::json::array();
  for (const auto& row : p.linear_rows()) {
    linear.push_back({{"label", row.label},
                      {"expr", expr_json(row.expr)},
                      {"lower", bound_json(row.lower)},
                      {"upper", bound_json(row.upper)}});
  }
  nlohmann::json soc = nlohmann::json::array();
  for (const auto& b : p.soc_blocks()) soc.push_back({{"label", b.label}, {"exprs", exprs_json(b.exprs)}});
  nlohmann::json rsoc = nlohmann::json::array();
  for (const auto& b : p.rsoc_blocks()) {
    rsoc.push_back({{"label", b.label}, {"exprs", exprs_json(b.exprs)}});
  }
  nlohmann::json psd = nlohmann::json::array();
  for (const auto& b : p.psd_blocks()) {
    psd.push_back({{"label", b.label}, {"dim", b.dim}, {"entries", exprs_json(b.entries)}});
  }
  return {{"n_vars", p.num_vars()}, {"variables", vars},    {"linear", linear},
          {"soc", soc},             {"rsoc", rsoc},         {"psd", psd},
          {"objective", expr_json(p.objective())}};
}

}  // namespace w3cone
