#include "w3cone/diagnostics.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace w3cone {

std::array<double, 6> kvl_residuals(const HermitianBlock3& w) {
  std::array<double, 6> out{};
  for (int k = 0; k < 3; ++k) {
    const int p = k == 0 ? 1 : 0;
    const int q = k == 2 ? 1 : 2;
    const std::complex<double> r =
        std::conj(w.entry(p, k)) * w.entry(q, k) - w.entry(k, k) * std::conj(w.entry(p, q));
    out[2 * k] = r.real();
    out[2 * k + 1] = r.imag();
  }
  return out;
}

std::array<double, 3> pm_residuals(const HermitianBlock3& w) {
  return {w.w11 * w.w22 - std::norm(w.entry(0, 1)), w.w11 * w.w33 - std::norm(w.entry(0, 2)),
          w.w22 * w.w33 - std::norm(w.entry(1, 2))};
}

Rank1Check rank1_check(const HermitianBlock3& w, double tol) {
  double worst = 0.0;
  for (const double v : pm_residuals(w)) worst = std::max(worst, std::abs(v));
  for (const double v : kvl_residuals(w)) worst = std::max(worst, std::abs(v));
  return {worst <= tol, worst};
}

std::array<std::complex<double>, 3> reconstruct_voltages(const HermitianBlock3& w) {
  std::array<std::complex<double>, 3> u;
  u[0] = std::sqrt(std::max(w.w11, 0.0));
  for (int j = 1; j < 3; ++j) {
    const double mag = std::sqrt(std::max(w.entry(j, j).real(), 0.0));
    u[j] = std::polar(mag, -std::arg(w.entry(0, j)));
  }
  return u;
}

double gap_percent(double relaxation_objective, double reference_objective) {
  if (!(reference_objective > 0.0)) {
    throw ContractViolation(fmt::format("reference objective must be positive (got {})", reference_objective));
  }
  return 100.0 * (reference_objective - relaxation_objective) / reference_objective;
}

std::vector<BlockActivity> activity_report(const Solution& sol, const ConicProgram& p, double tol) {
  std::vector<BlockActivity> out;
  const std::span<const double> x = sol.x;
  auto push = [&](const std::string& label, const char* kind, double slack) {
    out.push_back({label, kind, slack, slack <= tol});
  };
  for (const auto& row : p.linear_rows()) {
    if (row.is_equality()) continue;
    const double v = row.expr.evaluate(x);
    double slack = kInf;
    if (std::isfinite(row.lower)) slack = std::min(slack, v - row.lower);
    if (std::isfinite(row.upper)) slack = std::min(slack, row.upper - v);
    push(row.label, "linear", slack);
  }
  for (const auto& b : p.soc_blocks()) push(b.label, "soc", soc_slack(b, x));
  for (const auto& b : p.rsoc_blocks()) {
    const double t1 = b.exprs[0].evaluate(x);
    const double t2 = b.exprs[1].evaluate(x);
    double norm2 = std::pow((t1 - t2) / std::numbers::sqrt2, 2);
    for (std::size_t k = 2; k < b.exprs.size(); ++k) norm2 += std::pow(b.exprs[k].evaluate(x), 2);
    push(b.label, "rsoc", (t1 + t2) / std::numbers::sqrt2 - std::sqrt(norm2));
  }
  for (const auto& b : p.psd_blocks()) {
    Eigen::MatrixXd m(b.dim, b.dim);
    for (int i = 0; i < b.dim; ++i) {
      for (int j = 0; j <= i; ++j) {
        m(i, j) = m(j, i) = b.entries[PsdBlock::packed_index(i, j)].evaluate(x);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    push(b.label, "psd", eig.eigenvalues()(0));
  }
  return out;
}

TriangleDiagnostics diagnose_triangle(const HermitianBlock3& w, const Triangle& t,
                                      const std::vector<KimCutParams>& cuts, double tol) {
  TriangleDiagnostics d;
  d.triangle = t;
  d.kvl_residuals = kvl_residuals(w);
  d.pm_residuals = pm_residuals(w);
  for (const auto& c : cuts) {
    const KimEvaluation e = eval_kim(w, c);
    d.kim_slacks.push_back(e.rhs - e.lhs);
  }
  const Rank1Check r = rank1_check(w, tol);
  d.rank1_certified = r.certified;
  d.worst_rank1_residual = r.worst;
  return d;
}

}  // namespace w3cone
