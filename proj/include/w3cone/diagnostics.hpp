#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "w3cone/conic.hpp"
#include "w3cone/kimcuts.hpp"
#include "w3cone/netcase.hpp"
#include "w3cone/solver.hpp"

namespace w3cone {

inline constexpr double kDefaultDiagnosticTol = 1e-5;

// Re/Im of conj(W_pk) W_qk - W_kk conj(W_pq) for apex k = 1, 2, 3 (with
// p < q the other two buses), in the order re1, im1, re2, im2, re3, im3.
std::array<double, 6> kvl_residuals(const HermitianBlock3& w);

// W_ii W_jj - |W_ij|^2 for the pairs (1,2), (1,3), (2,3).
std::array<double, 3> pm_residuals(const HermitianBlock3& w);

struct Rank1Check {
  bool certified = false;
  double worst = 0.0;
};

// Certified iff every principal-minor residual and every KVL residual is
// within tol in absolute value.
Rank1Check rank1_check(const HermitianBlock3& w, double tol = kDefaultDiagnosticTol);

// Voltages with |U_i| = sqrt(W_ii), the first bus at angle 0 and the others
// placed from the angles of W_1j.
std::array<std::complex<double>, 3> reconstruct_voltages(const HermitianBlock3& w);

// 100 (reference - relaxation) / reference; throws ContractViolation if reference <= 0.
double gap_percent(double relaxation_objective, double reference_objective);

struct BlockActivity {
  std::string label;
  std::string kind;  // "linear", "soc", "rsoc" or "psd"
  double slack = 0.0;
  bool active = false;
};

// Slack of every labeled inequality block: SOC t - ||u|| (rotated cones in
// their equivalent SOC form), linear rows distance to the nearest finite
// bound, PSD blocks the smallest eigenvalue. Equality rows are skipped.
std::vector<BlockActivity> activity_report(const Solution& sol, const ConicProgram& p,
                                           double tol = kDefaultDiagnosticTol);

struct TriangleDiagnostics {
  Triangle triangle;
  std::array<double, 6> kvl_residuals{};
  std::array<double, 3> pm_residuals{};
  std::vector<double> kim_slacks;  // rhs - lhs per (partition, theta)
  bool rank1_certified = false;
  double worst_rank1_residual = 0.0;
};

TriangleDiagnostics diagnose_triangle(const HermitianBlock3& w, const Triangle& t,
                                      const std::vector<KimCutParams>& cuts,
                                      double tol = kDefaultDiagnosticTol);

}  // namespace w3cone
