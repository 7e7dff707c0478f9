#pragma once

#include "cones.hpp"
#include "w3cone/conic.hpp"
#include "w3cone/solver.hpp"

namespace w3cone::detail {

// min c^T x + offset  s.t.  A x = b,  G x + s = h,  s in cones.
struct StandardForm {
  Vec c;
  double objective_offset = 0.0;
  Mat A;
  Vec b;
  Mat G;
  Vec h;
  ConeLayout cones;
};

StandardForm lower_program(const ConicProgram& p);

// Scaling applied by equilibrate(): the scaled problem has
//   A' = diag(eq_row) A diag(col),  G' = diag(cone_row) G diag(col),
//   c' = objective * diag(col) c,  and x = diag(col) x'.
struct Equilibration {
  Vec col;
  Vec eq_row;
  Vec cone_row;
  double objective = 1.0;
};

// Ruiz equilibration in place; cone rows of a second-order or PSD block share one factor.
Equilibration equilibrate(StandardForm& f, int passes);

struct SolveOutcome {
  SolveStatus status = SolveStatus::kNumericalFailure;
  Vec x;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
};

SolveOutcome run_ipm(const StandardForm& f, const SolverConfig& cfg);

}  // namespace w3cone::detail
