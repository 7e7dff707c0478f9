#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "w3cone/conic.hpp"

namespace w3cone {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure, kIterationLimit };

std::string_view to_string(SolveStatus s);

struct SolverConfig {
  double feasibility_tol = 1e-8;  // relative primal/dual residuals
  double gap_abs_tol = 1e-8;
  double gap_rel_tol = 1e-8;
  int max_iterations = 100;
  bool verbose = false;
};

struct Solution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  double objective = 0.0;
  std::vector<double> x;
  double solve_time_s = 0.0;
  int iterations = 0;
};

// Thrown when a program uses a cone the backend cannot handle.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Backend contract: solve() must be reentrant across distinct programs and
// an optimal x must pass check_point(program, x, 1e-6).
class ConicSolver {
 public:
  virtual ~ConicSolver() = default;
  virtual std::string name() const = 0;
  virtual bool supports_psd() const = 0;
  virtual Solution solve(const ConicProgram& program, const SolverConfig& config) const = 0;
};

// Dense primal-dual interior-point method on the homogeneous self-dual
// embedding, with Nesterov-Todd scaling and Mehrotra correction. Handles the
// nonnegative orthant, second-order cones and PSD cones. Meant for programs
// with up to a few thousand variables.
class InteriorPointSolver final : public ConicSolver {
 public:
  explicit InteriorPointSolver(bool enable_psd = true) : enable_psd_(enable_psd) {}

  std::string name() const override { return enable_psd_ ? "ipm" : "ipm-socp"; }
  bool supports_psd() const override { return enable_psd_; }
  Solution solve(const ConicProgram& program, const SolverConfig& config) const override;

 private:
  bool enable_psd_;
};

// Known backends: "ipm" (all cones) and "ipm-socp" (no PSD blocks).
std::unique_ptr<ConicSolver> make_solver(std::string_view name);

// Solves with the default "ipm" backend.
Solution solve(const ConicProgram& program, const SolverConfig& config = {});

}  // namespace w3cone
