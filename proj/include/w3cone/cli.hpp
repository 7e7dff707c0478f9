#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "w3cone/diagnostics.hpp"
#include "w3cone/netcase.hpp"
#include "w3cone/solver.hpp"
#include "w3cone/wopf.hpp"

namespace w3cone {

struct SolveOptions {
  RelaxationSpec relaxation;
  std::optional<double> reference_objective;
  double diagnostic_tol = kDefaultDiagnosticTol;
  std::string backend = "ipm";
};

struct SolveReport {
  std::string case_name;
  RelaxationSpec relaxation;
  SolveStatus status = SolveStatus::kNumericalFailure;
  double objective = 0.0;
  std::optional<double> gap_percent;
  double solve_time_s = 0.0;
  int iterations = 0;
  std::vector<TriangleDiagnostics> triangles;
  std::vector<BlockActivity> activity;
  std::string backend;
  std::string pglib_version{kPglibVersion};

  nlohmann::json to_json() const;
};

// Builds, solves and diagnoses one relaxation. Throws CapabilityError when the
// backend cannot handle the relaxation's cones.
SolveReport solve_relaxation(const NetworkCase& c, const SolveOptions& opts);

struct SweepOptions {
  int grid = 32;
  double lower = 0.0;
  double upper = 6.2831853;
  double r = 1.0;
  int jobs = 0;  // 0: available parallelism
  std::string backend = "ipm";
  KimOrientation orientation = KimOrientation::kCyclic;
};

struct SweepPoint {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double objective = 0.0;
  SolveStatus status = SolveStatus::kNumericalFailure;
  double solve_time_s = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;  // row-major: theta1 outer, theta2 inner
  std::optional<std::size_t> best;  // largest optimal objective, lexicographic tie-break
};

// Grid values lower + k (upper - lower) / grid for k = 0 .. grid-1.
std::vector<double> sweep_axis(const SweepOptions& opts);

SweepResult run_sweep(const NetworkCase& c, const SweepOptions& opts);

void write_sweep_csv(std::ostream& os, const SweepResult& r);

struct TableCell {
  RelaxationKind kind;
  std::optional<double> gap_percent;
  std::optional<double> objective;
  std::string status;  // solver status, or "unsupported"
};

struct TableRow {
  std::string case_name;
  double reference_objective = 0.0;
  std::vector<TableCell> cells;
};

std::vector<TableRow> run_table(const std::vector<std::filesystem::path>& cases,
                                const std::vector<double>& references,
                                const std::vector<RelaxationKind>& relaxations,
                                const std::vector<double>& thetas, const std::string& backend,
                                std::ostream& warnings);

nlohmann::json table_json(const std::vector<TableRow>& rows);
void write_table_text(std::ostream& os, const std::vector<TableRow>& rows);

// Entry point of the command-line tool; returns the process exit code
// (0 optimal, 1 input error, 2 solver failure).
int run_cli(int argc, char** argv);

}  // namespace w3cone
