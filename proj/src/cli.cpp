#include "w3cone/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace w3cone {

namespace {

std::vector<KimCutParams> kim_params(const RelaxationSpec& spec) {
  std::vector<KimCutParams> out;
  if (spec.kind != RelaxationKind::kKimPmSoc) return out;
  for (int part = 1; part <= 3; ++part) {
    for (const double theta : spec.thetas) out.push_back({part, spec.r, theta, spec.orientation});
  }
  return out;
}

nlohmann::json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

RelaxationKind parse_relaxation(const std::string& s) {
  if (s == "pm") return RelaxationKind::kPmSoc;
  if (s == "kim") return RelaxationKind::kKimPmSoc;
  if (s == "sdp") return RelaxationKind::kSdp;
  throw std::invalid_argument(fmt::format("unknown relaxation '{}' (expected pm, kim or sdp)", s));
}

constexpr double kSweepTieTol = 1e-8;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.10g}", v);
}

}  // namespace

nlohmann::json SolveReport::to_json() const {
  nlohmann::json j;
  j["case_name"] = case_name;
  nlohmann::json relax = {{"kind", std::string(to_string(relaxation.kind))}};
  if (relaxation.kind == RelaxationKind::kKimPmSoc) {
    relax["thetas"] = relaxation.thetas;
    relax["r"] = relaxation.r;
    relax["orientation"] = relaxation.orientation == KimOrientation::kCyclic ? "cyclic" : "ascending";
  }
  j["relaxation"] = relax;
  j["status"] = std::string(to_string(status));
  j["objective"] = number_or_null(objective);
  if (gap_percent) j["gap_percent"] = *gap_percent;
  j["solve_time_s"] = solve_time_s;
  j["iterations"] = iterations;

  nlohmann::json tris = nlohmann::json::array();
  for (const auto& t : triangles) {
    tris.push_back({{"buses", t.triangle.buses},
                    {"kvl_residuals", t.kvl_residuals},
                    {"pm_residuals", t.pm_residuals},
                    {"kim_slacks", t.kim_slacks},
                    {"rank1_certified", t.rank1_certified},
                    {"worst_rank1_residual", t.worst_rank1_residual}});
  }
  j["triangle_diagnostics"] = tris;

  nlohmann::json active = nlohmann::json::array();
  int n_active = 0;
  for (const auto& a : activity) {
    if (!a.active) continue;
    ++n_active;
    active.push_back({{"label", a.label}, {"kind", a.kind}, {"slack", a.slack}});
  }
  j["activity"] = {{"blocks", activity.size()}, {"active", n_active}, {"active_blocks", active}};
  j["backend"] = backend;
  j["pglib_version"] = pglib_version;
  return j;
}

SolveReport solve_relaxation(const NetworkCase& c, const SolveOptions& opts) {
  const auto solver = make_solver(opts.backend);
  const Relaxation relax = build_relaxation(c, opts.relaxation);
  const Solution sol = solver->solve(relax.program, SolverConfig{});

  SolveReport r;
  r.case_name = c.name;
  r.relaxation = opts.relaxation;
  r.status = sol.status;
  r.objective = sol.objective;
  r.solve_time_s = sol.solve_time_s;
  r.iterations = sol.iterations;
  r.backend = solver->name();
  if (opts.reference_objective) r.gap_percent = gap_percent(sol.objective, *opts.reference_objective);
  if (sol.status == SolveStatus::kOptimal) {
    const auto cuts = kim_params(opts.relaxation);
    for (const auto& t : relax.triangles) {
      r.triangles.push_back(diagnose_triangle(relax.map.block(sol.x, t), t, cuts, opts.diagnostic_tol));
    }
    r.activity = activity_report(sol, relax.program, opts.diagnostic_tol);
  }
  return r;
}

std::vector<double> sweep_axis(const SweepOptions& opts) {
  std::vector<double> axis;
  for (int k = 0; k < opts.grid; ++k) axis.push_back(opts.lower + k * (opts.upper - opts.lower) / opts.grid);
  return axis;
}

SweepResult run_sweep(const NetworkCase& c, const SweepOptions& opts) {
  if (opts.grid < 1) throw std::invalid_argument("grid must be positive");
  const auto axis = sweep_axis(opts);
  const auto solver = make_solver(opts.backend);
  SweepResult out;
  out.points.resize(axis.size() * axis.size());
  for (std::size_t a = 0; a < axis.size(); ++a) {
    for (std::size_t b = 0; b < axis.size(); ++b) {
      auto& pt = out.points[a * axis.size() + b];
      pt.theta1 = axis[a];
      pt.theta2 = axis[b];
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < out.points.size(); i = next++) {
      SweepPoint& pt = out.points[i];
      RelaxationSpec spec{RelaxationKind::kKimPmSoc, {pt.theta1, pt.theta2}, opts.r, opts.orientation};
      const Relaxation relax = build_relaxation(c, spec);
      const Solution sol = solver->solve(relax.program, SolverConfig{});
      pt.status = sol.status;
      pt.objective = sol.status == SolveStatus::kOptimal ? sol.objective
                                                         : std::numeric_limits<double>::quiet_NaN();
      pt.solve_time_s = sol.solve_time_s;
    }
  };
  int jobs = opts.jobs > 0 ? opts.jobs : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::clamp(jobs, 1, static_cast<int>(out.points.size()));
  std::vector<std::jthread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  pool.clear();

  // Objectives within solver precision of the maximum count as ties; points
  // are stored in lexicographic order so the first tied point wins.
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& pt : out.points) {
    if (pt.status == SolveStatus::kOptimal) best = std::max(best, pt.objective);
  }
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const SweepPoint& pt = out.points[i];
    if (pt.status == SolveStatus::kOptimal && pt.objective >= best - kSweepTieTol * std::max(1.0, std::abs(best))) {
      out.best = i;
      break;
    }
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "# objective: Kim+PM relaxation objective in $/h; gap% = 100*(reference-objective)/reference\n";
  os << "theta1,theta2,objective,status,solve_time_s\n";
  for (const auto& pt : r.points) {
    os << format_double(pt.theta1) << ',' << format_double(pt.theta2) << ',' << format_double(pt.objective)
       << ',' << to_string(pt.status) << ',' << fmt::format("{:.6f}", pt.solve_time_s) << '\n';
  }
  if (r.best) {
    const auto& b = r.points[*r.best];
    os << "# best," << format_double(b.theta1) << ',' << format_double(b.theta2) << ','
       << format_double(b.objective) << '\n';
  } else {
    os << "# best,none\n";
  }
}

std::vector<TableRow> run_table(const std::vector<std::filesystem::path>& cases,
                                const std::vector<double>& references,
                                const std::vector<RelaxationKind>& relaxations,
                                const std::vector<double>& thetas, const std::string& backend,
                                std::ostream& warnings) {
  if (cases.size() != references.size()) {
    throw std::invalid_argument(fmt::format("{} cases but {} reference objectives", cases.size(), references.size()));
  }
  const auto solver = make_solver(backend);
  std::vector<TableRow> rows;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const NetworkCase c = load_matpower(cases[i]);
    TableRow row{c.name, references[i], {}};
    for (const RelaxationKind kind : relaxations) {
      TableCell cell{kind, std::nullopt, std::nullopt, ""};
      if (kind == RelaxationKind::kSdp && !solver->supports_psd()) {
        cell.status = "unsupported";
        warnings << fmt::format("warning: backend '{}' cannot solve the SDP relaxation of {}\n",
                                solver->name(), c.name);
        row.cells.push_back(cell);
        continue;
      }
      SolveOptions opts;
      opts.relaxation.kind = kind;
      opts.relaxation.thetas = thetas;
      opts.backend = backend;
      opts.reference_objective = references[i];
      const Relaxation relax = build_relaxation(c, opts.relaxation);
      const Solution sol = solver->solve(relax.program, SolverConfig{});
      cell.status = to_string(sol.status);
      if (sol.status == SolveStatus::kOptimal) {
        cell.objective = sol.objective;
        cell.gap_percent = gap_percent(sol.objective, references[i]);
      }
      row.cells.push_back(cell);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json table_json(const std::vector<TableRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json cells = nlohmann::json::object();
    for (const auto& cell : row.cells) {
      nlohmann::json jc = {{"status", cell.status}};
      jc["objective"] = cell.objective ? nlohmann::json(*cell.objective) : nlohmann::json(nullptr);
      jc["gap_percent"] = cell.gap_percent ? nlohmann::json(*cell.gap_percent) : nlohmann::json(nullptr);
      cells[std::string(to_string(cell.kind))] = jc;
    }
    out.push_back({{"case_name", row.case_name},
                   {"reference_objective", row.reference_objective},
                   {"relaxations", cells},
                   {"pglib_version", std::string(kPglibVersion)}});
  }
  return out;
}

void write_table_text(std::ostream& os, const std::vector<TableRow>& rows) {
  if (rows.empty()) return;
  os << fmt::format("{:<28}{:>12}", "case", "AC ref");
  for (const auto& cell : rows.front().cells) os << fmt::format("{:>14}", fmt::format("{} gap%", to_string(cell.kind)));
  os << '\n';
  for (const auto& row : rows) {
    os << fmt::format("{:<28}{:>12.2f}", row.case_name, row.reference_objective);
    for (const auto& cell : row.cells) {
      os << fmt::format("{:>14}", cell.gap_percent ? fmt::format("{:.2f}", *cell.gap_percent) : cell.status);
    }
    os << '\n';
  }
}

namespace {

std::vector<double> to_radians(std::vector<double> v, bool degrees) {
  if (degrees) {
    for (double& t : v) t *= std::numbers::pi / 180.0;
  }
  return v;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Lifted-W OPF relaxations with parameterized SOC cuts"};
  app.require_subcommand(1);

  // solve
  std::string case_path;
  std::string relax_name = "pm";
  std::vector<double> thetas{0.0, 1.5 * std::numbers::pi};
  double r = 1.0;
  std::optional<double> ref_obj;
  double tol = kDefaultDiagnosticTol;
  std::string out_path;
  bool degrees = false;
  std::string backend = "ipm";
  bool ascending = false;

  auto* solve_cmd = app.add_subcommand("solve", "Solve one relaxation and print a JSON report");
  solve_cmd->add_option("--case", case_path, "MATPOWER case file")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--relax", relax_name, "pm | kim | sdp")->check(CLI::IsMember({"pm", "kim", "sdp"}));
  solve_cmd->add_option("--theta", thetas, "Comma-separated angles (radians unless --deg)")->delimiter(',');
  solve_cmd->add_option("--r", r, "Cut scale r >= 0")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--ref-obj", ref_obj, "Reference AC objective in $/h");
  solve_cmd->add_option("--tol", tol, "Diagnostic tolerance");
  solve_cmd->add_option("--out", out_path, "Write the report here instead of stdout");
  solve_cmd->add_flag("--deg", degrees, "Angles are in degrees");
  solve_cmd->add_option("--backend", backend, "ipm | ipm-socp");
  solve_cmd->add_flag("--ascending", ascending, "Order the remaining buses of each partition ascending");

  // sweep
  int grid = 32;
  std::string range = "0:6.2831853";
  int jobs = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Kim+PM objective over a theta1 x theta2 grid (CSV)");
  sweep_cmd->add_option("--case", case_path, "MATPOWER case file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--grid", grid, "Points per axis")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--range", range, "lo:hi in radians (hi excluded)");
  sweep_cmd->add_option("--r", r, "Cut scale r >= 0")->check(CLI::NonNegativeNumber);
  sweep_cmd->add_option("--jobs", jobs, "Parallel solves (default: available cores)");
  sweep_cmd->add_option("--out", out_path, "CSV path (default stdout)");
  sweep_cmd->add_option("--backend", backend, "ipm | ipm-socp");
  sweep_cmd->add_flag("--ascending", ascending, "Order the remaining buses of each partition ascending");

  // table
  std::vector<std::string> case_paths;
  std::vector<double> refs;
  std::vector<std::string> relax_names{"pm", "kim", "sdp"};
  std::string format = "text";
  auto* table_cmd = app.add_subcommand("table", "Gap table over several cases");
  table_cmd->add_option("--cases", case_paths, "Case files")->required()->delimiter(',')->check(CLI::ExistingFile);
  table_cmd->add_option("--ref-objs", refs, "Reference objectives, one per case")->required()->delimiter(',');
  table_cmd->add_option("--relaxations", relax_names, "Subset of pm,kim,sdp")
      ->delimiter(',')
      ->check(CLI::IsMember({"pm", "kim", "sdp"}));
  table_cmd->add_option("--theta", thetas, "Kim angles (radians unless --deg)")->delimiter(',');
  table_cmd->add_flag("--deg", degrees, "Angles are in degrees");
  table_cmd->add_option("--out", format, "text | json")->check(CLI::IsMember({"text", "json"}));
  table_cmd->add_option("--backend", backend, "ipm | ipm-socp");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const KimOrientation orientation = ascending ? KimOrientation::kAscending : KimOrientation::kCyclic;
  try {
    if (*solve_cmd) {
      const NetworkCase c = load_matpower(case_path);
      SolveOptions opts;
      opts.relaxation = {parse_relaxation(relax_name), to_radians(thetas, degrees), r, orientation};
      opts.reference_objective = ref_obj;
      opts.diagnostic_tol = tol;
      opts.backend = backend;
      const SolveReport report = solve_relaxation(c, opts);
      write_output(out_path, report.to_json().dump(2) + "\n");
      return report.status == SolveStatus::kOptimal ? 0 : 2;
    }
    if (*sweep_cmd) {
      const auto colon = range.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("--range must look like lo:hi");
      SweepOptions opts;
      opts.grid = grid;
      opts.lower = std::stod(range.substr(0, colon));
      opts.upper = std::stod(range.substr(colon + 1));
      opts.r = r;
      opts.jobs = jobs;
      opts.backend = backend;
      opts.orientation = orientation;
      const NetworkCase c = load_matpower(case_path);
      std::ostringstream csv;
      write_sweep_csv(csv, run_sweep(c, opts));
      write_output(out_path, csv.str());
      return 0;
    }
    if (*table_cmd) {
      std::vector<std::filesystem::path> paths(case_paths.begin(), case_paths.end());
      std::vector<RelaxationKind> kinds;
      for (const auto& n : relax_names) kinds.push_back(parse_relaxation(n));
      const auto rows = run_table(paths, refs, kinds, to_radians(thetas, degrees), backend, std::cerr);
      std::ostringstream os;
      if (format == "json") {
        os << table_json(rows).dump(2) << '\n';
      } else {
        write_table_text(os, rows);
      }
      write_output("", os.str());
      return 0;
    }
  } catch (const CapabilityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace w3cone
