// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance            run every criterion
//   acceptance <name>     run one (see kCriteria)

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <string>

#include "test_support.hpp"
#include "w3cone/cli.hpp"
#include "w3cone/diagnostics.hpp"
#include "w3cone/kimcuts.hpp"
#include "w3cone/solver.hpp"
#include "w3cone/wopf.hpp"

namespace {

using namespace w3cone;
using cd = std::complex<double>;
using testing::load_case;
using testing::make_rng;
using testing::random_complex;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct CaseRef {
  const char* stem;
  double reference;
  double gap_pm;
  double gap_kim;
  double gap_sdp;
};

const CaseRef kCases[] = {
    {"pglib_opf_case3_lmbd", 5812.64, 1.32, 0.54, 0.38},
    {"pglib_opf_case5_pjm", 17551.89, 14.54, 14.47, 5.22},
    {"pglib_opf_case14_ieee", 2178.08, 0.11, 0.00, 0.00},
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double solve_objective(const NetworkCase& c, RelaxationKind kind, SolveStatus& status) {
  const Solution s = solve(build_relaxation(c, {kind}).program);
  status = s.status;
  return s.objective;
}

Outcome table_column(RelaxationKind kind, double band) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  for (const CaseRef& ref : kCases) {
    const NetworkCase c = load_case(ref.stem);
    SolveStatus status{};
    const double obj = solve_objective(c, kind, status);
    const double expected = kind == RelaxationKind::kPmSoc     ? ref.gap_pm
                            : kind == RelaxationKind::kKimPmSoc ? ref.gap_kim
                                                                : ref.gap_sdp;
    const double gap = gap_percent(obj, ref.reference);
    const bool ok = status == SolveStatus::kOptimal && std::abs(gap - expected) <= band;
    out.pass = out.pass && ok;
    out.detail += fmt::format("{} gap {:.3f}% (want {:.2f}±{:.2f}){}; ", c.name, gap, expected, band,
                              ok ? "" : " MISS");
    if (kind == RelaxationKind::kKimPmSoc) {
      SolveStatus pm_status{};
      const double pm = solve_objective(c, RelaxationKind::kPmSoc, pm_status);
      if (obj < pm - 1e-6 * std::abs(obj)) {
        out.pass = false;
        out.detail += fmt::format("kim {:.6f} below pm {:.6f}; ", obj, pm);
      }
    }
  }
  out.detail += fmt::format("{:.1f} s", seconds_since(t0));
  return out;
}

Outcome table_pm() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out = table_column(RelaxationKind::kPmSoc, 0.10);
  if (seconds_since(t0) >= 10.0) {
    out.pass = false;
    out.detail += " (over 10 s)";
  }
  return out;
}

Outcome table_kim() { return table_column(RelaxationKind::kKimPmSoc, 0.10); }

Outcome table_sdp() {
  if (!make_solver("ipm")->supports_psd()) return {true, "skipped: capability"};
  return table_column(RelaxationKind::kSdp, 0.15);
}

SweepResult sweep(const std::string& stem) {
  SweepOptions opts;  // 32 x 32 over [0, 2pi), r = 1
  return run_sweep(load_case(stem), opts);
}

const double kCell = 2.0 * kPi / 32.0;

Outcome sweep_near(const std::string& stem, double target, double theta1, double theta2, bool diagonal,
                   double max_seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult r = sweep(stem);
  const double elapsed = seconds_since(t0);
  if (!r.best) return {false, "no optimal grid point"};
  const SweepPoint& b = r.points[*r.best];
  const double rel = std::abs(b.objective - target) / target;
  const bool near = std::abs(b.theta1 - theta1) <= kCell && std::abs(b.theta2 - theta2) <= kCell;
  Outcome out{rel <= 0.005 && near && elapsed < max_seconds,
              fmt::format("best {:.2f} at ({:.4f}, {:.4f}); want {:.0f}±0.5% near ({}, {}) within one cell {:.4f}; "
                          "{:.1f} s",
                          b.objective, b.theta1, b.theta2, target, theta1, theta2, kCell, elapsed)};
  if (diagonal) {
    double diag_best = -1.0, diag_theta = 0.0;
    for (const auto& pt : r.points) {
      if (pt.theta1 == pt.theta2 && pt.status == SolveStatus::kOptimal && pt.objective > diag_best) {
        diag_best = pt.objective;
        diag_theta = pt.theta1;
      }
    }
    out.detail += fmt::format("; diagonal best {:.2f} at {:.4f}", diag_best, diag_theta);
  }
  return out;
}

Outcome sweep_case3() { return sweep_near("pglib_opf_case3_lmbd", 5790.0, 3.7, 3.7, true, 300.0); }
Outcome sweep_case5() { return sweep_near("pglib_opf_case5_pjm", 16181.0, 1.6, 4.9, false, 1e9); }

Outcome sweep_case14() {
  const SweepResult r = sweep("pglib_opf_case14_ieee");
  if (!r.best) return {false, "no optimal grid point"};
  const double target = 2178.0;
  const SweepPoint& b = r.points[*r.best];
  bool plateau = true;
  double worst = 0.0;
  for (const auto& pt : r.points) {
    if (pt.theta1 < kPi || pt.theta2 < kPi) continue;
    const double rel = pt.status == SolveStatus::kOptimal ? std::abs(pt.objective - target) / target : 1.0;
    worst = std::max(worst, rel);
    plateau = plateau && rel <= 0.005;
  }
  const bool ok = std::abs(b.objective - target) / target <= 0.005 && plateau;
  return {ok, fmt::format("best {:.3f} at ({:.4f}, {:.4f}); worst deviation on [pi, 2pi)^2 {:.4f}%", b.objective,
                          b.theta1, b.theta2, 100.0 * worst)};
}

KimCutParams random_params(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> part(1, 3);
  std::uniform_real_distribution<double> r(0.0, 10.0), th(0.0, 2.0 * kPi);
  return {part(rng), r(rng), th(rng)};
}

Outcome cut_validity() {
  auto rng = make_rng(100);
  int violations = 0;
  double worst = 0.0;
  const int samples = 10000;
  for (int s = 0; s < samples; ++s) {
    const int k = 1 + s % 3;
    Eigen::MatrixXcd b(3, k);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < k; ++j) b(i, j) = random_complex(rng);
    }
    const HermitianBlock3 w = HermitianBlock3::from_matrix(b * b.adjoint());
    const KimCutParams p = random_params(rng);
    const KimEvaluation e = eval_kim(w, p);
    const double excess = e.lhs - e.rhs;
    const double frob = frobenius_row(p).slack(w);
    worst = std::max({worst, excess, -frob});
    if (excess > 1e-9 * (1.0 + e.rhs) || frob < -1e-9) ++violations;
  }
  return {violations == 0, fmt::format("{} samples, {} violations, worst excess {:.3g}", samples, violations, worst)};
}

Outcome rank1_tightness() {
  auto rng = make_rng(101);
  double kim_worst = 0.0, kvl_worst = 0.0, rec_worst = 0.0;
  bool ok = true;
  for (int s = 0; s < 10000; ++s) {
    const std::array<cd, 3> u{random_complex(rng), random_complex(rng), random_complex(rng)};
    const HermitianBlock3 w = HermitianBlock3::from_voltages(u);
    const KimCutParams p = random_params(rng);
    const KimEvaluation e = eval_kim(w, p);
    const double kim_rel = std::abs(e.lhs - e.rhs) / (1.0 + e.rhs);
    kim_worst = std::max(kim_worst, kim_rel);
    for (double v : kvl_residuals(w)) kvl_worst = std::max(kvl_worst, std::abs(v));
    const HermitianBlock3 back = HermitianBlock3::from_voltages(reconstruct_voltages(w));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) rec_worst = std::max(rec_worst, std::abs(back.entry(i, j) - w.entry(i, j)));
    }
  }
  ok = kim_worst <= 1e-9 && kvl_worst <= 1e-10 && rec_worst <= 1e-6;
  return {ok, fmt::format("kim |lhs-rhs| {:.3g} (rel), kvl {:.3g}, reconstruction {:.3g}", kim_worst, kvl_worst,
                          rec_worst)};
}

Outcome r0_reduction() {
  bool symbolic = true;
  const auto pm = pm_soc_rows();
  for (int part = 1; part <= 3; ++part) {
    for (double th : {0.0, 1.0, 4.5}) {
      const CutRow k = kim_soc_row({part, 0.0, th});
      bool found = false;
      for (const auto& row : pm) {
        const bool factors = (row.factor_a == k.factor_a && row.factor_b == k.factor_b) ||
                             (row.factor_a == k.factor_b && row.factor_b == k.factor_a);
        found = found || (factors && row.u[0] == k.u[0] && row.u[1] == k.u[1]);
      }
      symbolic = symbolic && found;
    }
  }
  const NetworkCase c = load_case("pglib_opf_case3_lmbd");
  const Solution s_pm = solve(build_relaxation(c, {RelaxationKind::kPmSoc}).program);
  RelaxationSpec spec{RelaxationKind::kKimPmSoc};
  spec.r = 0.0;
  const Solution s_kim = solve(build_relaxation(c, spec).program);
  const double rel = std::abs(s_kim.objective - s_pm.objective) / std::abs(s_pm.objective);
  const bool ok = symbolic && s_pm.status == SolveStatus::kOptimal && s_kim.status == SolveStatus::kOptimal &&
                  rel <= 1e-6;
  return {ok, fmt::format("symbolic {}; pm {:.6f} vs kim(r=0) {:.6f}, rel diff {:.3g}", symbolic ? "equal" : "DIFFER",
                          s_pm.objective, s_kim.objective, rel)};
}

// Direct complex pi-model flows from raw branch data.
std::array<cd, 2> pi_flows(const Branch& br, cd uf, cd ut) {
  const cd y = 1.0 / cd(br.r, br.x);
  const cd half_b(0.0, br.b_charge / 2.0);
  const cd tap = std::polar(br.tap, br.shift);
  const cd i_from = (y + half_b) / (br.tap * br.tap) * uf - y / std::conj(tap) * ut;
  const cd i_to = -y / tap * uf + (y + half_b) * ut;
  return {uf * std::conj(i_from), ut * std::conj(i_to)};
}

NetworkCase random_network(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  NetworkCase c;
  for (int i = 0; i < n; ++i) {
    Bus b;
    b.id = i + 1;
    b.vmin = 0.9;
    b.vmax = 1.1;
    c.buses.push_back(b);
    c.bus_index[b.id] = i;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Branch br;
      br.from_bus = u01(rng) < 0.5 ? i : j;
      br.to_bus = br.from_bus == i ? j : i;
      br.r = 0.05 * u01(rng);
      br.x = 0.05 + 0.3 * u01(rng);
      br.b_charge = 0.1 * u01(rng);
      br.tap = u01(rng) < 0.5 ? 1.0 : 0.9 + 0.2 * u01(rng);
      br.shift = u01(rng) < 0.5 ? 0.0 : 0.4 * (u01(rng) - 0.5);
      br.angmin = -kPi / 3;
      br.angmax = kPi / 3;
      c.branches.push_back(br);
    }
  }
  return c;
}

Outcome flow_oracle() {
  auto rng = make_rng(102);
  std::uniform_real_distribution<double> mag(0.8, 1.2), ang(-kPi, kPi);
  double worst = 0.0;
  int samples = 0;
  for (int n : {2, 3}) {
    for (int s = 0; s < 1000; ++s, ++samples) {
      const NetworkCase c = random_network(rng, n);
      const ProgramWithMap b = build_base(c);
      std::vector<double> x(b.program.num_vars(), 0.0);
      std::vector<cd> u;
      for (int i = 0; i < n; ++i) u.push_back(std::polar(mag(rng), ang(rng)));
      for (int i = 0; i < n; ++i) x[b.map.w_diag[i]] = std::norm(u[i]);
      for (const auto& [pair, vars] : b.map.w_off) {
        const cd w = u[pair.first] * std::conj(u[pair.second]);
        x[vars.re] = w.real();
        x[vars.im] = w.imag();
      }
      // each flow row reads expr(W) - flow = 0; with flows at zero the row value is the flow
      std::map<int, double> flow_value;
      for (const auto& row : b.program.linear_rows()) {
        if (!row.is_equality()) continue;
        for (const auto& t : row.expr.terms()) {
          for (std::size_t l = 0; l < c.branches.size(); ++l) {
            for (int side = 0; side < 4; ++side) {
              if (b.map.flow[l][side] == t.var && t.coef == -1.0 && row.label.find("flow") != std::string::npos) {
                flow_value[t.var] = row.expr.evaluate(x);
              }
            }
          }
        }
      }
      for (std::size_t l = 0; l < c.branches.size(); ++l) {
        const Branch& br = c.branches[l];
        const auto f = pi_flows(br, u[br.from_bus], u[br.to_bus]);
        const double vals[4] = {f[0].real(), f[0].imag(), f[1].real(), f[1].imag()};
        for (int side = 0; side < 4; ++side) {
          worst = std::max(worst, std::abs(flow_value.at(b.map.flow[l][side]) - vals[side]));
        }
      }
    }
  }
  return {worst <= 1e-10, fmt::format("{} assignments, worst |row - pi model| {:.3g}", samples, worst)};
}

std::vector<std::array<int, 3>> brute_force_triangles(const NetworkCase& c) {
  std::set<std::pair<int, int>> edges;
  for (const auto& br : c.branches) {
    if (br.in_service && br.from_bus != br.to_bus) {
      edges.insert({std::min(br.from_bus, br.to_bus), std::max(br.from_bus, br.to_bus)});
    }
  }
  std::vector<std::array<int, 3>> out;
  const int n = c.num_buses();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        if (edges.contains({i, j}) && edges.contains({i, k}) && edges.contains({j, k})) out.push_back({i, j, k});
      }
    }
  }
  return out;
}

bool triangles_match(const NetworkCase& c) {
  std::vector<std::array<int, 3>> got;
  for (const auto& t : enumerate_triangles(c)) got.push_back(t.buses);
  return got == brute_force_triangles(c);
}

Outcome triangle_enumeration() {
  int mismatches = 0;
  std::string counts;
  for (const CaseRef& ref : kCases) {
    const NetworkCase c = load_case(ref.stem);
    if (!triangles_match(c)) ++mismatches;
    counts += fmt::format("{}: {} ", c.name, enumerate_triangles(c).size());
  }
  auto rng = make_rng(103);
  std::uniform_int_distribution<int> size(3, 20);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int g = 0; g < 100; ++g) {
    const int n = size(rng);
    NetworkCase c = random_network(rng, n);
    const double density = u01(rng);
    std::vector<Branch> kept;
    for (auto br : c.branches) {
      if (u01(rng) > density) continue;
      br.in_service = u01(rng) > 0.1;
      kept.push_back(br);
      if (u01(rng) < 0.1) kept.push_back(br);  // parallel branch
    }
    c.branches = kept;
    if (!triangles_match(c)) ++mismatches;
  }
  return {mismatches == 0, counts + fmt::format("; 100 random graphs; {} mismatches", mismatches)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria = {
    {"table_pm", table_pm},
    {"table_kim", table_kim},
    {"table_sdp", table_sdp},
    {"sweep_case3", sweep_case3},
    {"sweep_case5", sweep_case5},
    {"sweep_case14", sweep_case14},
    {"cut_validity", cut_validity},
    {"rank1_tightness", rank1_tightness},
    {"r0_reduction", r0_reduction},
    {"flow_oracle", flow_oracle},
    {"triangle_enumeration", triangle_enumeration},
};

}  // namespace

int main(int argc, char** argv) {
  const std::string only = argc > 1 ? argv[1] : "";
  bool known = only.empty();
  int failures = 0;
  for (const auto& [name, run] : kCriteria) {
    if (!only.empty() && name != only) continue;
    known = true;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failures += !o.pass;
  }
  if (!known) {
    std::cerr << "unknown criterion '" << only << "'\n";
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
