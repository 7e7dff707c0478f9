#include "w3cone/wopf.hpp"

#include <fmt/format.h>

#include <cmath>

namespace w3cone {

namespace {

using cd = std::complex<double>;
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// Re and Im of k * W for a complex constant k.
std::pair<AffineExpr, AffineExpr> times(cd k, const std::pair<AffineExpr, AffineExpr>& w) {
  return {k.real() * w.first - k.imag() * w.second, k.imag() * w.first + k.real() * w.second};
}

std::string bus_label(const NetworkCase& c, int i) { return std::to_string(c.buses[i].id); }

void add_pair(ConicProgram& p, WIndexMap& m, const NetworkCase& c, int i, int j, double re_lower) {
  if (i > j) std::swap(i, j);
  auto [it, inserted] = m.w_off.try_emplace({i, j});
  if (!inserted) return;
  const std::string tag = fmt::format("({},{})", bus_label(c, i), bus_label(c, j));
  it->second.re = p.add_variable(re_lower, kInf, "wr" + tag);
  it->second.im = p.add_variable(-kInf, kInf, "wi" + tag);
}

// Variables and constraints shared by every relaxation. When all_pairs is set,
// every bus pair gets W variables (fill-in pairs carry no flow rows).
ProgramWithMap build_common(const NetworkCase& c, bool all_pairs) {
  ProgramWithMap out;
  ConicProgram& p = out.program;
  WIndexMap& m = out.map;
  const int n = c.num_buses();

  for (int i = 0; i < n; ++i) {
    const Bus& b = c.buses[i];
    m.w_diag.push_back(p.add_variable(b.vmin * b.vmin, b.vmax * b.vmax, "w(" + bus_label(c, i) + ")"));
  }
  for (const Branch& br : c.branches) {
    if (br.in_service) add_pair(p, m, c, br.from_bus, br.to_bus, 0.0);
  }
  if (all_pairs) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) add_pair(p, m, c, i, j, -kInf);
    }
  }

  for (std::size_t g = 0; g < c.gens.size(); ++g) {
    const Generator& gen = c.gens[g];
    if (!gen.in_service) {
      m.pg.push_back(-1);
      m.qg.push_back(-1);
      m.cost_epi.push_back(-1);
      continue;
    }
    m.pg.push_back(p.add_variable(gen.pmin, gen.pmax, fmt::format("pg{}", g)));
    m.qg.push_back(p.add_variable(gen.qmin, gen.qmax, fmt::format("qg{}", g)));
    m.cost_epi.push_back(p.add_variable(-kInf, kInf, fmt::format("cost{}", g)));
  }

  std::vector<AffineExpr> p_balance(n), q_balance(n);
  for (std::size_t l = 0; l < c.branches.size(); ++l) {
    const Branch& br = c.branches[l];
    if (!br.in_service) {
      m.flow.push_back({-1, -1, -1, -1});
      continue;
    }
    const int f = br.from_bus;
    const int t = br.to_bus;
    const BranchAdmittance adm = branch_admittance(br);
    const double tau = std::abs(adm.tap);
    const std::string tag = fmt::format("{}({}-{})", l, bus_label(c, f), bus_label(c, t));
    std::array<int, 4> v{};
    v[0] = p.add_variable(-kInf, kInf, "pf" + tag);
    v[1] = p.add_variable(-kInf, kInf, "qf" + tag);
    v[2] = p.add_variable(-kInf, kInf, "pt" + tag);
    v[3] = p.add_variable(-kInf, kInf, "qt" + tag);
    m.flow.push_back(v);

    const auto w_ft = m.entry(f, t);
    const auto w_tf = m.entry(t, f);
    const cd self_from = std::conj(adm.y_series + adm.shunt_from) / (tau * tau);
    const cd mutual_from = -std::conj(adm.y_series) / adm.tap;
    const cd self_to = std::conj(adm.y_series + adm.shunt_to);
    const cd mutual_to = -std::conj(adm.y_series) / std::conj(adm.tap);

    const auto sf = times(mutual_from, w_ft);
    const auto st = times(mutual_to, w_tf);
    const AffineExpr wf = AffineExpr::variable(m.w_diag[f]);
    const AffineExpr wt = AffineExpr::variable(m.w_diag[t]);
    p.add_equality(self_from.real() * wf + sf.first - AffineExpr::variable(v[0]), 0.0, "pflow/" + tag);
    p.add_equality(self_from.imag() * wf + sf.second - AffineExpr::variable(v[1]), 0.0, "qflow/" + tag);
    p.add_equality(self_to.real() * wt + st.first - AffineExpr::variable(v[2]), 0.0, "pflow_to/" + tag);
    p.add_equality(self_to.imag() * wt + st.second - AffineExpr::variable(v[3]), 0.0, "qflow_to/" + tag);

    p_balance[f].add_term(v[0], 1.0);
    q_balance[f].add_term(v[1], 1.0);
    p_balance[t].add_term(v[2], 1.0);
    q_balance[t].add_term(v[3], 1.0);

    if (br.rate_a > 0.0) {
      p.add_soc({AffineExpr(br.rate_a), AffineExpr::variable(v[0]), AffineExpr::variable(v[1])},
                "thermal_from/" + tag);
      p.add_soc({AffineExpr(br.rate_a), AffineExpr::variable(v[2]), AffineExpr::variable(v[3])},
                "thermal_to/" + tag);
    }

    // tan(angmin) Re W_ft <= Im W_ft <= tan(angmax) Re W_ft
    p.add_linear(w_ft.second - std::tan(br.angmax) * w_ft.first, -kInf, 0.0, "angmax/" + tag);
    p.add_linear(w_ft.second - std::tan(br.angmin) * w_ft.first, 0.0, kInf, "angmin/" + tag);
  }

  for (std::size_t g = 0; g < c.gens.size(); ++g) {
    if (m.pg[g] < 0) continue;
    const int bus = c.gens[g].bus;
    p_balance[bus].add_term(m.pg[g], -1.0);
    q_balance[bus].add_term(m.qg[g], -1.0);
  }
  for (int i = 0; i < n; ++i) {
    const Bus& b = c.buses[i];
    p_balance[i].add_term(m.w_diag[i], b.gs);
    q_balance[i].add_term(m.w_diag[i], -b.bs);
    p.add_equality(p_balance[i], -b.pd, "pbal/" + bus_label(c, i));
    p.add_equality(q_balance[i], -b.qd, "qbal/" + bus_label(c, i));
  }

  // cost_g >= c2 q_g + c1 pg + c0 with q_g >= pg^2 as 2 * q_g * 1/2 >= pg^2; the
  // square gets its own variable so the cone stays in p.u. scale.
  AffineExpr objective;
  for (std::size_t g = 0; g < c.gens.size(); ++g) {
    if (m.pg[g] < 0) continue;
    const CostCoefficients k = c.per_unit_cost(c.gens[g]);
    const AffineExpr pg = AffineExpr::variable(m.pg[g]);
    AffineExpr excess = AffineExpr::variable(m.cost_epi[g]) - k.c1 * pg - AffineExpr(k.c0);
    if (k.c2 > 0.0) {
      const int sq = p.add_variable(-kInf, kInf, fmt::format("pgsq{}", g));
      p.add_rsoc({AffineExpr::variable(sq), AffineExpr(0.5), pg}, fmt::format("cost_square/{}", g));
      excess.add_term(sq, -k.c2);
    }
    p.add_linear(excess, 0.0, kInf, fmt::format("cost/{}", g));
    objective.add_term(m.cost_epi[g], 1.0);
  }
  p.set_objective(objective);
  return out;
}

}  // namespace

bool WIndexMap::has_pair(int i, int j) const {
  if (i > j) std::swap(i, j);
  return w_off.contains({i, j});
}

std::pair<AffineExpr, AffineExpr> WIndexMap::entry(int i, int j) const {
  if (i == j) return {AffineExpr::variable(w_diag.at(i)), AffineExpr()};
  const bool swapped = i > j;
  if (swapped) std::swap(i, j);
  const auto it = w_off.find({i, j});
  if (it == w_off.end()) {
    throw ContractViolation(fmt::format("no W variable for bus pair ({}, {})", i, j));
  }
  return {AffineExpr::variable(it->second.re), AffineExpr::variable(it->second.im, swapped ? -1.0 : 1.0)};
}

std::complex<double> WIndexMap::value(std::span<const double> x, int i, int j) const {
  const auto [re, im] = entry(i, j);
  return {re.evaluate(x), im.evaluate(x)};
}

HermitianBlock3 WIndexMap::block(std::span<const double> x, const Triangle& t) const {
  Eigen::Matrix3cd mat;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) mat(a, b) = value(x, t.buses[a], t.buses[b]);
  }
  return HermitianBlock3::from_matrix(mat);
}

ProgramWithMap build_base(const NetworkCase& c) {
  ProgramWithMap out = build_common(c, false);
  for (const auto& [pair, vars] : out.map.w_off) {
    const auto [i, j] = pair;
    out.program.add_rsoc({kInvSqrt2 * AffineExpr::variable(out.map.w_diag[i]),
                          kInvSqrt2 * AffineExpr::variable(out.map.w_diag[j]),
                          AffineExpr::variable(vars.re), AffineExpr::variable(vars.im)},
                         fmt::format("pm/({},{})", bus_label(c, i), bus_label(c, j)));
  }
  return out;
}

void attach_kim(ConicProgram& p, const WIndexMap& m, std::span<const Triangle> triangles,
                std::span<const double> thetas, double r, KimOrientation orientation) {
  for (const Triangle& t : triangles) {
    const auto [i, j, k] = t.buses;
    const auto e12 = m.entry(i, j);
    const auto e13 = m.entry(i, k);
    const auto e23 = m.entry(j, k);
    const std::array<AffineExpr, kNumSyms> bound = {
        AffineExpr::variable(m.w_diag.at(i)), AffineExpr::variable(m.w_diag.at(j)),
        AffineExpr::variable(m.w_diag.at(k)), e12.first, e12.second, e13.first, e13.second,
        e23.first, e23.second};
    auto bind = [&bound](const SymExpr& s) {
      AffineExpr e;
      for (int q = 0; q < kNumSyms; ++q) {
        if (s.coef[q] != 0.0) e += s.coef[q] * bound[q];
      }
      return e;
    };
    const std::string tri = fmt::format("kim/tri({},{},{})", i, j, k);
    for (int part = 1; part <= 3; ++part) {
      for (const double theta : thetas) {
        const KimCutParams params{part, r, theta, orientation};
        const CutRow cone = kim_soc_row(params);
        const CutRow frob = frobenius_row(params);
        const std::string label = fmt::format("{}/part={}/theta={:.6f}", tri, part, theta);
        p.add_rsoc({kInvSqrt2 * bind(cone.factor_a), kInvSqrt2 * bind(cone.factor_b), bind(cone.u[0]),
                    bind(cone.u[1])},
                   label);
        p.add_linear(bind(frob.linear), 0.0, kInf, label + "/frobenius");
      }
    }
  }
}

ProgramWithMap build_sdp(const NetworkCase& c, int dense_limit) {
  const int n = c.num_buses();
  if (n > dense_limit) {
    throw UnsupportedSize(fmt::format("SDP relaxation limited to {} buses, case has {}", dense_limit, n));
  }
  ProgramWithMap out = build_common(c, true);
  const WIndexMap& m = out.map;
  // [[Re W, -Im W], [Im W, Re W]], lower triangle row by row
  std::vector<AffineExpr> entries;
  entries.reserve(PsdBlock::packed_size(2 * n));
  for (int row = 0; row < 2 * n; ++row) {
    for (int col = 0; col <= row; ++col) {
      const int i = row % n;
      const int j = col % n;
      const auto [re, im] = m.entry(i, j);
      entries.push_back((row < n) == (col < n) ? re : im);
    }
  }
  out.program.add_psd(2 * n, std::move(entries), "sdp");
  return out;
}

std::string_view to_string(RelaxationKind k) {
  switch (k) {
    case RelaxationKind::kPmSoc: return "pm";
    case RelaxationKind::kKimPmSoc: return "kim";
    case RelaxationKind::kSdp: return "sdp";
  }
  return "unknown";
}

Relaxation build_relaxation(const NetworkCase& c, const RelaxationSpec& spec) {
  Relaxation out;
  out.triangles = enumerate_triangles(c);
  ProgramWithMap built = spec.kind == RelaxationKind::kSdp ? build_sdp(c) : build_base(c);
  if (spec.kind == RelaxationKind::kKimPmSoc) {
    if (spec.thetas.empty()) throw std::invalid_argument("Kim relaxation needs at least one theta");
    if (!(spec.r >= 0.0)) throw std::invalid_argument("Kim relaxation needs r >= 0");
    attach_kim(built.program, built.map, out.triangles, spec.thetas, spec.r, spec.orientation);
  }
  out.program = std::move(built.program);
  out.map = std::move(built.map);
  return out;
}

}  // namespace w3cone
