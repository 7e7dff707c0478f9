#include "w3cone/kimcuts.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace w3cone {

namespace {

using cd = std::complex<double>;

// Symbolic complex entry W(i, j).
struct SymComplex {
  SymExpr re;
  SymExpr im;
};

constexpr Sym kDiag[3] = {Sym::kW11, Sym::kW22, Sym::kW33};

std::pair<Sym, Sym> off_syms(int i, int j) {
  if (i == 0 && j == 1) return {Sym::kW12re, Sym::kW12im};
  if (i == 0 && j == 2) return {Sym::kW13re, Sym::kW13im};
  return {Sym::kW23re, Sym::kW23im};
}

SymComplex sym_entry(int i, int j) {
  if (i == j) return {SymExpr::of(kDiag[i]), SymExpr{}};
  if (i < j) {
    const auto [re, im] = off_syms(i, j);
    return {SymExpr::of(re), SymExpr::of(im)};
  }
  const auto [re, im] = off_syms(j, i);
  return {SymExpr::of(re), SymExpr::of(im, -1.0)};
}

// x * z for a numeric complex x and symbolic z.
SymComplex scale(cd x, const SymComplex& z) {
  return {x.real() * z.re - x.imag() * z.im, x.real() * z.im + x.imag() * z.re};
}

void check_params(const KimCutParams& p) {
  if (p.partition < 1 || p.partition > 3) {
    throw std::invalid_argument(fmt::format("partition must be 1, 2 or 3 (got {})", p.partition));
  }
  if (!(p.r >= 0.0)) throw std::invalid_argument(fmt::format("r must be nonnegative (got {})", p.r));
}

// C . A = W_pp + r^2 W_qq + 2 Re(rho W_pq).
SymExpr frobenius_expr(const KimCutParams& p) {
  const auto [bp, bq] = remaining_buses(p.partition, p.orientation);
  const cd rho = std::polar(p.r, p.theta);
  return SymExpr::of(kDiag[bp]) + (p.r * p.r) * SymExpr::of(kDiag[bq]) +
         2.0 * scale(rho, sym_entry(bp, bq)).re;
}

std::string param_label(const KimCutParams& p) {
  return fmt::format("part={}/r={:g}/theta={:.6f}", p.partition, p.r, p.theta);
}

}  // namespace

HermitianBlock3 HermitianBlock3::from_matrix(const Eigen::Matrix3cd& m) {
  HermitianBlock3 w;
  w.w11 = m(0, 0).real();
  w.w22 = m(1, 1).real();
  w.w33 = m(2, 2).real();
  w.w12re = m(0, 1).real();
  w.w12im = m(0, 1).imag();
  w.w13re = m(0, 2).real();
  w.w13im = m(0, 2).imag();
  w.w23re = m(1, 2).real();
  w.w23im = m(1, 2).imag();
  return w;
}

HermitianBlock3 HermitianBlock3::from_voltages(const std::array<cd, 3>& u) {
  Eigen::Vector3cd v(u[0], u[1], u[2]);
  return from_matrix(v * v.adjoint());
}

Eigen::Matrix3cd HermitianBlock3::matrix() const {
  Eigen::Matrix3cd m;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = entry(i, j);
  }
  return m;
}

cd HermitianBlock3::entry(int i, int j) const {
  const double diag[3] = {w11, w22, w33};
  if (i == j) return {diag[i], 0.0};
  const bool swap = i > j;
  if (swap) std::swap(i, j);
  cd v;
  if (i == 0 && j == 1) {
    v = {w12re, w12im};
  } else if (i == 0 && j == 2) {
    v = {w13re, w13im};
  } else {
    v = {w23re, w23im};
  }
  return swap ? std::conj(v) : v;
}

std::array<double, kNumSyms> HermitianBlock3::values() const {
  return {w11, w22, w33, w12re, w12im, w13re, w13im, w23re, w23im};
}

double HermitianBlock3::value(Sym s) const { return values()[static_cast<int>(s)]; }

double SymExpr::evaluate(const HermitianBlock3& w) const {
  const auto v = w.values();
  double out = 0.0;
  for (int k = 0; k < kNumSyms; ++k) out += coef[k] * v[k];
  return out;
}

std::pair<int, int> remaining_buses(int partition, KimOrientation orientation) {
  const int a = partition - 1;
  if (orientation == KimOrientation::kCyclic) return {(a + 1) % 3, (a + 2) % 3};
  switch (a) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}

double CutRow::slack(const HermitianBlock3& w) const {
  if (kind == Kind::kLinear) return linear.evaluate(w);
  const double u1 = u[0].evaluate(w);
  const double u2 = u[1].evaluate(w);
  return factor_a.evaluate(w) * factor_b.evaluate(w) - (u1 * u1 + u2 * u2);
}

std::vector<CutRow> pm_soc_rows() {
  std::vector<CutRow> rows;
  for (const auto& [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    CutRow row;
    row.kind = CutRow::Kind::kSoc;
    row.factor_a = SymExpr::of(kDiag[i]);
    row.factor_b = SymExpr::of(kDiag[j]);
    const SymComplex e = sym_entry(i, j);
    row.u = {e.re, e.im};
    row.label = fmt::format("pm/({},{})", i + 1, j + 1);
    rows.push_back(std::move(row));
  }
  return rows;
}

CutRow kim_soc_row(const KimCutParams& p) {
  check_params(p);
  const int a = p.partition - 1;
  const auto [bp, bq] = remaining_buses(p.partition, p.orientation);
  const cd rho = std::polar(p.r, p.theta);
  // u = W_ap + rho W_aq, the conjugate of c^H a; written with the smaller
  // index first so that r = 0 gives the principal-minor row verbatim.
  const SymComplex wap = sym_entry(a, bp);
  const SymComplex rwaq = scale(rho, sym_entry(a, bq));
  SymComplex u{wap.re + rwaq.re, wap.im + rwaq.im};
  if (a > bp) u.im *= -1.0;

  CutRow row;
  row.kind = CutRow::Kind::kSoc;
  row.factor_a = SymExpr::of(kDiag[a]);
  row.factor_b = frobenius_expr(p);
  row.u = {u.re, u.im};
  row.label = "kim/" + param_label(p);
  return row;
}

CutRow frobenius_row(const KimCutParams& p) {
  check_params(p);
  CutRow row;
  row.kind = CutRow::Kind::kLinear;
  row.linear = frobenius_expr(p);
  row.label = "frob/" + param_label(p);
  return row;
}

KimEvaluation eval_kim(const HermitianBlock3& w, const KimCutParams& p) {
  check_params(p);
  const Eigen::Matrix3cd m = w.matrix();
  const int a = p.partition - 1;
  const auto [bp, bq] = remaining_buses(p.partition, p.orientation);
  Eigen::Vector2cd av(m(bp, a), m(bq, a));
  Eigen::Matrix2cd am;
  am << m(bp, bp), m(bp, bq), m(bq, bp), m(bq, bq);
  const Eigen::Vector2cd c(cd(1.0, 0.0), std::polar(p.r, p.theta));
  const cd cha = c.dot(av);  // c^H a
  const cd cac = c.dot(am * c);
  return {std::norm(cha), m(a, a).real() * cac.real()};
}

}  // namespace w3cone
