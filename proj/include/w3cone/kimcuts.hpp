#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace w3cone {

// Fields of a 3x3 Hermitian block in the lifted voltage space. Off-diagonal
// entries follow W_pq = U_p * conj(U_q) for p < q.
enum class Sym { kW11, kW22, kW33, kW12re, kW12im, kW13re, kW13im, kW23re, kW23im };
inline constexpr int kNumSyms = 9;

struct HermitianBlock3 {
  double w11 = 0.0, w22 = 0.0, w33 = 0.0;
  double w12re = 0.0, w12im = 0.0;
  double w13re = 0.0, w13im = 0.0;
  double w23re = 0.0, w23im = 0.0;

  static HermitianBlock3 from_matrix(const Eigen::Matrix3cd& m);
  static HermitianBlock3 from_voltages(const std::array<std::complex<double>, 3>& u);

  Eigen::Matrix3cd matrix() const;
  // Zero-based (i, j), any order.
  std::complex<double> entry(int i, int j) const;
  double value(Sym s) const;
  std::array<double, kNumSyms> values() const;
};

// Linear combination of the nine block fields.
struct SymExpr {
  std::array<double, kNumSyms> coef{};

  static SymExpr of(Sym s, double c = 1.0) {
    SymExpr e;
    e.coef[static_cast<int>(s)] = c;
    return e;
  }
  double evaluate(const HermitianBlock3& w) const;

  SymExpr& operator+=(const SymExpr& o) {
    for (int k = 0; k < kNumSyms; ++k) coef[k] += o.coef[k];
    return *this;
  }
  SymExpr& operator*=(double s) {
    for (double& c : coef) c *= s;
    return *this;
  }
  friend SymExpr operator+(SymExpr a, const SymExpr& b) { return a += b; }
  friend SymExpr operator-(SymExpr a, SymExpr b) { return a += (b *= -1.0); }
  friend SymExpr operator*(double s, SymExpr a) { return a *= s; }
  friend bool operator==(const SymExpr&, const SymExpr&) = default;
};

// How the two remaining buses are ordered once the alpha bus is chosen.
// kCyclic: 1 -> (2,3), 2 -> (3,1), 3 -> (1,2).
// kAscending: remaining buses in increasing order.
enum class KimOrientation { kCyclic, kAscending };

struct KimCutParams {
  int partition = 1;  // which diagonal entry plays alpha, 1..3
  double r = 1.0;
  double theta = 0.0;
  KimOrientation orientation = KimOrientation::kCyclic;
};

// Remaining bus pair (p, q), zero-based, for a partition.
std::pair<int, int> remaining_buses(int partition, KimOrientation orientation);

// soc rows encode u1^2 + u2^2 <= factor_a * factor_b with factor_a, factor_b >= 0
// (rotated-cone form); linear rows encode linear >= 0.
struct CutRow {
  enum class Kind { kSoc, kLinear };
  Kind kind = Kind::kSoc;
  SymExpr factor_a;
  SymExpr factor_b;
  std::array<SymExpr, 2> u;
  SymExpr linear;
  std::string label;

  // soc: factor_a * factor_b - (u1^2 + u2^2); linear: row value.
  double slack(const HermitianBlock3& w) const;
};

std::vector<CutRow> pm_soc_rows();
CutRow kim_soc_row(const KimCutParams& p);
CutRow frobenius_row(const KimCutParams& p);

struct KimEvaluation {
  double lhs = 0.0;  // |c^H a|^2
  double rhs = 0.0;  // alpha * (C . A)
};

// Numeric evaluation from the block partition [[alpha, a^H], [a, A]] with
// c = (1, r e^{j theta}).
KimEvaluation eval_kim(const HermitianBlock3& w, const KimCutParams& p);

}  // namespace w3cone
