#pragma once

#include <array>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "w3cone/conic.hpp"
#include "w3cone/kimcuts.hpp"
#include "w3cone/netcase.hpp"

namespace w3cone {

class UnsupportedSize : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PairVars {
  int re = -1;
  int im = -1;
};

// Program variables of the lifted model. Stored off-diagonal pairs always
// have i < j; W_ji is the conjugate.
struct WIndexMap {
  std::vector<int> w_diag;
  std::map<std::pair<int, int>, PairVars> w_off;
  std::vector<int> pg;  // -1 for out-of-service generators
  std::vector<int> qg;
  std::vector<std::array<int, 4>> flow;  // per branch: P_from, Q_from, P_to, Q_to (-1 if out of service)
  std::vector<int> cost_epi;

  bool has_pair(int i, int j) const;
  // Real and imaginary parts of W_ij as expressions; i == j gives (W_ii, 0).
  std::pair<AffineExpr, AffineExpr> entry(int i, int j) const;
  // Numeric W_ij at a solution point.
  std::complex<double> value(std::span<const double> x, int i, int j) const;
  HermitianBlock3 block(std::span<const double> x, const Triangle& t) const;
};

struct ProgramWithMap {
  ConicProgram program;
  WIndexMap map;
};

// Lifted bus-injection model with principal-minor cones on every branch pair.
ProgramWithMap build_base(const NetworkCase& c);

// Appends, for every triangle, partition and theta, one Kim cone (rotated
// form) and its Frobenius row. Throws ContractViolation if a pair is missing.
void attach_kim(ConicProgram& p, const WIndexMap& m, std::span<const Triangle> triangles,
                std::span<const double> thetas, double r,
                KimOrientation orientation = KimOrientation::kCyclic);

inline constexpr int kDefaultDenseLimit = 30;

// Base constraints on all bus pairs plus one real-embedded PSD block of
// order 2n; principal-minor cones are omitted.
ProgramWithMap build_sdp(const NetworkCase& c, int dense_limit = kDefaultDenseLimit);

enum class RelaxationKind { kPmSoc, kKimPmSoc, kSdp };

struct RelaxationSpec {
  RelaxationKind kind = RelaxationKind::kPmSoc;
  std::vector<double> thetas{0.0, 1.5 * std::numbers::pi};
  double r = 1.0;
  KimOrientation orientation = KimOrientation::kCyclic;
};

std::string_view to_string(RelaxationKind k);

struct Relaxation {
  ConicProgram program;
  WIndexMap map;
  std::vector<Triangle> triangles;
};

Relaxation build_relaxation(const NetworkCase& c, const RelaxationSpec& spec);

}  // namespace w3cone
