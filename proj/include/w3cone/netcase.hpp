#pragma once

#include <array>
#include <complex>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace w3cone {

// PGLib release the bundled cases were taken from; echoed in reports.
inline constexpr std::string_view kPglibVersion = "v21.07";

// Angle-difference limits are clamped to +-89.9 degrees.
inline constexpr double kAngleLimitDeg = 89.9;

struct Bus {
  int id = 0;  // external label from the case file
  double vmin = 0.0;
  double vmax = 0.0;
  double gs = 0.0;  // p.u.
  double bs = 0.0;  // p.u.
  double pd = 0.0;  // p.u.
  double qd = 0.0;  // p.u.
};

struct Branch {
  int from_bus = 0;  // internal index
  int to_bus = 0;
  double r = 0.0;
  double x = 0.0;
  double b_charge = 0.0;
  double tap = 1.0;
  double shift = 0.0;   // radians
  double rate_a = 0.0;  // p.u., 0 means unlimited
  double angmin = 0.0;  // radians, clamped
  double angmax = 0.0;
  bool in_service = true;
};

// Cost coefficients are kept as in the file, i.e. against MW:
//   cost(P_MW) = cost_c2 * P^2 + cost_c1 * P + cost_c0   [$/h]
// Use per_unit_cost() for the coefficients against p.u. power.
struct Generator {
  int bus = 0;  // internal index
  double pmin = 0.0;
  double pmax = 0.0;
  double qmin = 0.0;
  double qmax = 0.0;
  double cost_c2 = 0.0;
  double cost_c1 = 0.0;
  double cost_c0 = 0.0;
  bool in_service = true;
};

struct CostCoefficients {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  double operator()(double p) const { return (c2 * p + c1) * p + c0; }
};

struct NetworkCase {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> gens;
  std::map<int, int> bus_index;  // external id -> internal index

  int num_buses() const { return static_cast<int>(buses.size()); }

  // Coefficients rescaled so the cost is evaluated against p.u. power.
  CostCoefficients per_unit_cost(const Generator& g) const;
};

struct Triangle {
  std::array<int, 3> buses{};       // i < j < k
  std::array<int, 3> branch_ids{};  // branches realising (i,j), (i,k), (j,k)
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class UnsupportedFeature : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidCase : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses the MATPOWER subset used by PGLib: numeric matrices for
// mpc.baseMVA, mpc.bus, mpc.gen, mpc.branch and (optional) mpc.gencost.
// The result is validated; see validate().
NetworkCase parse_matpower(std::string_view text, std::string name = {});

// Reads a file and parses it; the case name defaults to the file stem.
NetworkCase load_matpower(const std::filesystem::path& path);

// Throws InvalidCase when a model invariant does not hold.
void validate(const NetworkCase& c);

struct BranchAdmittance {
  std::complex<double> y_series;
  std::complex<double> shunt_from;
  std::complex<double> shunt_to;
  std::complex<double> tap;  // tap * exp(j * shift)
};

BranchAdmittance branch_admittance(const Branch& b);

// All bus triples whose three pairs are each joined by an in-service branch,
// sorted lexicographically.
std::vector<Triangle> enumerate_triangles(const NetworkCase& c);

// Deterministic, human-readable dump of every field of the model.
std::string canonical_report(const NetworkCase& c);

}  // namespace w3cone
