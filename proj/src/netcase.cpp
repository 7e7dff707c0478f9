#include "w3cone/netcase.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace w3cone {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct MatrixRow {
  std::vector<double> values;
  int line = 0;
};

struct RawMatrix {
  std::vector<MatrixRow> rows;
  int line = 0;  // line of the assignment
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view line) {
  const auto pos = line.find('%');
  return pos == std::string_view::npos ? line : line.substr(0, pos);
}

double parse_number(std::string_view token, int line) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(fmt::format("invalid number '{}'", token), line);
  }
  return value;
}

std::vector<double> parse_row(std::string_view row, int line) {
  std::vector<double> values;
  std::size_t i = 0;
  while (i < row.size()) {
    while (i < row.size() && (row[i] == ' ' || row[i] == '\t' || row[i] == ',' ||
                              row[i] == '\r')) {
      ++i;
    }
    if (i >= row.size()) break;
    std::size_t j = i;
    while (j < row.size() && row[j] != ' ' && row[j] != '\t' && row[j] != ',' &&
           row[j] != '\r') {
      ++j;
    }
    values.push_back(parse_number(row.substr(i, j - i), line));
    i = j;
  }
  return values;
}

// Splits the text into "mpc.<field>" assignments. Scalars land in `scalars`,
// numeric matrices in `matrices`; cell arrays and strings are skipped.
struct Sections {
  std::map<std::string, std::pair<double, int>> scalars;
  std::map<std::string, RawMatrix> matrices;
  std::string function_name;
};

Sections split_sections(std::string_view text) {
  Sections out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;

  std::optional<std::string> open_matrix;  // field currently being read
  char closing = ']';
  bool skipping = false;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (open_matrix || skipping) {
      const auto close = line.find(closing);
      std::string_view body = close == std::string_view::npos ? line : line.substr(0, close);
      if (!skipping) {
        auto& m = out.matrices[*open_matrix];
        std::size_t start = 0;
        while (start <= body.size()) {
          const auto semi = body.find(';', start);
          const auto seg = trim(body.substr(start, semi == std::string_view::npos
                                                       ? std::string_view::npos
                                                       : semi - start));
          if (!seg.empty()) m.rows.push_back({parse_row(seg, line_no), line_no});
          if (semi == std::string_view::npos) break;
          start = semi + 1;
        }
      }
      if (close != std::string_view::npos) {
        open_matrix.reset();
        skipping = false;
      }
      continue;
    }

    if (line.starts_with("function")) {
      const auto eq = line.find('=');
      if (eq != std::string_view::npos) out.function_name = std::string(trim(line.substr(eq + 1)));
      continue;
    }
    if (!line.starts_with("mpc.")) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(fmt::format("expected assignment in '{}'", line), line_no);
    }
    const std::string field(trim(line.substr(4, eq - 4)));
    std::string_view rhs = trim(line.substr(eq + 1));

    if (rhs.starts_with('[')) {
      rhs.remove_prefix(1);
      auto& m = out.matrices[field];
      m.line = line_no;
      m.rows.clear();
      const auto close = rhs.find(']');
      const std::string_view body = close == std::string_view::npos ? rhs : rhs.substr(0, close);
      std::size_t start = 0;
      while (start <= body.size()) {
        const auto semi = body.find(';', start);
        const auto seg = trim(body.substr(
            start, semi == std::string_view::npos ? std::string_view::npos : semi - start));
        if (!seg.empty()) m.rows.push_back({parse_row(seg, line_no), line_no});
        if (semi == std::string_view::npos) break;
        start = semi + 1;
      }
      if (close == std::string_view::npos) {
        open_matrix = field;
        closing = ']';
      }
    } else if (rhs.starts_with('{')) {
      if (rhs.find('}') == std::string_view::npos) {
        skipping = true;
        closing = '}';
      }
    } else if (rhs.starts_with('\'') || rhs.starts_with('"')) {
      continue;
    } else {
      if (rhs.ends_with(';')) rhs.remove_suffix(1);
      out.scalars[field] = {parse_number(trim(rhs), line_no), line_no};
    }
  }
  if (open_matrix) {
    throw ParseError(fmt::format("unterminated matrix mpc.{}", *open_matrix), line_no);
  }
  return out;
}

const RawMatrix& require_matrix(const Sections& s, const std::string& field,
                                std::size_t min_columns) {
  const auto it = s.matrices.find(field);
  if (it == s.matrices.end()) {
    throw ParseError(fmt::format("missing section mpc.{}", field), 0);
  }
  const RawMatrix& m = it->second;
  if (m.rows.empty()) return m;
  const std::size_t width = m.rows.front().values.size();
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    const auto& row = m.rows[r];
    if (row.values.size() < min_columns || row.values.size() != width) {
      throw ParseError(
          fmt::format("mpc.{} row {} has {} columns, expected {}", field, r + 1,
                      row.values.size(), std::max(width, min_columns)),
          row.line);
    }
  }
  return m;
}

int lookup_bus(const NetworkCase& c, double id, int line) {
  const auto it = c.bus_index.find(static_cast<int>(std::lround(id)));
  if (it == c.bus_index.end()) {
    throw ParseError(fmt::format("reference to unknown bus {}", id), line);
  }
  return it->second;
}

double clamp_angle_deg(double deg) {
  return std::clamp(deg, -kAngleLimitDeg, kAngleLimitDeg) * kDegToRad;
}

}  // namespace

CostCoefficients NetworkCase::per_unit_cost(const Generator& g) const {
  return {g.cost_c2 * base_mva * base_mva, g.cost_c1 * base_mva, g.cost_c0};
}

NetworkCase parse_matpower(std::string_view text, std::string name) {
  const Sections s = split_sections(text);

  NetworkCase c;
  c.name = !name.empty() ? std::move(name) : s.function_name;

  const auto base = s.scalars.find("baseMVA");
  if (base == s.scalars.end()) throw ParseError("missing section mpc.baseMVA", 0);
  c.base_mva = base->second.first;
  if (!(c.base_mva > 0.0)) throw ParseError("mpc.baseMVA must be positive", base->second.second);
  const double mva = c.base_mva;

  const RawMatrix& bus = require_matrix(s, "bus", 13);
  const RawMatrix& gen = require_matrix(s, "gen", 10);
  const RawMatrix& branch = require_matrix(s, "branch", 13);

  for (const auto& row : bus.rows) {
    const auto& v = row.values;
    Bus b;
    b.id = static_cast<int>(std::lround(v[0]));
    b.pd = v[2] / mva;
    b.qd = v[3] / mva;
    b.gs = v[4] / mva;
    b.bs = v[5] / mva;
    b.vmax = v[11];
    b.vmin = v[12];
    if (!c.bus_index.emplace(b.id, c.num_buses()).second) {
      throw ParseError(fmt::format("duplicate bus id {}", b.id), row.line);
    }
    c.buses.push_back(b);
  }

  for (const auto& row : gen.rows) {
    const auto& v = row.values;
    Generator g;
    g.bus = lookup_bus(c, v[0], row.line);
    g.qmax = v[3] / mva;
    g.qmin = v[4] / mva;
    g.in_service = v[7] > 0.0;
    g.pmax = v[8] / mva;
    g.pmin = v[9] / mva;
    c.gens.push_back(g);
  }

  for (const auto& row : branch.rows) {
    const auto& v = row.values;
    Branch b;
    b.from_bus = lookup_bus(c, v[0], row.line);
    b.to_bus = lookup_bus(c, v[1], row.line);
    b.r = v[2];
    b.x = v[3];
    b.b_charge = v[4];
    b.rate_a = v[5] / mva;
    b.tap = v[8] == 0.0 ? 1.0 : v[8];
    b.shift = v[9] * kDegToRad;
    b.in_service = v[10] > 0.0;
    b.angmin = clamp_angle_deg(v[11]);
    b.angmax = clamp_angle_deg(v[12]);
    c.branches.push_back(b);
  }

  if (const auto it = s.matrices.find("gencost"); it != s.matrices.end()) {
    const RawMatrix& cost = require_matrix(s, "gencost", 4);
    const std::size_t ng = c.gens.size();
    if (cost.rows.size() != ng && cost.rows.size() != 2 * ng) {
      throw ParseError(fmt::format("mpc.gencost has {} rows for {} generators",
                                   cost.rows.size(), ng),
                       cost.line);
    }
    // Rows past the first ng are reactive-power costs, which are not modelled.
    for (std::size_t k = 0; k < ng; ++k) {
      const auto& row = cost.rows[k];
      const auto& v = row.values;
      const int model = static_cast<int>(std::lround(v[0]));
      if (model == 1) {
        throw UnsupportedFeature(
            fmt::format("line {}: piecewise-linear cost model is not supported", row.line));
      }
      if (model != 2) throw ParseError(fmt::format("unknown cost model {}", model), row.line);
      const int n = static_cast<int>(std::lround(v[3]));
      if (n < 0 || n > 3) {
        throw UnsupportedFeature(
            fmt::format("line {}: polynomial cost of degree {} is not supported", row.line, n - 1));
      }
      if (v.size() < static_cast<std::size_t>(4 + n)) {
        throw ParseError(fmt::format("mpc.gencost row {} lists {} coefficients but has {} columns",
                                     k + 1, n, v.size()),
                         row.line);
      }
      std::array<double, 3> coef{};  // c2, c1, c0
      for (int i = 0; i < n; ++i) coef[3 - n + i] = v[4 + i];
      c.gens[k].cost_c2 = coef[0];
      c.gens[k].cost_c1 = coef[1];
      c.gens[k].cost_c0 = coef[2];
    }
  }

  validate(c);
  return c;
}

NetworkCase load_matpower(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open case file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_matpower(buffer.str(), path.stem().string());
}

void validate(const NetworkCase& c) {
  const int n = c.num_buses();
  if (n == 0) throw InvalidCase("case has no buses");
  for (const auto& b : c.buses) {
    if (!(b.vmin > 0.0) || !(b.vmin <= b.vmax)) {
      throw InvalidCase(fmt::format("bus {}: need 0 < vmin <= vmax", b.id));
    }
  }
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const auto& br = c.branches[k];
    if (br.from_bus < 0 || br.from_bus >= n || br.to_bus < 0 || br.to_bus >= n) {
      throw InvalidCase(fmt::format("branch {}: endpoint out of range", k));
    }
    if (br.from_bus == br.to_bus) throw InvalidCase(fmt::format("branch {}: self loop", k));
    if (!(br.r * br.r + br.x * br.x > 0.0)) {
      throw InvalidCase(fmt::format("branch {}: zero series impedance", k));
    }
    if (!(br.tap > 0.0)) throw InvalidCase(fmt::format("branch {}: tap must be positive", k));
    if (!(br.angmin <= br.angmax)) {
      throw InvalidCase(fmt::format("branch {}: angmin > angmax", k));
    }
  }
  bool any_gen = false;
  for (std::size_t k = 0; k < c.gens.size(); ++k) {
    const auto& g = c.gens[k];
    if (g.bus < 0 || g.bus >= n) throw InvalidCase(fmt::format("gen {}: bus out of range", k));
    if (!(g.pmin <= g.pmax) || !(g.qmin <= g.qmax)) {
      throw InvalidCase(fmt::format("gen {}: inconsistent output bounds", k));
    }
    if (g.cost_c2 < 0.0) throw InvalidCase(fmt::format("gen {}: negative quadratic cost", k));
    any_gen = any_gen || g.in_service;
  }
  if (!any_gen) throw InvalidCase("no generator in service");
}

BranchAdmittance branch_admittance(const Branch& b) {
  using cd = std::complex<double>;
  return {1.0 / cd(b.r, b.x), cd(0.0, b.b_charge / 2.0), cd(0.0, b.b_charge / 2.0),
          std::polar(b.tap, b.shift)};
}

std::vector<Triangle> enumerate_triangles(const NetworkCase& c) {
  const int n = c.num_buses();
  // First in-service branch realising each unordered pair.
  std::map<std::pair<int, int>, int> pair_branch;
  std::vector<std::set<int>> higher(n);
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const auto& br = c.branches[k];
    if (!br.in_service) continue;
    const int i = std::min(br.from_bus, br.to_bus);
    const int j = std::max(br.from_bus, br.to_bus);
    pair_branch.emplace(std::pair{i, j}, static_cast<int>(k));
    higher[i].insert(j);
  }

  std::vector<Triangle> out;
  for (int i = 0; i < n; ++i) {
    for (const int j : higher[i]) {
      for (const int k : higher[j]) {
        if (!higher[i].contains(k)) continue;
        out.push_back({{i, j, k},
                       {pair_branch.at({i, j}), pair_branch.at({i, k}), pair_branch.at({j, k})}});
      }
    }
  }
  return out;
}

std::string canonical_report(const NetworkCase& c) {
  std::string out;
  auto line = [&out](std::string s) {
    out += s;
    out += '\n';
  };
  line(fmt::format("case {} base_mva={:.17g}", c.name, c.base_mva));
  for (std::size_t k = 0; k < c.buses.size(); ++k) {
    const auto& b = c.buses[k];
    line(fmt::format("bus {} id={} vmin={:.17g} vmax={:.17g} gs={:.17g} bs={:.17g} "
                     "pd={:.17g} qd={:.17g}",
                     k, b.id, b.vmin, b.vmax, b.gs, b.bs, b.pd, b.qd));
  }
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const auto& b = c.branches[k];
    line(fmt::format("branch {} {}-{} r={:.17g} x={:.17g} b={:.17g} tap={:.17g} shift={:.17g} "
                     "rate_a={:.17g} angmin={:.17g} angmax={:.17g} status={}",
                     k, b.from_bus, b.to_bus, b.r, b.x, b.b_charge, b.tap, b.shift, b.rate_a,
                     b.angmin, b.angmax, b.in_service ? 1 : 0));
  }
  for (std::size_t k = 0; k < c.gens.size(); ++k) {
    const auto& g = c.gens[k];
    line(fmt::format("gen {} bus={} p=[{:.17g},{:.17g}] q=[{:.17g},{:.17g}] "
                     "cost=({:.17g},{:.17g},{:.17g}) status={}",
                     k, g.bus, g.pmin, g.pmax, g.qmin, g.qmax, g.cost_c2, g.cost_c1, g.cost_c0,
                     g.in_service ? 1 : 0));
  }
  return out;
}

}  // namespace w3cone
