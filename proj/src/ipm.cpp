#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <algorithm>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>

#include "cones.hpp"
#include "ipm_internal.hpp"
#include "w3cone/solver.hpp"

namespace w3cone {

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
    case SolveStatus::kIterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace detail {

// Rows are appended in cone order: orthant rows first, then each SOC, then
// each PSD block, so the layout can be filled in as blocks are lowered.
StandardForm lower_program(const ConicProgram& p) {
  const int n = p.num_vars();
  StandardForm f;
  f.c = Vec::Zero(n);
  for (const auto& t : p.objective().terms()) f.c(t.var) += t.coef;
  f.objective_offset = p.objective().constant();

  std::vector<std::pair<AffineExpr, double>> eq;  // a.x = rhs
  std::vector<AffineExpr> cone_rows;              // each row: expr(x) in cone coordinate

  for (int i = 0; i < n; ++i) {
    const auto& b = p.bounds()[i];
    if (b.lower == b.upper) {
      eq.emplace_back(AffineExpr::variable(i), b.lower);
      continue;
    }
    if (std::isfinite(b.lower)) cone_rows.push_back(AffineExpr::variable(i) - AffineExpr(b.lower));
    if (std::isfinite(b.upper)) cone_rows.push_back(AffineExpr(b.upper) - AffineExpr::variable(i));
  }
  for (const auto& row : p.linear_rows()) {
    if (row.is_equality()) {
      AffineExpr a = row.expr;
      const double rhs = row.upper - a.constant();
      eq.emplace_back(a - AffineExpr(a.constant()), rhs);
      continue;
    }
    if (std::isfinite(row.lower)) cone_rows.push_back(row.expr - AffineExpr(row.lower));
    if (std::isfinite(row.upper)) cone_rows.push_back(AffineExpr(row.upper) - row.expr);
  }
  f.cones.orthant = static_cast<int>(cone_rows.size());

  for (const auto& b : p.soc_blocks()) {
    f.cones.soc.push_back(static_cast<int>(b.exprs.size()));
    for (const auto& e : b.exprs) cone_rows.push_back(e);
  }
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (const auto& b : p.rsoc_blocks()) {
    f.cones.soc.push_back(static_cast<int>(b.exprs.size()));
    cone_rows.push_back((b.exprs[0] + b.exprs[1]) * inv_sqrt2);
    cone_rows.push_back((b.exprs[0] - b.exprs[1]) * inv_sqrt2);
    for (std::size_t k = 2; k < b.exprs.size(); ++k) cone_rows.push_back(b.exprs[k]);
  }
  for (const auto& b : p.psd_blocks()) {
    f.cones.psd.push_back(b.dim);
    const int d = b.dim;
    std::vector<AffineExpr> packed(svec_size(d));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double scale = i == j ? 1.0 : std::numbers::sqrt2;
        packed[svec_index(d, i, j)] = b.entries[PsdBlock::packed_index(i, j)] * scale;
      }
    }
    for (auto& e : packed) cone_rows.push_back(std::move(e));
  }

  const int m = static_cast<int>(cone_rows.size());
  f.G = Mat::Zero(m, n);
  f.h = Vec::Zero(m);
  // s = expr(x) = a.x + k  =>  G = -a, h = k
  for (int r = 0; r < m; ++r) {
    for (const auto& t : cone_rows[r].terms()) f.G(r, t.var) -= t.coef;
    f.h(r) = cone_rows[r].constant();
  }
  const int meq = static_cast<int>(eq.size());
  f.A = Mat::Zero(meq, n);
  f.b = Vec::Zero(meq);
  for (int r = 0; r < meq; ++r) {
    for (const auto& t : eq[r].first.terms()) f.A(r, t.var) += t.coef;
    f.b(r) = eq[r].second;
  }
  return f;
}

namespace {

// Factorisation of the reduced KKT matrix [[G^T W^-1 W^-T G, A^T], [A, 0]],
// regularised for the factorisation and corrected by iterative refinement.
class KktSystem {
 public:
  KktSystem(const StandardForm& f, const NtScaling& w) : f_(f), w_(w) {
    n_ = static_cast<int>(f.c.size());
    p_ = static_cast<int>(f.b.size());
    ghat_ = f.G;
    w.apply_winvt_columns(ghat_);
    h_ = ghat_.transpose() * ghat_;
    Mat k(n_ + p_, n_ + p_);
    k.topLeftCorner(n_, n_) = h_;
    k.topLeftCorner(n_, n_).diagonal().array() += kRegularisation;
    k.topRightCorner(n_, p_) = f.A.transpose();
    k.bottomLeftCorner(p_, n_) = f.A;
    k.bottomRightCorner(p_, p_) = -kRegularisation * Mat::Identity(p_, p_);
    lu_.compute(k);
  }

  // Solves [0 A^T G^T; A 0 0; G 0 -W^T W] (dx, dy, dz) = (r1, r2, r3), refining
  // against the unreduced system.
  void solve(const Vec& r1, const Vec& r2, const Vec& r3, Vec& dx, Vec& dy, Vec& dz) const {
    solve_reduced(r1, r2, r3, dx, dy, dz);
    for (int it = 0; it < kRefinementSteps; ++it) {
      const Vec e1 = r1 - f_.A.transpose() * dy - f_.G.transpose() * dz;
      const Vec e2 = r2 - f_.A * dx;
      const Vec e3 = r3 - f_.G * dx + w_.apply_wt(w_.apply_w(dz));
      Vec cx, cy, cz;
      solve_reduced(e1, e2, e3, cx, cy, cz);
      dx += cx;
      dy += cy;
      dz += cz;
    }
  }

 private:
  void solve_reduced(const Vec& r1, const Vec& r2, const Vec& r3, Vec& dx, Vec& dy, Vec& dz) const {
    const Vec t = w_.apply_winvt(r3);
    Vec rhs(n_ + p_);
    rhs.head(n_) = r1 + ghat_.transpose() * t;
    rhs.tail(p_) = r2;
    const Vec sol = lu_.solve(rhs);
    dx = sol.head(n_);
    dy = sol.tail(p_);
    dz = w_.apply_winv(ghat_ * dx - t);
  }

 static constexpr double kRegularisation = 1e-10;
  static constexpr int kRefinementSteps = 3;

  const StandardForm& f_;
  const NtScaling& w_;
  int n_ = 0;
  int p_ = 0;
  Mat ghat_;
  Mat h_;
  Eigen::PartialPivLU<Mat> lu_;
};

// Starting point for a problem with W = I, shifted into the cone interior.
void initial_point(const StandardForm& f, Vec& x, Vec& y, Vec& s, Vec& z) {
  const ConeLayout& k = f.cones;
  NtScaling identity;
  const Vec e = cone_identity(k);
  identity.compute(k, e, e);
  KktSystem kkt(f, identity);
  Vec dz;
  kkt.solve(Vec::Zero(f.c.size()), f.b, f.h, x, y, dz);
  s = -dz;
  Vec xd;
  kkt.solve(-f.c, Vec::Zero(f.b.size()), Vec::Zero(f.h.size()), xd, y, z);

  const double as = boundary_shift(k, s);
  if (as >= 0.0) s += (1.0 + as) * e;
  const double az = boundary_shift(k, z);
  if (az >= 0.0) z += (1.0 + az) * e;
}

double safe_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.norm(); }

}  // namespace

Equilibration equilibrate(StandardForm& f, int passes) {
  const int n = static_cast<int>(f.c.size());
  const int p = static_cast<int>(f.b.size());
  const int m = static_cast<int>(f.h.size());
  Equilibration e{Vec::Ones(n), Vec::Ones(p), Vec::Ones(m), 1.0};
  const ConeLayout& k = f.cones;
  for (int pass = 0; pass < passes; ++pass) {
    Vec col = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (p > 0) col(j) = f.A.col(j).cwiseAbs().maxCoeff();
      if (m > 0) col(j) = std::max(col(j), f.G.col(j).cwiseAbs().maxCoeff());
    }
    Vec arow = Vec::Ones(p);
    for (int i = 0; i < p; ++i) arow(i) = f.A.row(i).cwiseAbs().maxCoeff();
    Vec grow = Vec::Ones(m);
    for (int i = 0; i < m; ++i) grow(i) = f.G.row(i).cwiseAbs().maxCoeff();
    // one factor per non-orthant cone so the cone is mapped onto itself
    int off = k.orthant;
    auto uniform = [&](int len) {
      const double v = grow.segment(off, len).maxCoeff();
      grow.segment(off, len).setConstant(v);
      off += len;
    };
    for (const int d : k.soc) uniform(d);
    for (const int d : k.psd) uniform(svec_size(d));

    auto inv_sqrt = [](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 1.0; };
    const Vec dc = col.unaryExpr(inv_sqrt);
    const Vec da = arow.unaryExpr(inv_sqrt);
    const Vec dg = grow.unaryExpr(inv_sqrt);
    f.A = da.asDiagonal() * f.A * dc.asDiagonal();
    f.G = dg.asDiagonal() * f.G * dc.asDiagonal();
    f.b = f.b.cwiseProduct(da);
    f.h = f.h.cwiseProduct(dg);
    f.c = f.c.cwiseProduct(dc);
    e.col = e.col.cwiseProduct(dc);
    e.eq_row = e.eq_row.cwiseProduct(da);
    e.cone_row = e.cone_row.cwiseProduct(dg);
  }
  const double cmax = f.c.size() > 0 ? f.c.cwiseAbs().maxCoeff() : 0.0;
  if (cmax > 0.0) {
    e.objective = 1.0 / cmax;
    f.c *= e.objective;
  }
  return e;
}

SolveOutcome run_ipm(const StandardForm& f, const SolverConfig& cfg) {
  const ConeLayout& k = f.cones;
  const double nu = k.degree();

  SolveOutcome out;
  Vec x, y, s, z;
  initial_point(f, x, y, s, z);
  double tau = 1.0;
  double kappa = 1.0;

  const double bnorm = std::max(1.0, safe_norm(f.b));
  const double hnorm = std::max(1.0, safe_norm(f.h));
  const double cnorm = std::max(1.0, safe_norm(f.c));
  const Vec e = cone_identity(k);
  constexpr double kStepFraction = 0.99;

  // Last iterate meeting the reduced-accuracy tolerances, returned if the
  // method stalls before reaching full accuracy.
  constexpr double kReducedTol = 1e-6;
  std::optional<Vec> reduced_x;

  auto finish = [&](SolveStatus status) {
    if ((status == SolveStatus::kNumericalFailure || status == SolveStatus::kIterationLimit) && reduced_x) {
      out.status = SolveStatus::kOptimal;
      out.x = *reduced_x;
      return out;
    }
    out.status = status;
    out.x = status == SolveStatus::kUnbounded ? x : Vec(x / tau);  // improving ray when unbounded
    return out;
  };

  for (int iter = 0;; ++iter) {
    out.iterations = iter;

    const Vec rx = f.A.transpose() * y + f.G.transpose() * z + f.c * tau;
    const Vec ry = f.A * x - f.b * tau;
    const Vec rz = f.G * x + s - f.h * tau;
    const double ctx = f.c.dot(x);
    const double bty = f.b.dot(y);
    const double htz = f.h.dot(z);
    const double rt = kappa + ctx + bty + htz;

    const double pcost = ctx / tau;
    const double dcost = -(bty + htz) / tau;
    const double gap = s.dot(z) / (tau * tau);
    const double pres = std::max(safe_norm(ry) / bnorm, safe_norm(rz) / hnorm) / tau;
    const double dres = safe_norm(rx) / cnorm / tau;
    double relgap = std::numeric_limits<double>::infinity();
    if (pcost < 0.0) {
      relgap = gap / -pcost;
    } else if (dcost > 0.0) {
      relgap = gap / dcost;
    }
    if (cfg.verbose) {
      std::fprintf(stderr, "%3d pcost=%+.8e dcost=%+.8e gap=%.2e pres=%.2e dres=%.2e tau=%.2e kap=%.2e\n",
                   iter, pcost, dcost, gap, pres, dres, tau, kappa);
    }
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.gap = gap;

    if (pres < cfg.feasibility_tol && dres < cfg.feasibility_tol &&
        (gap < cfg.gap_abs_tol || relgap < cfg.gap_rel_tol)) {
      return finish(SolveStatus::kOptimal);
    }
    if (pres < kReducedTol && dres < kReducedTol && (gap < kReducedTol || relgap < kReducedTol)) {
      reduced_x = x / tau;
    }
    if (bty + htz < 0.0) {
      const double pinf = safe_norm(Vec(f.A.transpose() * y + f.G.transpose() * z)) / cnorm;
      if (pinf < cfg.feasibility_tol * -(bty + htz) / std::max(1.0, safe_norm(z) + safe_norm(y)) &&
          kappa > tau) {
        return finish(SolveStatus::kInfeasible);
      }
    }
    if (ctx < 0.0) {
      const double dinf = std::max(safe_norm(Vec(f.A * x)) / bnorm, safe_norm(Vec(f.G * x + s)) / hnorm);
      if (dinf < cfg.feasibility_tol * -ctx / std::max(1.0, safe_norm(x)) && kappa > tau) {
        return finish(SolveStatus::kUnbounded);
      }
    }
    if (iter >= cfg.max_iterations) return finish(SolveStatus::kIterationLimit);

    NtScaling w;
    if (!w.compute(k, s, z)) return finish(SolveStatus::kNumericalFailure);
    const Vec& lambda = w.lambda();
    const KktSystem kkt(f, w);

    Vec x1, y1, z1;
    kkt.solve(-f.c, f.b, f.h, x1, y1, z1);
    const double denom_base = f.c.dot(x1) + f.b.dot(y1) + f.h.dot(z1);

    const double mu = (s.dot(z) + tau * kappa) / (nu + 1.0);
    const Vec lambda_sq = jordan_product(k, lambda, lambda);

    // Direction for target complementarity `comp` and tau*kappa target `tk`,
    // with linear residuals reduced by the factor `keep`.
    struct Direction {
      Vec dx, dy, dz, ds_scaled, dz_scaled, ds;
      double dtau = 0.0, dkappa = 0.0;
    };
    auto direction = [&](const Vec& comp, double tk, double keep) {
      Direction d;
      const Vec dsv = jordan_divide(k, lambda, comp);
      Vec x0, y0, z0;
      kkt.solve(-keep * rx, -keep * ry, -keep * rz - w.apply_wt(dsv), x0, y0, z0);
      const double denom = -kappa / tau + denom_base;
      d.dtau = (-keep * rt - tk / tau - (f.c.dot(x0) + f.b.dot(y0) + f.h.dot(z0))) / denom;
      d.dx = x0 + d.dtau * x1;
      d.dy = y0 + d.dtau * y1;
      d.dz = z0 + d.dtau * z1;
      d.dz_scaled = w.apply_w(d.dz);
      // ds from the linearised primal equation keeps G x + s - h tau exact
      // along the step; the complementarity part only sets its direction.
      d.ds = -keep * rz - f.G * d.dx + f.h * d.dtau;
      d.ds_scaled = w.apply_winvt(d.ds);
      d.dkappa = (tk - kappa * d.dtau) / tau;
      return d;
    };
    auto step_length = [&](const Direction& d) {
      double a = std::min(max_step(k, lambda, d.ds_scaled), max_step(k, lambda, d.dz_scaled));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    const Direction aff = direction(-lambda_sq, -tau * kappa, 1.0);
    const double alpha_aff = std::min(1.0, step_length(aff));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

    const Vec comp = -lambda_sq - jordan_product(k, aff.ds_scaled, aff.dz_scaled) + sigma * mu * e;
    const double tk = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
    const Direction d = direction(comp, tk, 1.0 - sigma);
    const double alpha = std::min(1.0, kStepFraction * step_length(d));

    if (!(alpha > 1e-12) || !d.dx.allFinite()) return finish(SolveStatus::kNumericalFailure);

    x += alpha * d.dx;
    y += alpha * d.dy;
    z += alpha * d.dz;
    s += alpha * d.ds;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;
  }
}

}  // namespace detail

namespace {
constexpr int kEquilibrationPasses = 15;
}  // namespace

Solution InteriorPointSolver::solve(const ConicProgram& program, const SolverConfig& config) const {
  if (!enable_psd_ && !program.psd_blocks().empty()) {
    throw CapabilityError(fmt::format("backend '{}' does not support PSD blocks", name()));
  }
  const auto start = std::chrono::steady_clock::now();
  detail::StandardForm form = detail::lower_program(program);
  const detail::Equilibration scaling = detail::equilibrate(form, kEquilibrationPasses);
  detail::SolveOutcome r = detail::run_ipm(form, config);
  r.x = r.x.cwiseProduct(scaling.col);

  Solution sol;
  sol.status = r.status;
  sol.iterations = r.iterations;
  sol.x.assign(r.x.data(), r.x.data() + r.x.size());
  sol.objective = program.objective().evaluate(sol.x);
  sol.solve_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

std::unique_ptr<ConicSolver> make_solver(std::string_view name) {
  if (name == "ipm") return std::make_unique<InteriorPointSolver>(true);
  if (name == "ipm-socp") return std::make_unique<InteriorPointSolver>(false);
  throw std::invalid_argument(fmt::format("unknown solver backend '{}'", name));
}

Solution solve(const ConicProgram& program, const SolverConfig& config) {
  return InteriorPointSolver().solve(program, config);
}

}  // namespace w3cone
