#include "cones.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace w3cone::detail {
namespace {

constexpr double kInfStep = std::numeric_limits<double>::infinity();

double soc_det(const Eigen::Ref<const Vec>& x) {
  return x(0) * x(0) - x.tail(x.size() - 1).squaredNorm();
}

}  // namespace

int ConeLayout::dim() const {
  int n = orthant;
  for (const int d : soc) n += d;
  for (const int d : psd) n += svec_size(d);
  return n;
}

int ConeLayout::degree() const {
  int nu = orthant + static_cast<int>(soc.size());
  for (const int d : psd) nu += d;
  return nu;
}

Vec svec(const Mat& m) {
  const int d = static_cast<int>(m.rows());
  Vec v(svec_size(d));
  for (int j = 0; j < d; ++j) {
    for (int i = j; i < d; ++i) v(svec_index(d, i, j)) = i == j ? m(i, j) : std::numbers::sqrt2 * m(i, j);
  }
  return v;
}

Mat smat(const Eigen::Ref<const Vec>& v, int d) {
  Mat m(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = j; i < d; ++i) {
      const double x = v(svec_index(d, i, j));
      m(i, j) = i == j ? x : x / std::numbers::sqrt2;
      m(j, i) = m(i, j);
    }
  }
  return m;
}

Vec cone_identity(const ConeLayout& k) {
  Vec e = Vec::Zero(k.dim());
  int off = 0;
  e.head(k.orthant).setOnes();
  off += k.orthant;
  for (const int d : k.soc) {
    e(off) = 1.0;
    off += d;
  }
  for (const int d : k.psd) {
    for (int i = 0; i < d; ++i) e(off + svec_index(d, i, i)) = 1.0;
    off += svec_size(d);
  }
  return e;
}

double boundary_shift(const ConeLayout& k, const Vec& v) {
  double t = -std::numeric_limits<double>::infinity();
  int off = 0;
  if (k.orthant > 0) t = std::max(t, -v.head(k.orthant).minCoeff());
  off += k.orthant;
  for (const int d : k.soc) {
    t = std::max(t, v.segment(off + 1, d - 1).norm() - v(off));
    off += d;
  }
  for (const int d : k.psd) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(smat(v.segment(off, svec_size(d)), d),
                                           Eigen::EigenvaluesOnly);
    t = std::max(t, -eig.eigenvalues()(0));
    off += svec_size(d);
  }
  return t;
}

Vec jordan_product(const ConeLayout& k, const Vec& a, const Vec& b) {
  Vec out(a.size());
  int off = 0;
  out.head(k.orthant) = a.head(k.orthant).cwiseProduct(b.head(k.orthant));
  off += k.orthant;
  for (const int d : k.soc) {
    const auto as = a.segment(off, d);
    const auto bs = b.segment(off, d);
    out(off) = as.dot(bs);
    out.segment(off + 1, d - 1) = as(0) * bs.tail(d - 1) + bs(0) * as.tail(d - 1);
    off += d;
  }
  for (const int d : k.psd) {
    const int n = svec_size(d);
    const Mat am = smat(a.segment(off, n), d);
    const Mat bm = smat(b.segment(off, n), d);
    out.segment(off, n) = svec(0.5 * (am * bm + bm * am));
    off += n;
  }
  return out;
}

Vec jordan_divide(const ConeLayout& k, const Vec& lambda, const Vec& v) {
  Vec u(v.size());
  int off = 0;
  u.head(k.orthant) = v.head(k.orthant).cwiseQuotient(lambda.head(k.orthant));
  off += k.orthant;
  for (const int d : k.soc) {
    const auto l = lambda.segment(off, d);
    const auto w = v.segment(off, d);
    const double det = soc_det(l);
    const double u0 = (l(0) * w(0) - l.tail(d - 1).dot(w.tail(d - 1))) / det;
    u(off) = u0;
    u.segment(off + 1, d - 1) = (w.tail(d - 1) - u0 * l.tail(d - 1)) / l(0);
    off += d;
  }
  for (const int d : k.psd) {
    const int n = svec_size(d);
    for (int j = 0; j < d; ++j) {
      const double lj = lambda(off + svec_index(d, j, j));
      for (int i = j; i < d; ++i) {
        const double li = lambda(off + svec_index(d, i, i));
        const int idx = off + svec_index(d, i, j);
        u(idx) = 2.0 * v(idx) / (li + lj);
      }
    }
    off += n;
  }
  return u;
}

double max_step(const ConeLayout& k, const Vec& lambda, const Vec& d) {
  double alpha = kInfStep;
  int off = 0;
  for (int i = 0; i < k.orthant; ++i) {
    if (d(i) < 0.0) alpha = std::min(alpha, -lambda(i) / d(i));
  }
  off += k.orthant;
  for (const int m : k.soc) {
    const auto l = lambda.segment(off, m);
    const auto dk = d.segment(off, m);
    const double lnorm2 = soc_det(l);
    if (lnorm2 > 0.0) {
      const double lnorm = std::sqrt(lnorm2);
      const Vec lbar = l / lnorm;
      const double lbar_dk = lbar(0) * dk(0) - lbar.tail(m - 1).dot(dk.tail(m - 1));
      const double factor = (lbar_dk + dk(0)) / (lbar(0) + 1.0);
      const double rho0 = lbar_dk / lnorm;
      const double rho1 = ((dk.tail(m - 1) - factor * lbar.tail(m - 1)) / lnorm).norm();
      const double sigma = rho1 - rho0;
      if (sigma > 0.0) alpha = std::min(alpha, 1.0 / sigma);
    } else {
      alpha = 0.0;
    }
    off += m;
  }
  for (const int m : k.psd) {
    const int n = svec_size(m);
    Mat dm = smat(d.segment(off, n), m);
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < m; ++i) {
        dm(i, j) /= std::sqrt(lambda(off + svec_index(m, i, i)) * lambda(off + svec_index(m, j, j)));
      }
    }
    Eigen::SelfAdjointEigenSolver<Mat> eig(dm, Eigen::EigenvaluesOnly);
    const double lmin = eig.eigenvalues()(0);
    if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
    off += n;
  }
  return alpha;
}

bool NtScaling::compute(const ConeLayout& k, const Vec& s, const Vec& z) {
  layout_ = k;
  lambda_.resize(k.dim());
  int off = 0;

  const auto so = s.head(k.orthant);
  const auto zo = z.head(k.orthant);
  if (k.orthant > 0 && (so.minCoeff() <= 0.0 || zo.minCoeff() <= 0.0)) return false;
  orthant_w_ = so.cwiseQuotient(zo).cwiseSqrt();
  lambda_.head(k.orthant) = so.cwiseProduct(zo).cwiseSqrt();
  off += k.orthant;

  soc_.clear();
  for (const int d : k.soc) {
    const auto sk = s.segment(off, d);
    const auto zk = z.segment(off, d);
    const double sres = soc_det(sk);
    const double zres = soc_det(zk);
    if (!(sk(0) > 0.0) || !(zk(0) > 0.0) || !(sres > 0.0) || !(zres > 0.0)) return false;
    const double snorm = std::sqrt(sres);
    const double znorm = std::sqrt(zres);
    const Vec sbar = sk / snorm;
    const Vec zbar = zk / znorm;
    const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
    Vec wbar(d);
    wbar(0) = (sbar(0) + zbar(0)) / (2.0 * gamma);
    wbar.tail(d - 1) = (sbar.tail(d - 1) - zbar.tail(d - 1)) / (2.0 * gamma);
    soc_.push_back({std::sqrt(snorm / znorm), std::move(wbar)});
    off += d;
  }

  psd_.clear();
  for (const int d : k.psd) {
    const int n = svec_size(d);
    const Eigen::LLT<Mat> ls(smat(s.segment(off, n), d));
    const Eigen::LLT<Mat> lz(smat(z.segment(off, n), d));
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
    const Mat lsm = ls.matrixL();
    const Mat lzm = lz.matrixL();
    Eigen::JacobiSVD<Mat> svd(lzm.transpose() * lsm, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    if (!(sv.minCoeff() > 0.0)) return false;
    const Mat v = svd.matrixV();
    const Mat r = lsm * v * sv.cwiseSqrt().cwiseInverse().asDiagonal();
    const Mat ls_inv = lsm.triangularView<Eigen::Lower>().solve(Mat::Identity(d, d));
    const Mat rinv = sv.cwiseSqrt().asDiagonal() * v.transpose() * ls_inv;
    psd_.push_back({r, rinv});
    off += n;
  }

  // lambda = W z; the PSD part is exactly diag(singular values) but is
  // recomputed through the map so the identity holds to rounding.
  Vec lz = z;
  apply(Op::kW, lz);
  lambda_.tail(k.dim() - k.orthant) = lz.tail(k.dim() - k.orthant);
  off = k.orthant;
  for (const int d : k.soc) off += d;
  for (const int d : k.psd) {
    const int n = svec_size(d);
    Mat lm = smat(lambda_.segment(off, n), d);
    lambda_.segment(off, n) = svec(Mat(lm.diagonal().asDiagonal()));
    off += n;
  }
  return lambda_.allFinite();
}

void NtScaling::apply(Op op, Eigen::Ref<Vec> v) const {
  const ConeLayout& k = layout_;
  int off = 0;
  auto vo = v.head(k.orthant);
  if (op == Op::kW || op == Op::kWt) {
    vo = vo.cwiseProduct(orthant_w_);
  } else {
    vo = vo.cwiseQuotient(orthant_w_);
  }
  off += k.orthant;

  for (std::size_t c = 0; c < k.soc.size(); ++c) {
    const int d = k.soc[c];
    const Soc& sc = soc_[c];
    auto vk = v.segment(off, d);
    const double w0 = sc.wbar(0);
    const auto w1 = sc.wbar.tail(d - 1);
    const double v0 = vk(0);
    const double dot = w1.dot(vk.tail(d - 1));
    if (op == Op::kW || op == Op::kWt) {
      vk(0) = sc.eta * (w0 * v0 + dot);
      vk.tail(d - 1) = sc.eta * (vk.tail(d - 1) + (v0 + dot / (1.0 + w0)) * w1);
    } else {
      vk(0) = (w0 * v0 - dot) / sc.eta;
      vk.tail(d - 1) = (vk.tail(d - 1) + (-v0 + dot / (1.0 + w0)) * w1) / sc.eta;
    }
    off += d;
  }

  for (std::size_t c = 0; c < k.psd.size(); ++c) {
    const int d = k.psd[c];
    const int n = svec_size(d);
    auto vk = v.segment(off, n);
    if (vk.isZero(0.0)) {
      off += n;
      continue;
    }
    const Mat x = smat(vk, d);
    const Psd& p = psd_[c];
    Mat y;
    switch (op) {
      case Op::kW: y = p.r.transpose() * x * p.r; break;
      case Op::kWt: y = p.r * x * p.r.transpose(); break;
      case Op::kWinv: y = p.rinv.transpose() * x * p.rinv; break;
      case Op::kWinvt: y = p.rinv * x * p.rinv.transpose(); break;
    }
    vk = svec(y);
    off += n;
  }
}

Vec NtScaling::apply_w(const Vec& v) const {
  Vec out = v;
  apply(Op::kW, out);
  return out;
}

Vec NtScaling::apply_wt(const Vec& v) const {
  Vec out = v;
  apply(Op::kWt, out);
  return out;
}

Vec NtScaling::apply_winv(const Vec& v) const {
  Vec out = v;
  apply(Op::kWinv, out);
  return out;
}

Vec NtScaling::apply_winvt(const Vec& v) const {
  Vec out = v;
  apply(Op::kWinvt, out);
  return out;
}

void NtScaling::apply_winvt_columns(Mat& g) const {
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    auto col = g.col(j);
    apply(Op::kWinvt, col);
  }
}

}  // namespace w3cone::detail
