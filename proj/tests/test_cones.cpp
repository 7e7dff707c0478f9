#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "cones.hpp"
#include "test_support.hpp"

namespace w3cone::detail {
namespace {

using w3cone::testing::make_rng;

ConeLayout mixed_layout() {
  ConeLayout k;
  k.orthant = 3;
  k.soc = {3, 5, 2};
  k.psd = {1, 3, 4};
  return k;
}

// A random interior point built block by block.
Vec random_interior(const ConeLayout& k, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> pos(0.1, 3.0);
  Vec v(k.dim());
  int off = 0;
  for (int i = 0; i < k.orthant; ++i) v(off++) = pos(rng);
  for (const int d : k.soc) {
    Vec u(d - 1);
    for (int i = 0; i < d - 1; ++i) u(i) = n(rng);
    v(off) = u.norm() + pos(rng);
    v.segment(off + 1, d - 1) = u;
    off += d;
  }
  for (const int d : k.psd) {
    Mat b(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) b(i, j) = n(rng);
    }
    const Mat m = b * b.transpose() + 0.1 * Mat::Identity(d, d);
    v.segment(off, svec_size(d)) = svec(m);
    off += svec_size(d);
  }
  return v;
}

// Oracle: v is inside the cone (up to tol), checked block by block.
bool inside(const ConeLayout& k, const Vec& v, double tol) {
  int off = 0;
  for (int i = 0; i < k.orthant; ++i) {
    if (v(off++) < -tol) return false;
  }
  for (const int d : k.soc) {
    if (v(off) - v.segment(off + 1, d - 1).norm() < -tol) return false;
    off += d;
  }
  for (const int d : k.psd) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(smat(v.segment(off, svec_size(d)), d));
    if (eig.eigenvalues()(0) < -tol) return false;
    off += svec_size(d);
  }
  return true;
}

TEST(Svec, RoundTripAndInnerProduct) {
  auto rng = make_rng(10);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int d = 1; d <= 5; ++d) {
    Mat a(d, d), b(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        a(i, j) = n(rng);
        b(i, j) = n(rng);
      }
    }
    a = (a + a.transpose()).eval();
    b = (b + b.transpose()).eval();
    EXPECT_LT((smat(svec(a), d) - a).norm(), 1e-13);
    EXPECT_NEAR(svec(a).dot(svec(b)), (a * b).trace(), 1e-12);
  }
  EXPECT_EQ(svec_index(3, 0, 0), 0);
  EXPECT_EQ(svec_index(3, 2, 0), 2);
  EXPECT_EQ(svec_index(3, 1, 1), 3);
  EXPECT_EQ(svec_index(3, 2, 2), 5);
}

TEST(Cones, IdentityAndDegree) {
  const ConeLayout k = mixed_layout();
  EXPECT_EQ(k.dim(), 3 + 10 + 1 + 6 + 10);
  EXPECT_EQ(k.degree(), 3 + 3 + 8);
  const Vec e = cone_identity(k);
  const Vec ee = jordan_product(k, e, e);
  EXPECT_LT((ee - e).norm(), 1e-14);
  EXPECT_NEAR(e.squaredNorm(), k.degree(), 1e-12);
}

TEST(Cones, BoundaryShift) {
  ConeLayout k;
  k.orthant = 2;
  k.soc = {3};
  Vec v(5);
  v << 1.0, -2.0, 1.0, 3.0, 4.0;  // the SOC block needs the larger shift, 5 - 1
  const double a = boundary_shift(k, v);
  EXPECT_NEAR(a, 4.0, 1e-12);
  EXPECT_TRUE(inside(k, Vec(v + a * cone_identity(k)), 1e-12));
}

TEST(NtScaling, DefiningIdentities) {
  const ConeLayout k = mixed_layout();
  auto rng = make_rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec s = random_interior(k, rng);
    const Vec z = random_interior(k, rng);
    NtScaling w;
    ASSERT_TRUE(w.compute(k, s, z));
    const Vec& lambda = w.lambda();
    const double scale = 1.0 + lambda.norm();
    EXPECT_LT((w.apply_w(z) - lambda).norm(), 1e-10 * scale);
    EXPECT_LT((w.apply_winvt(s) - lambda).norm(), 1e-10 * scale);
    // lambda^T lambda = s^T z
    EXPECT_NEAR(lambda.squaredNorm(), s.dot(z), 1e-10 * (1.0 + s.dot(z)));

    std::normal_distribution<double> n(0.0, 1.0);
    Vec v(k.dim()), u(k.dim());
    for (int i = 0; i < k.dim(); ++i) {
      v(i) = n(rng);
      u(i) = n(rng);
    }
    EXPECT_LT((w.apply_winv(w.apply_w(v)) - v).norm(), 1e-9 * v.norm());
    EXPECT_LT((w.apply_winvt(w.apply_wt(v)) - v).norm(), 1e-9 * v.norm());
    // transpose consistency: <W v, u> = <v, W^T u>
    EXPECT_NEAR(w.apply_w(v).dot(u), v.dot(w.apply_wt(u)), 1e-9 * (1.0 + v.norm() * u.norm()));
    EXPECT_NEAR(w.apply_winv(v).dot(u), v.dot(w.apply_winvt(u)), 1e-9 * (1.0 + v.norm() * u.norm()));

    Mat g(k.dim(), 3);
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < k.dim(); ++i) g(i, j) = n(rng);
    }
    Mat gc = g;
    w.apply_winvt_columns(gc);
    for (int j = 0; j < 3; ++j) EXPECT_LT((gc.col(j) - w.apply_winvt(g.col(j))).norm(), 1e-12 * (1.0 + gc.norm()));
  }
}

TEST(NtScaling, RejectsBoundaryPoints) {
  ConeLayout k;
  k.soc = {3};
  Vec s(3), z(3);
  s << 1.0, 1.0, 0.0;  // on the boundary
  z << 2.0, 0.5, 0.5;
  NtScaling w;
  EXPECT_FALSE(w.compute(k, s, z));
}

TEST(Jordan, DivideInvertsProduct) {
  const ConeLayout k = mixed_layout();
  auto rng = make_rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec s = random_interior(k, rng);
    const Vec z = random_interior(k, rng);
    NtScaling w;
    ASSERT_TRUE(w.compute(k, s, z));
    const Vec& lambda = w.lambda();
    std::normal_distribution<double> n(0.0, 1.0);
    Vec u(k.dim());
    for (int i = 0; i < k.dim(); ++i) u(i) = n(rng);
    // jordan_divide requires diagonal PSD blocks, which the NT lambda has
    const Vec v = jordan_product(k, lambda, u);
    EXPECT_LT((jordan_divide(k, lambda, v) - u).norm(), 1e-8 * (1.0 + u.norm()));
  }
}

TEST(MaxStep, MatchesBisection) {
  const ConeLayout k = mixed_layout();
  auto rng = make_rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    NtScaling w;
    ASSERT_TRUE(w.compute(k, random_interior(k, rng), random_interior(k, rng)));
    const Vec& lambda = w.lambda();
    std::normal_distribution<double> n(0.0, 1.0);
    Vec d(k.dim());
    for (int i = 0; i < k.dim(); ++i) d(i) = n(rng);
    const double a = max_step(k, lambda, d);
    ASSERT_GT(a, 0.0);
    ASSERT_TRUE(std::isfinite(a));
    EXPECT_TRUE(inside(k, Vec(lambda + 0.999 * a * d), 1e-12));
    EXPECT_FALSE(inside(k, Vec(lambda + 1.001 * a * d), 0.0));
  }
}

TEST(MaxStep, UnboundedDirection) {
  const ConeLayout k = mixed_layout();
  const Vec e = cone_identity(k);
  EXPECT_TRUE(std::isinf(max_step(k, e, e)));
}

}  // namespace
}  // namespace w3cone::detail
