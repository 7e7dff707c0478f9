#pragma once

// Cone algebra for the interior-point solver. A point of the product cone is
// one Eigen vector laid out as [orthant | SOC 1 | SOC 2 ... | PSD 1 | ...];
// PSD blocks are stored as svec: the lower triangle column by column with
// off-diagonal entries scaled by sqrt(2), so inner products are preserved.

#include <Eigen/Dense>

#include <vector>

namespace w3cone::detail {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct ConeLayout {
  int orthant = 0;
  std::vector<int> soc;  // cone dimensions (>= 2)
  std::vector<int> psd;  // matrix orders

  int dim() const;
  int degree() const;  // barrier parameter nu
};

inline int svec_size(int d) { return d * (d + 1) / 2; }
// Position of (i, j), i >= j, inside the svec of a d x d matrix.
inline int svec_index(int d, int i, int j) { return j * d - j * (j - 1) / 2 + (i - j); }

Vec svec(const Mat& m);
Mat smat(const Eigen::Ref<const Vec>& v, int d);

// Identity element e of the product cone.
Vec cone_identity(const ConeLayout& k);

// Smallest t with v + t e on the boundary of the cone (negative when v is interior).
double boundary_shift(const ConeLayout& k, const Vec& v);

// Jordan product a o b.
Vec jordan_product(const ConeLayout& k, const Vec& a, const Vec& b);

// Solves lambda o u = v for u. PSD blocks of lambda must be diagonal, which
// holds for the NT-scaled point.
Vec jordan_divide(const ConeLayout& k, const Vec& lambda, const Vec& v);

// Largest alpha with lambda + alpha d inside the cone (infinity if unbounded).
// PSD blocks of lambda must be diagonal.
double max_step(const ConeLayout& k, const Vec& lambda, const Vec& d);

// Nesterov-Todd scaling W for a primal-dual pair (s, z) of interior points:
// W z = W^{-T} s = lambda. Orthant and SOC blocks of W are symmetric; the PSD
// block acts as X -> R^T X R.
class NtScaling {
 public:
  // Returns false when (s, z) is not numerically interior.
  bool compute(const ConeLayout& k, const Vec& s, const Vec& z);

  const Vec& lambda() const { return lambda_; }

  Vec apply_w(const Vec& v) const;
  Vec apply_wt(const Vec& v) const;
  Vec apply_winv(const Vec& v) const;
  Vec apply_winvt(const Vec& v) const;
  // Overwrites each column c of g with W^{-T} c.
  void apply_winvt_columns(Mat& g) const;

 private:
  enum class Op { kW, kWt, kWinv, kWinvt };
  void apply(Op op, Eigen::Ref<Vec> v) const;

  ConeLayout layout_;
  Vec orthant_w_;
  struct Soc {
    double eta;
    Vec wbar;
  };
  std::vector<Soc> soc_;
  struct Psd {
    Mat r;
    Mat rinv;
  };
  std::vector<Psd> psd_;
  Vec lambda_;
};

}  // namespace w3cone::detail
