#pragma once

#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <sstream>
#include <vector>

namespace wfset {

enum class Family { standard, toeplitz, custom };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::standard: return "standard";
    case Family::toeplitz: return "toeplitz";
    case Family::custom: return "custom";
  }
  return "custom";
}

/**
 * @brief Generalized shearlet dilation group H = ±DS.
 *
 * lambdas holds (λ₂,…,λ_d); λ₁ = 1 is implicit. basis holds X₂,…,X_d.
 */
struct GroupSpec {
  int d = 2;
  Vec lambdas;
  std::vector<Mat> basis;
  Family family = Family::custom;
};

//! X_i = e₁e_iᵀ.
inline GroupSpec standard_basis(const Vec& lambdas) {
  GroupSpec s;
  s.d = static_cast<int>(lambdas.size()) + 1;
  s.lambdas = lambdas;
  s.family = Family::standard;
  for (int i = 1; i < s.d; ++i) {
    Mat X = Mat::Zero(s.d, s.d);
    X(0, i) = 1.0;
    s.basis.push_back(X);
  }
  return s;
}

//! X_{k+1} = S^k with S the superdiagonal shift; λ = (1−δ, …, 1−(d−1)δ).
inline GroupSpec toeplitz_basis(int d, double delta) {
  if (d < 2) throw Error(ErrorCode::invalid_spec, "toeplitz basis needs d >= 2");
  GroupSpec s;
  s.d = d;
  s.family = Family::toeplitz;
  s.lambdas.resize(d - 1);
  for (int i = 0; i < d - 1; ++i) s.lambdas(i) = 1.0 - (i + 1) * delta;
  Mat S = Mat::Zero(d, d);
  for (int i = 0; i + 1 < d; ++i) S(i, i + 1) = 1.0;
  Mat P = S;
  for (int k = 1; k < d; ++k) {
    s.basis.push_back(P);
    P = P * S;
  }
  return s;
}

struct GroupElement {
  Vec t;
  double a = 1.0;
  std::uint64_t group_id = 0;
};

/**
 * @brief Validated group with cached structural constants.
 *
 * Construction checks the canonical-basis and closure invariants and throws on
 * failure. Detection-specific constraints on λ are recorded, not enforced.
 */
class ShearletGroup {
 public:
  explicit ShearletGroup(GroupSpec spec) : spec_(std::move(spec)) { validate(); }

  const GroupSpec& spec() const { return spec_; }
  int d() const { return spec_.d; }
  int dim_shear() const { return spec_.d - 1; }
  std::uint64_t id() const { return id_; }
  int nilpotency_degree() const { return n_s_; }
  double closure_residual() const { return closure_residual_; }
  double lambda_min() const { return spec_.lambdas.minCoeff(); }
  double lambda_max() const { return spec_.lambdas.maxCoeff(); }
  double trace_Y() const { return 1.0 + spec_.lambdas.sum(); }
  //! Dimension of H as a manifold: one scale plus d−1 shears.
  int dim_H() const { return spec_.d; }

  //! Certified Lipschitz bound C with ‖A(t)‖ ≤ C|t|, A(t) the lower-right block of Σ tᵢXᵢ.
  double lipschitz_C() const { return lipschitz_; }

  bool detection_valid() const { return detection_reason_.empty(); }
  const std::string& detection_reason() const { return detection_reason_; }

  GroupElement element(const Vec& t, double a) const {
    if (t.size() != dim_shear())
      throw Error(ErrorCode::invalid_element, "shear vector has wrong length");
    if (a == 0.0 || !std::isfinite(a)) throw Error(ErrorCode::invalid_element, "a must be nonzero");
    return GroupElement{t, a, id_};
  }
  GroupElement identity() const { return element(Vec::Zero(dim_shear()), 1.0); }

  Mat shear_generator(const Vec& t) const {
    Mat N = Mat::Zero(d(), d());
    for (int i = 0; i < dim_shear(); ++i) N += t(i) * spec_.basis[i];
    return N;
  }

  //! (I + N)^{-1} for nilpotent N by the finite Neumann series Σ_{k<n(s)} (−N)^k.
  Mat unipotent_inverse(const Mat& N) const {
    Mat result = Mat::Identity(d(), d());
    Mat P = Mat::Identity(d(), d());
    for (int k = 1; k < n_s_; ++k) {
      P = -P * N;
      result += P;
    }
    return result;
  }

  Mat diag_part(double a) const {
    Mat D = Mat::Zero(d(), d());
    const double m = std::abs(a);
    D(0, 0) = m;
    for (int i = 0; i < dim_shear(); ++i) D(i + 1, i + 1) = std::pow(m, spec_.lambdas(i));
    return std::copysign(1.0, a) * D;
  }

  Mat to_matrix(const GroupElement& g) const {
    check(g);
    if (g.a == 0.0) throw Error(ErrorCode::invalid_element, "a = 0");
    return unipotent_inverse(shear_generator(g.t)) * diag_part(g.a);
  }

  //! Coordinates of a group matrix; rejects matrices off the group (relative residual > 1e−9).
  GroupElement from_matrix(const Mat& M) const {
    if (M.rows() != d() || M.cols() != d())
      throw Error(ErrorCode::invalid_element, "matrix has wrong shape");
    const double a = M(0, 0);
    if (a == 0.0 || !std::isfinite(a))
      throw Error(ErrorCode::invalid_element, "matrix (1,1) entry is zero");
    Mat Dinv = diag_part(a).inverse();
    Mat Uinv = M * Dinv;
    Mat U = unipotent_inverse(Uinv - Mat::Identity(d(), d()));
    GroupElement g{U.row(0).tail(dim_shear()).transpose(), a, id_};
    Mat back = to_matrix(g);
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((back - M).cwiseAbs().maxCoeff() > 1e-9 * scale)
      throw Error(ErrorCode::invalid_element, "matrix is not a group element");
    return g;
  }

  GroupElement multiply(const GroupElement& g1, const GroupElement& g2) const {
    check(g1);
    check(g2);
    return from_matrix(to_matrix(g1) * to_matrix(g2));
  }

  GroupElement invert(const GroupElement& g) const {
    return from_matrix(inverse_matrix(g));
  }

  //! Closed-form inverse h(t,a)^{-1} = h(|a|^{λ−1}·(−t + B(t)), 1/a), no matrix algebra.
  GroupElement invert_coordinates(const GroupElement& g) const {
    check(g);
    const Vec s = inversion_polynomial(g.t) - g.t;
    Vec t(dim_shear());
    for (int i = 0; i < dim_shear(); ++i) t(i) = std::pow(std::abs(g.a), spec_.lambdas(i) - 1.0) * s(i);
    return GroupElement{t, 1.0 / g.a, id_};
  }

  //! h(0,a)·h(t,1)·h(0,a)^{-1} = h((|a|^{1−λᵢ}tᵢ), 1).
  GroupElement conjugate_shear(double a, const Vec& t) const {
    Vec s(dim_shear());
    for (int i = 0; i < dim_shear(); ++i) s(i) = std::pow(std::abs(a), 1.0 - spec_.lambdas(i)) * t(i);
    return element(s, 1.0);
  }

  /**
   * @brief B(t) with h(t,1)^{-1} = h(−t + B(t), 1).
   *
   * h(s,1) = I + N(t) forces I + N(s) = (I + N(t))^{-1}; s is read off its first row.
   * Vanishes identically when n(s) = 2.
   */
  Vec inversion_polynomial(const Vec& t) const {
    Mat Uinv = unipotent_inverse(shear_generator(t));
    Vec s = Uinv.row(0).tail(dim_shear()).transpose();
    return s + t;
  }

  double haar_weight(const GroupElement& g) const {
    check(g);
    return std::pow(std::abs(g.a), -(d() - trace_Y()));
  }

  //! det h = sgn(a)^d |a|^{tr Y}.
  double determinant(const GroupElement& g) const {
    check(g);
    const double sg = (d() % 2 == 1 && g.a < 0) ? -1.0 : 1.0;
    return sg * std::pow(std::abs(g.a), trace_Y());
  }

  /**
   * @brief Spectral norm.
   *
   * Closed form for 2×2; Jacobi SVD for d ≥ 3.
   */
  static double operator_norm(const Mat& M) {
    if (M.rows() == 2 && M.cols() == 2) {
      const double s2 = M.squaredNorm();
      const double det = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
      const double disc = std::max(0.0, s2 * s2 - 4.0 * det * det);
      return std::sqrt(0.5 * (s2 + std::sqrt(disc)));
    }
    Eigen::JacobiSVD<Mat> svd(M);
    return svd.singularValues()(0);
  }
  double operator_norm(const GroupElement& g) const { return operator_norm(to_matrix(g)); }
  double inverse_norm(const GroupElement& g) const {
    return operator_norm(inverse_matrix(g));
  }

  //! Matrix of g^{-1} = D^{-1}(I + N(t)) without a general inverse.
  Mat inverse_matrix(const GroupElement& g) const {
    check(g);
    Mat Dinv = Mat::Zero(d(), d());
    const double m = std::abs(g.a), sg = std::copysign(1.0, g.a);
    Dinv(0, 0) = sg / m;
    for (int i = 0; i < dim_shear(); ++i) Dinv(i + 1, i + 1) = sg * std::pow(m, -spec_.lambdas(i));
    return Dinv * (Mat::Identity(d(), d()) + shear_generator(g.t));
  }

  void check(const GroupElement& g) const {
    if (g.group_id != id_) throw Error(ErrorCode::spec_mismatch, "element belongs to another group");
    if (g.t.size() != dim_shear()) throw Error(ErrorCode::invalid_element, "shear vector length");
  }

  std::string describe() const {
    std::ostringstream os;
    os << to_string(spec_.family) << " d=" << d() << " lambda=[";
    for (int i = 0; i < dim_shear(); ++i) os << (i ? "," : "") << spec_.lambdas(i);
    os << "] n(s)=" << n_s_;
    return os.str();
  }

 private:
  void validate() {
    const int d = spec_.d;
    if (d < 2) throw Error(ErrorCode::invalid_spec, "d must be >= 2");
    if (spec_.lambdas.size() != d - 1)
      throw Error(ErrorCode::invalid_spec, "lambda must have d-1 entries");
    if (static_cast<int>(spec_.basis.size()) != d - 1)
      throw Error(ErrorCode::invalid_spec, "shearing basis must have d-1 matrices");
    for (int i = 0; i < d - 1; ++i) {
      const Mat& X = spec_.basis[i];
      if (X.rows() != d || X.cols() != d)
        throw Error(ErrorCode::invalid_spec, "basis matrix has wrong shape");
      for (int r = 0; r < d; ++r)
        for (int c = 0; c <= r; ++c)
          if (X(r, c) != 0.0)
            throw Error(ErrorCode::invalid_spec, "basis matrix X" + std::to_string(i + 2) +
                                                     " is not strictly upper triangular");
      Vec col = X.transpose().col(0);
      Vec e = Vec::Zero(d);
      e(i + 1) = 1.0;
      if ((col - e).cwiseAbs().maxCoeff() > 1e-12)
        throw Error(ErrorCode::invalid_spec,
                    "basis is not canonical: X" + std::to_string(i + 2) + "^T e1 != e" +
                        std::to_string(i + 2));
    }
    // Closure: X_i X_j = Σ c_k X_k. The canonical basis fixes c_k = (X_i X_j)(0, k).
    closure_residual_ = 0.0;
    for (int i = 0; i < d - 1; ++i)
      for (int j = 0; j < d - 1; ++j) {
        Mat P = spec_.basis[i] * spec_.basis[j];
        Mat Q = Mat::Zero(d, d);
        for (int k = 0; k < d - 1; ++k) Q += P(0, k + 1) * spec_.basis[k];
        closure_residual_ = std::max(closure_residual_, (P - Q).cwiseAbs().maxCoeff());
      }
    if (closure_residual_ > 1e-12)
      throw Error(ErrorCode::invalid_spec, "span of shearing basis is not closed under products");

    // n(s) from a generic element with fixed incommensurate coefficients.
    Mat X = Mat::Zero(d, d);
    for (int i = 0; i < d - 1; ++i) X += (1.0 + 0.6180339887 * (i + 1)) * spec_.basis[i];
    Mat P = Mat::Identity(d, d);
    n_s_ = 1;
    while (n_s_ <= d) {
      P = P * X;
      if (P.cwiseAbs().maxCoeff() < 1e-12) break;
      ++n_s_;
    }
    if (n_s_ > d) throw Error(ErrorCode::invalid_spec, "shearing algebra is not nilpotent");

    double c2 = 0.0;
    for (int i = 0; i < d - 1; ++i) {
      Mat Y = spec_.basis[i].bottomRightCorner(d - 1, d - 1);
      const double n = operator_norm(Y);
      c2 += n * n;
    }
    lipschitz_ = std::sqrt(c2);

    const double lmin = spec_.lambdas.minCoeff(), lmax = spec_.lambdas.maxCoeff();
    if (!(lmin > 0.0)) detection_reason_ = "lambda_min > 0 violated";
    else if (!(lmax < 1.0)) detection_reason_ = "lambda_max < 1 violated";
    else if (!(lmin + lmax >= 1.0)) detection_reason_ = "lambda_min + lambda_max >= 1 violated";

    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](double v) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      h ^= bits;
      h *= 1099511628211ull;
    };
    mix(d);
    for (int i = 0; i < d - 1; ++i) mix(spec_.lambdas(i));
    for (const auto& Xi : spec_.basis)
      for (int k = 0; k < Xi.size(); ++k) mix(Xi.data()[k]);
    id_ = h == 0 ? 1 : h;
  }

  GroupSpec spec_;
  std::uint64_t id_ = 0;
  int n_s_ = 2;
  double closure_residual_ = 0.0;
  double lipschitz_ = 0.0;
  std::string detection_reason_;
};

}  // namespace wfset
