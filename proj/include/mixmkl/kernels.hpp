#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "mixmkl/error.hpp"

namespace mixmkl {

inline constexpr double kPsdTol = 1e-8;
inline constexpr double kWeightTol = 1e-10;

struct KernelSpec {
  enum class Kind { linear, gaussian, polynomial };

  Kind kind = Kind::linear;
  double sigma = 1.0;   // gaussian width
  int degree = 1;       // polynomial degree
  double offset = 0.0;  // polynomial offset

  static KernelSpec linear() { return KernelSpec{Kind::linear, 1.0, 1, 0.0}; }

  static KernelSpec gaussian(double sigma) {
    if (sigma <= 0.0) throw InvalidArgument("gaussian width must be positive");
    return KernelSpec{Kind::gaussian, sigma, 1, 0.0};
  }

  static KernelSpec polynomial(int degree, double offset) {
    if (degree < 1) throw InvalidArgument("polynomial degree must be >= 1");
    if (offset < 0.0) throw InvalidArgument("polynomial offset must be >= 0");
    return KernelSpec{Kind::polynomial, 1.0, degree, offset};
  }

  double eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    if (x.size() != y.size()) throw DimensionMismatch("kernel arguments differ in size");
    switch (kind) {
      case Kind::linear:
        return x.dot(y);
      case Kind::gaussian:
        return std::exp(-(x - y).squaredNorm() / (sigma * sigma));
      case Kind::polynomial:
        return std::pow(x.dot(y) + offset, degree);
    }
    return 0.0;
  }
};

// m base kernels with L_q-constrained combination weights and RKHS radius B.
struct KernelFamily {
  std::vector<KernelSpec> base;
  double q = 1.0;
  double B = 1.0;

  int size() const { return static_cast<int>(base.size()); }

  bool all_gaussian() const {
    for (const auto& k : base)
      if (k.kind != KernelSpec::Kind::gaussian) return false;
    return !base.empty();
  }
};

struct CombinationWeights {
  Eigen::VectorXd eta;
};

inline void validate_weights(const CombinationWeights& w, double q,
                             double tol = kWeightTol) {
  if (q < 1.0) throw InvalidArgument("q must be >= 1");
  double norm_q = 0.0;
  for (int i = 0; i < w.eta.size(); ++i) {
    if (w.eta[i] < -tol) throw InvalidWeights("negative combination weight");
    norm_q += std::pow(std::max(w.eta[i], 0.0), q);
  }
  if (std::abs(norm_q - 1.0) > tol)
    throw InvalidWeights("sum of eta_i^q is " + std::to_string(norm_q));
}

inline CombinationWeights uniform_weights(int m, double q) {
  if (m < 1) throw InvalidArgument("family must have at least one kernel");
  return CombinationWeights{
      Eigen::VectorXd::Constant(m, std::pow(static_cast<double>(m), -1.0 / q))};
}

// Projects non-negative weights back onto the L_q sphere.
inline void normalize_weights(Eigen::VectorXd& eta, double q) {
  double norm_q = 0.0;
  for (int i = 0; i < eta.size(); ++i) {
    eta[i] = std::max(eta[i], 0.0);
    norm_q += std::pow(eta[i], q);
  }
  if (norm_q <= 0.0) {
    eta = uniform_weights(static_cast<int>(eta.size()), q).eta;
    return;
  }
  eta /= std::pow(norm_q, 1.0 / q);
}

// ---------------------------------------------------------------------------
// Gram matrices
// ---------------------------------------------------------------------------

// Cholesky of G + tol*I succeeds iff the minimum eigenvalue is >= -tol, which
// is the cheap sufficient check used on large matrices.
inline bool is_psd_within(const Eigen::MatrixXd& G, double tol = kPsdTol) {
  Eigen::MatrixXd shifted = G;
  shifted.diagonal().array() += tol;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  return llt.info() == Eigen::Success;
}

inline Eigen::MatrixXd gram_matrix(const KernelSpec& kernel,
                                   const std::vector<Eigen::VectorXd>& points,
                                   bool check_psd = true) {
  if (points.empty()) throw InvalidArgument("empty point set");
  const int n = static_cast<int>(points.size());
  const auto dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw DimensionMismatch("points differ in dimension");
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = kernel.eval(points[static_cast<std::size_t>(i)],
                                   points[static_cast<std::size_t>(j)]);
      G(i, j) = v;
      G(j, i) = v;
    }
  }
  if (check_psd && !is_psd_within(G))
    throw Error("gram matrix has an eigenvalue below -1e-8");
  return G;
}

inline Eigen::MatrixXd combine(const std::vector<Eigen::MatrixXd>& grams,
                               const CombinationWeights& w, double q) {
  if (grams.empty()) throw SizeMismatch("no gram matrices");
  if (static_cast<int>(grams.size()) != w.eta.size())
    throw SizeMismatch("weight count does not match gram count");
  validate_weights(w, q);
  const auto rows = grams.front().rows();
  for (const auto& g : grams)
    if (g.rows() != rows || g.cols() != rows)
      throw SizeMismatch("gram matrices differ in size");
  Eigen::MatrixXd out = w.eta[0] * grams[0];
  for (std::size_t i = 1; i < grams.size(); ++i)
    out += w.eta[static_cast<Eigen::Index>(i)] * grams[i];
  return out;
}

// Pointwise combined kernel; accumulation order matches combine() so that
// gram_matrix of the combination equals combine of the gram matrices exactly.
inline double combined_eval(const KernelFamily& family, const CombinationWeights& w,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double acc = w.eta[0] * family.base[0].eval(x, y);
  for (int i = 1; i < family.size(); ++i)
    acc += w.eta[i] * family.base[static_cast<std::size_t>(i)].eval(x, y);
  return acc;
}

// ---------------------------------------------------------------------------
// Family constants
// ---------------------------------------------------------------------------

inline double max_feature_norm(const std::vector<Eigen::VectorXd>& points) {
  double out = 0.0;
  for (const auto& p : points) out = std::max(out, p.norm());
  return out;
}

// kappa = sup over base kernels and domain points of sqrt(K(x,x)). Gaussian
// kernels are normalized; linear/polynomial kernels need a domain bound.
inline double kappa(const KernelFamily& family,
                    std::optional<double> domain_max_norm = std::nullopt) {
  if (family.base.empty()) throw InvalidArgument("empty kernel family");
  double out = 0.0;
  for (const auto& k : family.base) {
    switch (k.kind) {
      case KernelSpec::Kind::gaussian:
        out = std::max(out, 1.0);
        break;
      case KernelSpec::Kind::linear:
        if (!domain_max_norm)
          throw UnboundedKernel("linear kernel needs a domain bound");
        out = std::max(out, *domain_max_norm);
        break;
      case KernelSpec::Kind::polynomial: {
        if (!domain_max_norm)
          throw UnboundedKernel("polynomial kernel needs a domain bound");
        const double base = *domain_max_norm * *domain_max_norm + k.offset;
        out = std::max(out, std::sqrt(std::pow(base, k.degree)));
        break;
      }
    }
  }
  return out;
}

// Registered capacity bounds. The all-Gaussian family inherits the
// learned-metric bound l(l+1)/2; other classes must be supplied by the caller.
inline int pseudo_dimension_bound(const KernelFamily& family, int feature_dim) {
  if (feature_dim < 1) throw InvalidArgument("feature dimension must be >= 1");
  if (family.all_gaussian()) return feature_dim * (feature_dim + 1) / 2;
  throw UnknownFamily("no registered pseudo-dimension bound for this family");
}

}  // namespace mixmkl
