#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixmkl/data.hpp"
#include "mixmkl/error.hpp"
#include "mixmkl/kernels.hpp"
#include "mixmkl/parallel.hpp"
#include "mixmkl/rng.hpp"

namespace mixmkl {

inline constexpr double kEta0 = 23.0 / 22.0;

struct BoundInputs {
  int n = 0;
  int m = 0;
  double B = 1.0;
  double kappa = 1.0;
  double delta = 1.0;
  double alpha = 0.05;
  std::optional<double> tau_min;
  std::optional<double> b_n;
  std::optional<double> q;
  std::optional<double> r;  // conjugate exponent, 1/q + 1/r = 1
  std::optional<int> d_k;
  double c_chaos = 1.0;  // unspecified universal constant, reported as used
};

struct BoundTerms {
  double complexity = 0.0;
  double concentration = 0.0;
  double bn = 0.0;
};

struct BoundReport {
  std::string kind;
  double value = 0.0;
  BoundTerms terms;
  BoundInputs inputs;
  // sqrt(ln(2(m+1))): the factor of the complexity term that carries the
  // sqrt(log m) growth, with the alpha part split off as m-independent.
  std::optional<double> m_subterm;
  // ceil(log2 m) variant of the L1 bound, reported alongside the natural-log value.
  std::optional<double> log2_variant;
};

enum class RademacherKind { lemma5, cortes_q, cortes_l1, pseudodim };
enum class BoundKind { thm1, thm2, thm3, corollary, master };

namespace detail {

inline void check_common(const BoundInputs& in) {
  if (in.n < 1) throw MissingInput("n must be >= 1");
  if (in.m < 1) throw MissingInput("m must be >= 1");
  if (in.B <= 0.0 || in.kappa <= 0.0) throw MissingInput("B and kappa must be positive");
  if (in.alpha <= 0.0 || in.alpha >= 1.0)
    throw InvalidArgument("alpha must be in (0,1)");
  if (in.q && in.r) {
    if (std::abs(1.0 / *in.q + 1.0 / *in.r - 1.0) > 1e-9)
      throw InvalidConjugates("1/q + 1/r must equal 1");
  }
}

}  // namespace detail

// Distribution-free empirical Rademacher bounds for the multi-kernel class.
inline BoundReport rademacher_bound(RademacherKind kind, const BoundInputs& in) {
  detail::check_common(in);
  BoundReport report;
  report.inputs = in;
  const double n = in.n;
  const double Bk = in.B * in.kappa;
  switch (kind) {
    case RademacherKind::lemma5: {
      report.kind = "lemma5";
      const double log_term = std::log(2.0 * (in.m + 1) / in.alpha);
      report.value = 2.0 * Bk / std::sqrt(n) +
                     8.0 * Bk * std::sqrt(log_term / (2.0 * n));
      report.m_subterm = std::sqrt(std::log(2.0 * (in.m + 1)));
      break;
    }
    case RademacherKind::cortes_q: {
      report.kind = "cortes_q";
      if (!in.r) throw MissingInput("conjugate exponent r required");
      if (*in.r < 1.0) throw InvalidConjugates("r must be >= 1");
      report.value =
          Bk * std::sqrt(kEta0 * *in.r * std::pow(in.m, 1.0 / *in.r) / n);
      break;
    }
    case RademacherKind::cortes_l1: {
      report.kind = "cortes_l1";
      const double ceil_ln = std::ceil(std::log(static_cast<double>(in.m)));
      report.value =
          Bk * std::sqrt(kEta0 * std::numbers::e * ceil_ln / n);
      const double ceil_l2 = std::ceil(std::log2(static_cast<double>(in.m)));
      report.log2_variant =
          Bk * std::sqrt(kEta0 * std::numbers::e * ceil_l2 / n);
      break;
    }
    case RademacherKind::pseudodim: {
      report.kind = "pseudodim";
      if (!in.d_k) throw MissingInput("pseudo-dimension d_k required");
      const double dk = *in.d_k;
      const double chaos =
          in.c_chaos * (1.0 + in.kappa) * (1.0 + in.kappa) * dk *
          std::log(2.0 * std::numbers::e * n * n);
      report.value = in.B * std::sqrt(chaos / n) + Bk / std::sqrt(n);
      break;
    }
  }
  report.terms.complexity = report.value;
  return report;
}

// Margin bound on the estimation error:
//   (8/delta) * R + (sqrt(0.5 ln(c pi^2 / (3 alpha))) + ln ln(2/delta)) *
//   sqrt(tau_min/n) + B_n,
// where R is the Rademacher term for the chosen kind (or a supplied estimate)
// and c = 2 except for the L1 corollary. The ln ln(2/delta) term is negative
// near delta = 1 and is kept as written.
inline BoundReport generalization_bound(
    BoundKind kind, const BoundInputs& in,
    std::optional<double> rademacher_value = std::nullopt) {
  detail::check_common(in);
  if (in.delta <= 0.0 || in.delta > 1.0)
    throw InvalidMargin("delta must be in (0,1]");
  if (!in.tau_min) throw MissingInput("tau_min required");
  if (!in.b_n) throw MissingInput("b_n required");

  BoundReport report;
  report.inputs = in;
  double r_term = 0.0;
  double pi_sq_factor = 2.0;
  switch (kind) {
    case BoundKind::thm1: {
      report.kind = "thm1";
      BoundReport inner = rademacher_bound(RademacherKind::lemma5, in);
      r_term = inner.value;
      report.m_subterm = inner.m_subterm;
      break;
    }
    case BoundKind::thm2:
      report.kind = "thm2";
      r_term = rademacher_bound(RademacherKind::pseudodim, in).value;
      break;
    case BoundKind::thm3:
      report.kind = "thm3";
      r_term = rademacher_bound(RademacherKind::cortes_q, in).value;
      break;
    case BoundKind::corollary: {
      report.kind = "corollary";
      BoundReport inner = rademacher_bound(RademacherKind::cortes_l1, in);
      r_term = inner.value;
      report.log2_variant = inner.log2_variant;
      pi_sq_factor = 1.0;
      break;
    }
    case BoundKind::master:
      report.kind = "master";
      if (!rademacher_value)
        throw MissingInput("master bound needs an explicit Rademacher value");
      break;
  }
  if (rademacher_value) r_term = *rademacher_value;

  const double pi_sq = std::numbers::pi * std::numbers::pi;
  report.terms.complexity = 8.0 / in.delta * r_term;
  report.terms.concentration =
      (std::sqrt(0.5 * std::log(pi_sq_factor * pi_sq / (3.0 * in.alpha))) +
       std::log(std::log(2.0 / in.delta))) *
      std::sqrt(*in.tau_min / in.n);
  report.terms.bn = *in.b_n;
  report.value =
      report.terms.complexity + report.terms.concentration + report.terms.bn;
  return report;
}

// ---------------------------------------------------------------------------
// Monte-Carlo complexity estimators
// ---------------------------------------------------------------------------

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
  long trials = 0;
  std::vector<double> per_draw;  // populated when keep_draws is set
};

struct EstimatorOptions {
  bool keep_draws = false;
};

namespace detail {

// sup over the L_q sphere of a linear form with coefficients c: the maximum
// coordinate for q = 1, otherwise the conjugate-norm of the positive part
// (all-nonpositive coefficient vectors peak at a single vertex).
inline double lq_sup(const Eigen::VectorXd& c, double q) {
  if (q <= 1.0) return c.maxCoeff();
  const double r = q / (q - 1.0);
  double acc = 0.0;
  bool any_positive = false;
  for (int i = 0; i < c.size(); ++i) {
    if (c[i] > 0.0) {
      any_positive = true;
      acc += std::pow(c[i], r);
    }
  }
  if (!any_positive) return c.maxCoeff();
  return std::pow(acc, 1.0 / r);
}

template <typename PerDraw>
McEstimate run_estimator(long trials, std::uint64_t seed, std::uint64_t tag,
                         const EstimatorOptions& opts, PerDraw&& per_draw) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  std::vector<double> values(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    CounterRng rng(fold(derive_key(seed, {tag}), static_cast<std::uint64_t>(t)));
    values[t] = per_draw(rng);
  });
  McEstimate out;
  out.trials = trials;
  // Degenerate draws (single points, identity grams) must come back exact.
  bool constant = true;
  for (double v : values) constant = constant && v == values.front();
  if (constant) {
    out.estimate = values.front();
    out.stderr_ = 0.0;
    if (opts.keep_draws) out.per_draw = std::move(values);
    return out;
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(trials);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  out.estimate = mean;
  out.stderr_ = trials > 1
                    ? std::sqrt(ss / (static_cast<double>(trials) - 1.0) /
                                static_cast<double>(trials))
                    : 0.0;
  if (opts.keep_draws) out.per_draw = std::move(values);
  return out;
}

}  // namespace detail

inline constexpr std::uint64_t kTagRademacher = 0x726164ULL;
inline constexpr std::uint64_t kTagChaos = 0x63686173ULL;

// Monte-Carlo estimate of the empirical Rademacher complexity of the radius-B
// multi-kernel class on the given points: (B/n) E_eps sup_K sqrt(eps' G_K eps),
// the sup solved exactly per draw over the L_q weight sphere.
inline McEstimate empirical_rademacher(const std::vector<Eigen::VectorXd>& points,
                                       const KernelFamily& family, long trials,
                                       std::uint64_t seed,
                                       const EstimatorOptions& opts = {}) {
  const int n = static_cast<int>(points.size());
  const int m = family.size();
  std::vector<Eigen::MatrixXd> grams;
  grams.reserve(static_cast<std::size_t>(m));
  for (const auto& k : family.base) grams.push_back(gram_matrix(k, points));
  return detail::run_estimator(
      trials, seed, kTagRademacher, opts, [&](CounterRng& rng) {
        Eigen::VectorXd eps(n);
        for (int i = 0; i < n; ++i) eps[i] = rng.next_sign();
        Eigen::VectorXd c(m);
        for (int i = 0; i < m; ++i)
          c[i] = std::max(eps.dot(grams[static_cast<std::size_t>(i)] * eps), 0.0);
        return family.B * std::sqrt(detail::lq_sup(c, family.q)) / n;
      });
}

inline McEstimate empirical_rademacher(const MixedDataset& ds,
                                       const KernelFamily& family, long trials,
                                       std::uint64_t seed,
                                       const EstimatorOptions& opts = {}) {
  std::vector<Eigen::VectorXd> points;
  points.reserve(ds.samples.size());
  for (const auto& s : ds.samples) points.push_back(s.feature);
  return empirical_rademacher(points, family, trials, seed, opts);
}

// Monte-Carlo estimate of the chaos complexity
// (1/n) E_eps sup_K sum_{i<j} eps_i eps_j K(X_i, X_j). The off-diagonal sum is
// (eps' G eps - tr G)/2, which may be negative, so the sup keeps the sign.
inline McEstimate empirical_chaos_complexity(const std::vector<Eigen::VectorXd>& points,
                                             const KernelFamily& family, long trials,
                                             std::uint64_t seed,
                                             const EstimatorOptions& opts = {}) {
  const int n = static_cast<int>(points.size());
  const int m = family.size();
  std::vector<Eigen::MatrixXd> grams;
  std::vector<double> traces;
  for (const auto& k : family.base) {
    grams.push_back(gram_matrix(k, points));
    traces.push_back(grams.back().trace());
  }
  return detail::run_estimator(
      trials, seed, kTagChaos, opts, [&](CounterRng& rng) {
        Eigen::VectorXd eps(n);
        for (int i = 0; i < n; ++i) eps[i] = rng.next_sign();
        Eigen::VectorXd c(m);
        for (int i = 0; i < m; ++i)
          c[i] = 0.5 * (eps.dot(grams[static_cast<std::size_t>(i)] * eps) -
                        traces[static_cast<std::size_t>(i)]);
        return detail::lq_sup(c, family.q) / n;
      });
}

inline McEstimate empirical_chaos_complexity(const MixedDataset& ds,
                                             const KernelFamily& family, long trials,
                                             std::uint64_t seed,
                                             const EstimatorOptions& opts = {}) {
  std::vector<Eigen::VectorXd> points;
  points.reserve(ds.samples.size());
  for (const auto& s : ds.samples) points.push_back(s.feature);
  return empirical_chaos_complexity(points, family, trials, seed, opts);
}

}  // namespace mixmkl
