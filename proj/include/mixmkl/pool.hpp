#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mixmkl/chain.hpp"
#include "mixmkl/error.hpp"

namespace mixmkl {

struct WeightedChain {
  Chain chain;
  double weight = 1.0;
};

// Pool of chains with mixture weights plus the shared initial distribution.
struct ChainPool {
  std::vector<WeightedChain> chains;
  Distribution initial;

  int size() const { return static_cast<int>(chains.size()); }
  int n_states() const { return chains.front().chain.n_states(); }

  Eigen::VectorXd weights() const {
    Eigen::VectorXd w(size());
    for (int i = 0; i < size(); ++i) w[i] = chains[static_cast<std::size_t>(i)].weight;
    return w;
  }
};

inline void validate_pool(const ChainPool& pool, double tol = kStochasticTol) {
  if (pool.chains.empty()) throw EmptyPool("pool has no chains");
  const int n = pool.chains.front().chain.n_states();
  double sum = 0.0;
  for (const auto& wc : pool.chains) {
    if (wc.weight <= 0.0) throw InvalidArgument("chain weights must be positive");
    if (wc.chain.n_states() != n)
      throw SizeMismatch("chains in a pool must share the state space");
    sum += wc.weight;
  }
  if (std::abs(sum - 1.0) > tol)
    throw InvalidArgument("chain weights sum to " + std::to_string(sum));
  if (pool.initial.size() != n)
    throw DimensionMismatch("initial distribution size does not match state count");
}

// Proportional block sizes: chain i gets ceil(w_i * n), clipped so the total
// is exactly n; ties go to earlier-listed chains.
inline std::vector<int> allocate_proportional(const Eigen::VectorXd& weights, int n) {
  std::vector<int> sizes(static_cast<std::size_t>(weights.size()), 0);
  int remaining = n;
  for (int i = 0; i < weights.size(); ++i) {
    const int want = static_cast<int>(std::ceil(weights[i] * n - 1e-12));
    sizes[static_cast<std::size_t>(i)] = std::min(want, remaining);
    remaining -= sizes[static_cast<std::size_t>(i)];
  }
  // Round-off can leave a unit or two unassigned; earlier chains absorb them.
  for (std::size_t i = 0; remaining > 0 && i < sizes.size(); ++i) {
    sizes[i] += remaining;
    remaining = 0;
  }
  return sizes;
}

// ---------------------------------------------------------------------------
// Pool summary
// ---------------------------------------------------------------------------

struct PoolOptions {
  AnalysisOptions analysis;
  std::vector<double> eps_grid = {0.05, 0.10, 0.15, 0.20, 0.25,
                                  0.30, 0.35, 0.40, 0.45};
};

struct PerChainSummary {
  Distribution pi;
  double gamma_star = 0.0;
  double lambda = 1.0;
  std::optional<double> gamma_reversible;
  bool is_reversible = false;
  double gamma_ps = 0.0;
  int k_star = 1;
  double tau_min = 0.0;
  int t_mix_quarter = 0;
  std::vector<int> t_mix_grid;  // aligned with PoolOptions::eps_grid
  double pi_min = 0.0;
  double d1 = 0.0;  // one-step worst-case TV decay
  double chi = 0.0; // || d(nu)/d(pi_P) - 1 ||_2
};

struct PoolSummary {
  double tau_min = 0.0;    // (sum_P sqrt(mu_P * tau_min_P))^2
  double gamma_aps = 0.0;  // min_P gamma_ps_P
  double eta = 0.0;        // max_P sup d(nu)/d(pi_P)
  std::vector<double> eps_grid;
  std::vector<int> t_amix;  // max_P t_mix_P(eps), per grid point
  int t_amix_quarter = 0;
  std::vector<PerChainSummary> per_chain;
};

inline PoolSummary pool_summary(const ChainPool& pool, const PoolOptions& opts = {}) {
  validate_pool(pool);
  PoolSummary out;
  out.eps_grid = opts.eps_grid;
  if (out.eps_grid.empty()) throw ConfigError("eps grid must not be empty");

  AnalysisOptions chain_opts = opts.analysis;
  double min_eps = 0.25;
  for (double e : out.eps_grid) min_eps = std::min(min_eps, e);
  chain_opts.eps_min = std::min(chain_opts.eps_min, min_eps);

  double tau_root_sum = 0.0;
  out.gamma_aps = std::numeric_limits<double>::infinity();
  out.eta = 0.0;
  out.t_amix.assign(out.eps_grid.size(), 0);
  out.t_amix_quarter = 0;

  for (int c = 0; c < pool.size(); ++c) {
    const auto& wc = pool.chains[static_cast<std::size_t>(c)];
    PerChainSummary pcs;
    try {
      const ChainAnalysis analysis = analyze_chain(wc.chain.transition, chain_opts);
      pcs.pi = analysis.pi;
      pcs.gamma_star = analysis.spectral.gamma_star;
      pcs.lambda = analysis.spectral.lambda;
      pcs.gamma_reversible = analysis.spectral.gamma_reversible;
      pcs.is_reversible = analysis.spectral.is_reversible;
      pcs.gamma_ps = analysis.gamma_ps;
      pcs.k_star = analysis.k_star;
      pcs.pi_min = analysis.pi_min;
      pcs.d1 = analysis.profile.d[1];
      if (!analysis.tau_min)
        throw NeverMixes("no contracting step within the horizon");
      pcs.tau_min = *analysis.tau_min;
      if (!analysis.t_mix_quarter)
        throw NotMixedWithinHorizon("d(t) stayed above 1/4");
      pcs.t_mix_quarter = *analysis.t_mix_quarter;
      pcs.t_mix_grid.reserve(out.eps_grid.size());
      for (double eps : out.eps_grid)
        pcs.t_mix_grid.push_back(mixing_time(analysis.profile, eps));
      pcs.chi = chi_divergence_norm(pool.initial, analysis.pi);
    } catch (const Error& e) {
      // Re-raise with the offending chain identified, preserving the type for
      // the errors callers branch on.
      const std::string msg = "chain " + std::to_string(c) + ": " + e.what();
      if (dynamic_cast<const NotErgodic*>(&e)) throw NotErgodic(msg);
      if (dynamic_cast<const NeverMixes*>(&e)) throw NeverMixes(msg);
      if (dynamic_cast<const NotMixedWithinHorizon*>(&e))
        throw NotMixedWithinHorizon(msg);
      if (dynamic_cast<const NotAbsolutelyContinuous*>(&e))
        throw NotAbsolutelyContinuous(msg);
      throw Error(msg);
    }

    tau_root_sum += std::sqrt(wc.weight * pcs.tau_min);
    out.gamma_aps = std::min(out.gamma_aps, pcs.gamma_ps);
    out.eta = std::max(out.eta, density_sup_ratio(pool.initial, pcs.pi));
    out.t_amix_quarter = std::max(out.t_amix_quarter, pcs.t_mix_quarter);
    for (std::size_t g = 0; g < out.eps_grid.size(); ++g)
      out.t_amix[g] = std::max(out.t_amix[g], pcs.t_mix_grid[g]);
    out.per_chain.push_back(std::move(pcs));
  }
  out.tau_min = tau_root_sum * tau_root_sum;
  return out;
}

// ---------------------------------------------------------------------------
// Symmetrization offsets A_n / B_n
// ---------------------------------------------------------------------------

struct SymmetrizationOffset {
  double a_n = 0.0;
  double b_n = 0.0;  // a_n evaluated at M = 1
};

// Low-level form over precomputed per-chain (lambda_P, chi_P).
inline SymmetrizationOffset symmetrization_offset(const std::vector<double>& lambdas,
                                                  const std::vector<double>& chis,
                                                  int n, double M) {
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (M <= 0.0) throw InvalidArgument("M must be positive");
  if (lambdas.size() != chis.size() || lambdas.empty())
    throw SizeMismatch("lambda/chi lists inconsistent");
  auto eval = [&](double m_bound) {
    double worst = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      const double gap = 1.0 - lambdas[i];
      if (gap <= 1e-12) throw DegenerateGap("chain " + std::to_string(i) +
                                            " has lambda = 1");
      const double value = 2.0 * m_bound / (n * gap) +
                           64.0 * m_bound * m_bound / (double(n) * n * gap * gap) *
                               chis[i];
      worst = std::max(worst, std::sqrt(value));
    }
    return worst;
  };
  return SymmetrizationOffset{eval(M), eval(1.0)};
}

inline SymmetrizationOffset symmetrization_offset(const ChainPool& pool, int n,
                                                  double M) {
  validate_pool(pool);
  std::vector<double> lambdas, chis;
  for (const auto& wc : pool.chains) {
    const Distribution pi = stationary_distribution(wc.chain.transition);
    const SpectralSummary s = spectral_gaps(wc.chain.transition, pi);
    lambdas.push_back(s.lambda);
    chis.push_back(chi_divergence_norm(pool.initial, pi));
  }
  return symmetrization_offset(lambdas, chis, n, M);
}

// ---------------------------------------------------------------------------
// Coupling matrix norm
// ---------------------------------------------------------------------------

// Euclidean norm of Gamma * C(c) for the block-diagonal coupling matrix with
// per-block rows (1, 1, eps, eps^2, ...) over proportional block sizes and
// C(c) = c per coordinate. With per-block eps defaulted to the chain's
// one-step TV decay d_P(1), the norm is dominated by c * sqrt(n * tau_min).
inline double marton_matrix_norm(const ChainPool& pool, int n,
                                 std::optional<double> eps, double c) {
  validate_pool(pool);
  if (n < 1) throw InvalidArgument("n must be >= 1");
  if (c <= 0.0) throw InvalidArgument("c must be positive");
  if (eps && (*eps < 0.0 || *eps >= 1.0))
    throw InvalidArgument("eps must lie in [0,1)");

  const std::vector<int> sizes = allocate_proportional(pool.weights(), n);
  double norm_sq = 0.0;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    const int s = sizes[b];
    if (s == 0) continue;
    double block_eps;
    if (eps) {
      block_eps = *eps;
    } else {
      const auto& chain = pool.chains[b].chain;
      const Distribution pi = stationary_distribution(chain.transition);
      block_eps = tv_decay_profile(chain.transition, pi, 1).d[1];
    }
    // Row sums bottom-up: last row is 1, the others are 2 + eps + ... .
    double geometric_tail = 0.0;
    norm_sq += 1.0;  // last row
    for (int i = s - 2; i >= 0; --i) {
      const double row_sum = 2.0 + geometric_tail;
      norm_sq += row_sum * row_sum;
      geometric_tail = block_eps * (1.0 + geometric_tail);
    }
  }
  return c * std::sqrt(norm_sq);
}

}  // namespace mixmkl
