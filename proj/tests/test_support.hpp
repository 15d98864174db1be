#pragma once

// Seeded builders for the chains, pools and kernel families the test suites
// share. Everything here is deterministic in the given seed.

#include <cstdint>
#include <vector>

#include "mixmkl/mixmkl.hpp"

namespace testsupport {

using namespace mixmkl;

inline TransitionMatrix two_state_chain(double p) {
  Eigen::MatrixXd P(2, 2);
  P << 1.0 - p, p, p, 1.0 - p;
  return validate_chain(P);
}

inline TransitionMatrix cycle_chain(int n) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) P(i, (i + 1) % n) = 1.0;
  return TransitionMatrix{P};  // periodic: bypass downstream ergodicity checks
}

inline Distribution uniform_distribution(int n) {
  return Distribution{Eigen::VectorXd::Constant(n, 1.0 / n)};
}

// Rows drawn from a flat Dirichlet, blended with the uniform row so every
// entry is bounded away from zero (ergodic, quickly mixing).
inline TransitionMatrix random_dirichlet_chain(int n_states, std::uint64_t seed,
                                               double smoothing = 0.2) {
  CounterRng rng(seed, {0xd117ULL});
  Eigen::MatrixXd P(n_states, n_states);
  for (int i = 0; i < n_states; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n_states; ++j) {
      P(i, j) = rng.next_exponential();
      sum += P(i, j);
    }
    for (int j = 0; j < n_states; ++j)
      P(i, j) = (1.0 - smoothing) * P(i, j) / sum + smoothing / n_states;
  }
  return validate_chain(P);
}

// Random walk on a complete weighted graph: reversible by construction.
inline TransitionMatrix random_reversible_chain(int n_states, std::uint64_t seed) {
  CounterRng rng(seed, {0x3e7ULL});
  Eigen::MatrixXd W(n_states, n_states);
  for (int i = 0; i < n_states; ++i)
    for (int j = i; j < n_states; ++j) {
      const double w = 0.05 + rng.next_unit();
      W(i, j) = w;
      W(j, i) = w;
    }
  for (int i = 0; i < n_states; ++i) W.row(i) /= W.row(i).sum();
  return validate_chain(W);
}

inline Chain bare_chain(TransitionMatrix tm) {
  Chain c;
  c.transition = std::move(tm);
  return c;
}

inline Chain labeled_chain(TransitionMatrix tm, double flip) {
  Chain c;
  c.transition = std::move(tm);
  Emission em;
  em.flip = Eigen::VectorXd::Constant(c.n_states(), flip);
  em.positive_states = default_positive_states(c.n_states());
  c.emission = std::move(em);
  return c;
}

// Two symmetric two-state chains (p = 0.25 and p = 0.4), equal weights,
// uniform start. Both have the uniform stationary law, so eta = 1.
inline ChainPool desk_pool(double flip = 0.1) {
  ChainPool pool;
  pool.chains.push_back({labeled_chain(two_state_chain(0.25), flip), 0.5});
  pool.chains.push_back({labeled_chain(two_state_chain(0.4), flip), 0.5});
  pool.initial = uniform_distribution(2);
  return pool;
}

inline ChainPool single_chain_pool(TransitionMatrix tm) {
  ChainPool pool;
  pool.chains.push_back({bare_chain(std::move(tm)), 1.0});
  pool.initial =
      stationary_distribution(pool.chains.front().chain.transition);
  return pool;
}

// k random smoothed chains on a shared state space, random weights >= 0.15,
// uniform start.
inline ChainPool random_pool(int n_states, int k, std::uint64_t seed, double flip = 0.1) {
  ChainPool pool;
  CounterRng rng(seed, {0x9007ULL});
  Eigen::VectorXd w(k);
  for (int c = 0; c < k; ++c) w[c] = 0.15 + rng.next_unit();
  w /= w.sum();
  for (int c = 0; c < k; ++c)
    pool.chains.push_back(
        {labeled_chain(random_dirichlet_chain(n_states, fold(seed, c)), flip), w[c]});
  pool.initial = uniform_distribution(n_states);
  return pool;
}

inline KernelFamily gaussian_family(std::vector<double> sigmas, double B = 1.0,
                                    double q = 1.0) {
  KernelFamily fam;
  fam.B = B;
  fam.q = q;
  for (double s : sigmas) fam.base.push_back(KernelSpec::gaussian(s));
  return fam;
}

inline Eigen::VectorXd sign_split_function(int states) {
  Eigen::VectorXd g(states);
  for (int s = 0; s < states; ++s) g[s] = s >= (states + 1) / 2 ? 1.0 : -1.0;
  return g;
}

inline std::vector<Eigen::VectorXd> random_sign_tables(int count, int states,
                                                       std::uint64_t seed) {
  CounterRng rng(seed, {0x7ab1e5ULL});
  std::vector<Eigen::VectorXd> tables;
  for (int f = 0; f < count; ++f) {
    Eigen::VectorXd t(states);
    for (int s = 0; s < states; ++s) t[s] = rng.next_sign();
    tables.push_back(t);
  }
  return tables;
}

}  // namespace testsupport
