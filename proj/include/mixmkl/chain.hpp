#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mixmkl/error.hpp"

namespace mixmkl {

// Default tolerances. All of them can be overridden per call.
inline constexpr double kStochasticTol = 1e-9;
inline constexpr double kStationaryTol = 1e-12;
inline constexpr double kReversibilityTol = 1e-10;
inline constexpr double kEigenOneTol = 1e-8;

// Row-stochastic transition matrix of a finite-state chain.
struct TransitionMatrix {
  Eigen::MatrixXd rows;

  int n_states() const { return static_cast<int>(rows.rows()); }
};

// Probability vector over the state space.
struct Distribution {
  Eigen::VectorXd probs;

  int size() const { return static_cast<int>(probs.size()); }
  double min_mass() const { return probs.minCoeff(); }
};

struct SpectralSummary {
  double gamma_star = 0.0;                  // absolute spectral gap
  std::optional<double> gamma_reversible;   // signed-eigenvalue gap, reversible only
  double lambda = 1.0;                      // operator norm of Q - E_pi, = 1 - gamma_star
  bool is_reversible = false;
};

// d(t) = worst-case total variation distance between the t-step law and pi,
// for t = 0..t_max.
struct MixingProfile {
  std::vector<double> d;
  int t_max = 0;
};

// Per-state label emission: the clean label of state x is sign(x) and it is
// flipped with probability flip[x].
struct Emission {
  Eigen::VectorXd flip;
  std::vector<int> positive_states;

  int sign(int state) const {
    for (int s : positive_states)
      if (s == state) return 1;
    return -1;
  }
};

// One element of the chain pool: transition matrix plus the per-state feature
// embedding and (optionally) the label emission table.
struct Chain {
  TransitionMatrix transition;
  std::vector<Eigen::VectorXd> embedding;  // empty => one-hot
  std::optional<Emission> emission;

  int n_states() const { return transition.n_states(); }

  Eigen::VectorXd feature(int state) const {
    if (embedding.empty()) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n_states());
      e[state] = 1.0;
      return e;
    }
    return embedding[static_cast<std::size_t>(state)];
  }

  int feature_dim() const {
    return embedding.empty() ? n_states() : static_cast<int>(embedding.front().size());
  }
};

inline std::vector<int> default_positive_states(int n_states) {
  // Upper half of the state indices carries the +1 clean label.
  std::vector<int> out;
  for (int s = (n_states + 1) / 2; s < n_states; ++s) out.push_back(s);
  return out;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline TransitionMatrix validate_chain(const Eigen::MatrixXd& raw,
                                       double tol = kStochasticTol) {
  if (raw.rows() != raw.cols())
    throw InvalidArgument("transition matrix must be square");
  if (raw.rows() < 2) throw TooSmall("transition matrix needs at least 2 states");
  const int n = static_cast<int>(raw.rows());
  Eigen::MatrixXd rows = raw;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      const double v = rows(i, j);
      if (v < -tol || v > 1.0 + tol)
        throw NonStochastic("entry (" + std::to_string(i) + "," + std::to_string(j) +
                            ") outside [0,1]: " + std::to_string(v));
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol)
      throw NonStochastic("row " + std::to_string(i) +
                          " sums to " + std::to_string(sum));
    // Renormalize so downstream invariants hold to machine precision.
    for (int j = 0; j < n; ++j) rows(i, j) = std::max(rows(i, j), 0.0) / sum;
  }
  return TransitionMatrix{std::move(rows)};
}

inline Distribution validate_distribution(const Eigen::VectorXd& raw,
                                          double tol = kStochasticTol) {
  double sum = 0.0;
  for (int i = 0; i < raw.size(); ++i) {
    if (raw[i] < -tol)
      throw InvalidArgument("distribution entry " + std::to_string(i) + " is negative");
    sum += raw[i];
  }
  if (std::abs(sum - 1.0) > tol)
    throw InvalidArgument("distribution sums to " + std::to_string(sum));
  Eigen::VectorXd probs = raw.cwiseMax(0.0) / sum;
  return Distribution{std::move(probs)};
}

inline double stationarity_residual(const TransitionMatrix& P, const Distribution& pi) {
  const Eigen::VectorXd res =
      (P.rows.transpose() * pi.probs - pi.probs).cwiseAbs();
  return res.sum();
}

inline void require_stationary(const TransitionMatrix& P, const Distribution& pi,
                               double tol = 1e-8) {
  if (pi.size() != P.n_states())
    throw DimensionMismatch("distribution size does not match state count");
  if (stationarity_residual(P, pi) > tol)
    throw InvalidArgument("supplied distribution is not stationary for the chain");
}

// ---------------------------------------------------------------------------
// Stationary distribution
// ---------------------------------------------------------------------------

// Primitivity test: P^k is entry-wise positive for some k iff it is positive
// for every k' >= k, so checking one boolean power with exponent >= n^2
// (above the Wielandt bound n^2 - 2n + 2) is exact.
inline bool is_primitive(const TransitionMatrix& P) {
  const int n = P.n_states();
  using BoolMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
  BoolMat b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = P.rows(i, j) > 0.0;
  auto bool_mult = [n](const BoolMat& a, const BoolMat& c) {
    BoolMat out = BoolMat::Constant(n, n, false);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (a(i, k))
          for (int j = 0; j < n; ++j)
            if (c(k, j)) out(i, j) = true;
    return out;
  };
  long exponent = 1;
  const long target = static_cast<long>(n) * n;
  while (exponent < target) {
    b = bool_mult(b, b);
    exponent *= 2;
    if (b.all()) return true;
  }
  return b.all();
}

inline Distribution stationary_distribution(const TransitionMatrix& P,
                                            double tol = kStationaryTol) {
  if (tol <= 0.0) throw InvalidArgument("tolerance must be positive");
  const int n = P.n_states();
  if (!is_primitive(P))
    throw NotErgodic("chain is not ergodic (no entry-wise positive power)");

  // Solve pi (P - I) = 0 with the normalization sum(pi) = 1 appended.
  Eigen::MatrixXd A = P.rows.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[n - 1] = 1.0;
  Eigen::VectorXd pi = A.fullPivLu().solve(b);

  bool ok = pi.minCoeff() > 0.0;
  if (ok) {
    pi /= pi.sum();
    ok = (P.rows.transpose() * pi - pi).cwiseAbs().sum() <= tol;
  }
  if (!ok) {
    // Power-iteration fallback; convergence is guaranteed for primitive chains.
    pi = Eigen::VectorXd::Constant(n, 1.0 / n);
    const long max_iter = 1000L * n * n + 100000L;
    for (long it = 0; it < max_iter; ++it) {
      Eigen::VectorXd next = P.rows.transpose() * pi;
      next /= next.sum();
      const double res = (P.rows.transpose() * next - next).cwiseAbs().sum();
      pi = next;
      if (res <= tol) break;
    }
    if ((P.rows.transpose() * pi - pi).cwiseAbs().sum() > tol)
      throw NotErgodic("power iteration failed to reach the requested residual");
  }
  return Distribution{std::move(pi)};
}

// ---------------------------------------------------------------------------
// Time reversal
// ---------------------------------------------------------------------------

inline TransitionMatrix time_reversal(const TransitionMatrix& P, const Distribution& pi) {
  require_stationary(P, pi);
  const int n = P.n_states();
  Eigen::MatrixXd rev(n, n);
  for (int x = 0; x < n; ++x) {
    if (pi.probs[x] <= 0.0)
      throw ZeroStationaryMass("state " + std::to_string(x) + " has zero mass");
    for (int y = 0; y < n; ++y) rev(x, y) = pi.probs[y] * P.rows(y, x) / pi.probs[x];
    const double sum = rev.row(x).sum();
    rev.row(x) /= sum;
  }
  return TransitionMatrix{std::move(rev)};
}

inline bool detailed_balance_holds(const TransitionMatrix& P, const Distribution& pi,
                                   double tol = kReversibilityTol) {
  const int n = P.n_states();
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y)
      if (std::abs(pi.probs[x] * P.rows(x, y) - pi.probs[y] * P.rows(y, x)) > tol)
        return false;
  return true;
}

// ---------------------------------------------------------------------------
// Spectral gaps
// ---------------------------------------------------------------------------

namespace detail {

// Similarity transform D^{1/2} M D^{-1/2} which is symmetric whenever M is
// self-adjoint in L2(pi); its eigenvalues equal those of M.
inline Eigen::MatrixXd pi_symmetrized(const Eigen::MatrixXd& M, const Distribution& pi) {
  const int n = static_cast<int>(M.rows());
  Eigen::MatrixXd S(n, n);
  for (int x = 0; x < n; ++x) {
    const double sx = std::sqrt(pi.probs[x]);
    for (int y = 0; y < n; ++y) S(x, y) = sx * M(x, y) / std::sqrt(pi.probs[y]);
  }
  return 0.5 * (S + S.transpose());
}

// Gap of a self-adjoint (in L2(pi)) stochastic matrix: 1 minus the second
// largest eigenvalue, 0 when eigenvalue 1 is not simple.
inline double self_adjoint_gap(const Eigen::MatrixXd& M, const Distribution& pi,
                               double eig_one_tol = kEigenOneTol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pi_symmetrized(M, pi),
                                                    Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  const int n = static_cast<int>(ev.size());
  const double second = ev[n - 2];
  if (second >= 1.0 - eig_one_tol) return 0.0;
  return std::clamp(1.0 - second, 0.0, 1.0);
}

}  // namespace detail

inline SpectralSummary spectral_gaps(const TransitionMatrix& P, const Distribution& pi,
                                     double rev_tol = kReversibilityTol,
                                     double eig_one_tol = kEigenOneTol) {
  require_stationary(P, pi);
  SpectralSummary out;
  out.is_reversible = detailed_balance_holds(P, pi, rev_tol);

  if (out.is_reversible) {
    // Real spectrum: derive both gaps from the same symmetric eigensolve so
    // gamma >= gamma_star holds exactly, not merely up to solver noise.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ses(
        detail::pi_symmetrized(P.rows, pi), Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = ses.eigenvalues();  // ascending
    const int n = static_cast<int>(ev.size());
    int mult_one = 0;
    double max_abs = 0.0, max_signed = -1.0;
    bool skipped_unit = false;
    for (int i = n - 1; i >= 0; --i) {
      if (!skipped_unit && std::abs(ev[i] - 1.0) <= eig_one_tol && i == n - 1) {
        skipped_unit = true;  // the Perron eigenvalue itself
        ++mult_one;
        continue;
      }
      if (std::abs(ev[i] - 1.0) <= eig_one_tol) ++mult_one;
      max_abs = std::max(max_abs, std::abs(ev[i]));
      max_signed = std::max(max_signed, ev[i]);
    }
    if (mult_one == 1) {
      out.gamma_star = std::clamp(1.0 - max_abs, 0.0, 1.0);
      out.gamma_reversible = std::clamp(1.0 - max_signed, 0.0, 1.0);
    } else {
      out.gamma_star = 0.0;
      out.gamma_reversible = 0.0;
    }
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(P.rows, /*computeEigenvectors=*/false);
    const auto& ev = es.eigenvalues();
    int mult_one = 0;
    double max_other = 0.0;
    for (int i = 0; i < ev.size(); ++i) {
      if (std::abs(ev[i] - std::complex<double>(1.0, 0.0)) <= eig_one_tol)
        ++mult_one;
      else
        max_other = std::max(max_other, std::abs(ev[i]));
    }
    out.gamma_star =
        (mult_one == 1) ? std::clamp(1.0 - max_other, 0.0, 1.0) : 0.0;
  }
  out.lambda = 1.0 - out.gamma_star;
  return out;
}

struct PseudoGapResult {
  double gamma_ps = 0.0;
  int k_star = 1;
};

// gamma_ps = max_k gap((P*)^k P^k) / k over k = 1..k_max. The sequence is not
// monotone, so every k up to k_max is evaluated.
inline PseudoGapResult pseudo_spectral_gap(const TransitionMatrix& P,
                                           const Distribution& pi, int k_max = 25) {
  if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
  const TransitionMatrix rev = time_reversal(P, pi);  // throws ZeroStationaryMass
  const int n = P.n_states();
  Eigen::MatrixXd Pk = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd Rk = Eigen::MatrixXd::Identity(n, n);
  PseudoGapResult best;
  best.gamma_ps = 0.0;
  best.k_star = 1;
  for (int k = 1; k <= k_max; ++k) {
    Pk = Pk * P.rows;
    Rk = Rk * rev.rows;
    const Eigen::MatrixXd M = Rk * Pk;
    const double value = detail::self_adjoint_gap(M, pi) / k;
    if (value > best.gamma_ps) {
      best.gamma_ps = value;
      best.k_star = k;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Mixing profile
// ---------------------------------------------------------------------------

inline MixingProfile tv_decay_profile(const TransitionMatrix& P, const Distribution& pi,
                                      int t_max) {
  if (t_max < 1) throw InvalidArgument("t_max must be >= 1");
  require_stationary(P, pi);
  const int n = P.n_states();
  MixingProfile profile;
  profile.t_max = t_max;
  profile.d.reserve(static_cast<std::size_t>(t_max) + 1);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (int t = 0; t <= t_max; ++t) {
    if (t > 0) power = power * P.rows;
    double worst = 0.0;
    for (int x = 0; x < n; ++x) {
      double tv = 0.0;
      for (int y = 0; y < n; ++y) tv += std::abs(power(x, y) - pi.probs[y]);
      worst = std::max(worst, 0.5 * tv);
    }
    profile.d.push_back(worst);
  }
  return profile;
}

inline int mixing_time(const MixingProfile& profile, double eps) {
  if (eps <= 0.0 || eps >= 1.0) throw InvalidArgument("eps must be in (0,1)");
  for (int t = 0; t <= profile.t_max; ++t)
    if (profile.d[static_cast<std::size_t>(t)] <= eps) return t;
  throw NotMixedWithinHorizon("d(t_max) = " +
                              std::to_string(profile.d.back()) + " > eps = " +
                              std::to_string(eps));
}

// Mixing-time constant min_{t>=1} t * ((2 - d(t)) / (1 - d(t)))^2, searched
// over steps that actually contract (d(t) < d(0)); the degenerate eps >= d(0)
// branch, where the mixing time is 0, is excluded.
inline double tau_min_single(const MixingProfile& profile) {
  const double d0 = profile.d[0];
  double best = std::numeric_limits<double>::infinity();
  for (int t = 1; t <= profile.t_max; ++t) {
    const double dt = profile.d[static_cast<std::size_t>(t)];
    if (dt >= 1.0 - 1e-12 || dt >= d0 - 1e-12) continue;
    const double factor = (2.0 - dt) / (1.0 - dt);
    best = std::min(best, t * factor * factor);
  }
  if (!std::isfinite(best))
    throw NeverMixes("no step with d(t) < min(1, d(0)) within the horizon");
  return best;
}

// ---------------------------------------------------------------------------
// Chi-square style divergence norm
// ---------------------------------------------------------------------------

// L2(pi) norm of d(nu)/d(pi) - 1.
inline double chi_divergence_norm(const Distribution& nu, const Distribution& pi) {
  if (nu.size() != pi.size())
    throw DimensionMismatch("distributions have different sizes");
  double acc = 0.0;
  for (int x = 0; x < nu.size(); ++x) {
    if (pi.probs[x] <= 1e-300) {
      if (nu.probs[x] > 1e-300)
        throw NotAbsolutelyContinuous("nu puts mass on a pi-null state " +
                                      std::to_string(x));
      continue;
    }
    const double ratio = nu.probs[x] / pi.probs[x] - 1.0;
    acc += pi.probs[x] * ratio * ratio;
  }
  return std::sqrt(acc);
}

// Sup norm of d(nu)/d(pi); >= 1 for any pair of distributions.
inline double density_sup_ratio(const Distribution& nu, const Distribution& pi) {
  if (nu.size() != pi.size())
    throw DimensionMismatch("distributions have different sizes");
  double worst = 0.0;
  for (int x = 0; x < nu.size(); ++x) {
    if (pi.probs[x] <= 1e-300) {
      if (nu.probs[x] > 1e-300)
        throw NotAbsolutelyContinuous("nu puts mass on a pi-null state " +
                                      std::to_string(x));
      continue;
    }
    worst = std::max(worst, nu.probs[x] / pi.probs[x]);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Whole-chain analysis (profile horizon chosen adaptively)
// ---------------------------------------------------------------------------

struct AnalysisOptions {
  int k_max = 25;
  std::optional<int> t_max;   // explicit horizon; adaptive when unset
  double eps_min = 0.05;      // smallest eps the profile must resolve
  double stationary_tol = kStationaryTol;
  long horizon_cap = 1 << 20;
};

struct ChainAnalysis {
  Distribution pi;
  SpectralSummary spectral;
  double gamma_ps = 0.0;
  int k_star = 1;
  MixingProfile profile;
  std::optional<int> t_mix_quarter;  // unset when the horizon was insufficient
  std::optional<double> tau_min;     // unset when the chain never contracts
  double pi_min = 0.0;
};

inline ChainAnalysis analyze_chain(const TransitionMatrix& P,
                                   const AnalysisOptions& opts = {}) {
  ChainAnalysis out;
  out.pi = stationary_distribution(P, opts.stationary_tol);
  out.pi_min = out.pi.min_mass();
  out.spectral = spectral_gaps(P, out.pi);
  const PseudoGapResult ps = pseudo_spectral_gap(P, out.pi, opts.k_max);
  out.gamma_ps = ps.gamma_ps;
  out.k_star = ps.k_star;

  long wanted = opts.t_max.value_or(
      out.gamma_ps > 0.0 ? 10L * static_cast<long>(std::ceil(1.0 / out.gamma_ps))
                         : 10L * P.n_states());
  int horizon = static_cast<int>(std::clamp(wanted, 1L, opts.horizon_cap));
  out.profile = tv_decay_profile(P, out.pi, horizon);

  if (!opts.t_max.has_value()) {
    // Grow the horizon until the smallest grid eps is resolved, stopping early
    // if the profile plateaus (periodic or otherwise non-contracting chains).
    while (out.profile.d.back() > opts.eps_min && horizon < opts.horizon_cap) {
      const double before = out.profile.d[static_cast<std::size_t>(horizon / 2)];
      if (out.profile.d.back() >= before - 1e-14 && horizon >= 2) break;
      horizon *= 2;
      out.profile = tv_decay_profile(P, out.pi, horizon);
    }
  }

  try {
    out.t_mix_quarter = mixing_time(out.profile, 0.25);
  } catch (const NotMixedWithinHorizon&) {
    out.t_mix_quarter.reset();
  }
  try {
    out.tau_min = tau_min_single(out.profile);
    // A later step can only beat the current minimum while t < tau_min / 4;
    // make sure the horizon certifies the reported value.
    if (!opts.t_max.has_value()) {
      while (out.profile.t_max < *out.tau_min / 4.0 &&
             out.profile.t_max < opts.horizon_cap) {
        out.profile = tv_decay_profile(P, out.pi, out.profile.t_max * 2);
        out.tau_min = tau_min_single(out.profile);
      }
    }
  } catch (const NeverMixes&) {
    out.tau_min.reset();
  }
  return out;
}

}  // namespace mixmkl
