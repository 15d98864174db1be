#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mixmkl/bounds.hpp"
#include "mixmkl/data.hpp"
#include "mixmkl/error.hpp"
#include "mixmkl/mkl.hpp"
#include "mixmkl/parallel.hpp"
#include "mixmkl/pool.hpp"
#include "mixmkl/rng.hpp"

namespace mixmkl {

// One configuration blob for all verification experiments; each operation
// validates the members it consumes.
struct ExperimentConfig {
  long trials = 100000;
  std::uint64_t seed = 0;
  int n = 200;
  std::optional<AssignMode> mode;          // per-op default when unset
  std::vector<double> grid;                // deviation grid (t or u)
  Eigen::VectorXd g;                       // state function for tail checks
  std::vector<Eigen::VectorXd> function_class;  // symmetrization class
  // generalization coverage:
  KernelFamily family;
  double delta = 0.5;
  double alpha = 0.05;
  int runs = 200;
  TrainOptions train;
  bool force_zero_model = false;
};

struct TailReport {
  std::string kind;
  std::vector<double> grid;
  std::vector<double> empirical;
  std::vector<double> stderr_;
  std::vector<double> bound;
  std::vector<bool> pass;  // empirical <= bound + 3 stderr
  bool all_pass = false;
  bool sanity_ok = true;   // pilot-vs-main mean agreement (tail checks only)
  long trials = 0;
  double center = 0.0;     // reference mean the deviations are measured from
  std::uint64_t seed = 0;
  // constants the bound was evaluated with
  double tau_min = 0.0;
  double gamma_aps = 0.0;
  double eta = 0.0;
  double v_f = 0.0;
  double c_coord = 0.0;
  double m_bound = 0.0;
};

namespace detail {

inline void check_tail_config(const ChainPool& pool, const ExperimentConfig& cfg) {
  if (cfg.trials < 100) throw ConfigError("trials must be >= 100");
  if (cfg.grid.empty()) throw ConfigError("grid must not be empty");
  if (cfg.n < 1) throw ConfigError("n must be >= 1");
  if (cfg.g.size() != pool.n_states())
    throw ConfigError("state function size must match the state count");
}

// Mean of g over one simulated mixed sequence.
inline double sequence_mean(const ChainPool& pool, const Eigen::VectorXd& g, int n,
                            std::uint64_t trial_seed, AssignMode mode) {
  const StateSequence seq = simulate_states(pool, n, trial_seed, mode);
  double acc = 0.0;
  for (int s : seq.states) acc += g[s];
  return acc / static_cast<double>(n);
}

struct MeanStats {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanStats mean_stats(const std::vector<double>& values) {
  MeanStats out;
  const double count = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= count;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.se = values.size() > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
  return out;
}

inline void fill_tail(TailReport& report, const std::vector<double>& deviations,
                      const std::vector<double>& bounds) {
  const double trials = static_cast<double>(deviations.size());
  for (std::size_t gi = 0; gi < report.grid.size(); ++gi) {
    long hits = 0;
    for (double dev : deviations)
      if (dev >= report.grid[gi]) ++hits;
    const double p = static_cast<double>(hits) / trials;
    const double se = std::sqrt(p * (1.0 - p) / trials);
    report.empirical.push_back(p);
    report.stderr_.push_back(se);
    report.bound.push_back(bounds[gi]);
    report.pass.push_back(p <= bounds[gi] + 3.0 * se);
  }
  report.all_pass = report.sanity_ok;
  for (bool p : report.pass) report.all_pass = report.all_pass && p;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Bounded-difference tail ("mixed McDiarmid")
// ---------------------------------------------------------------------------

// Simulates f(X) = (1/n) sum_i g(X_i) on mixed sequences and compares the
// empirical deviation tail around a pilot-estimated mean against
// 2 exp(-2 t^2 / (c^2 n tau_min)) with c = range(g)/n per coordinate.
inline TailReport verify_mcdiarmid(const ChainPool& pool, const ExperimentConfig& cfg) {
  detail::check_tail_config(pool, cfg);
  const AssignMode mode = cfg.mode.value_or(AssignMode::proportional);
  const PoolSummary summary = pool_summary(pool);

  TailReport report;
  report.kind = "mcdiarmid";
  report.grid = cfg.grid;
  report.trials = cfg.trials;
  report.seed = cfg.seed;
  report.tau_min = summary.tau_min;
  report.c_coord = (cfg.g.maxCoeff() - cfg.g.minCoeff()) / cfg.n;

  // The population mean of f is unknown off-stationarity; a 10x pilot run
  // estimates it before the tail is measured.
  const long pilot_trials = 10 * cfg.trials;
  std::vector<double> pilot(static_cast<std::size_t>(pilot_trials));
  const std::uint64_t pilot_key = derive_key(cfg.seed, {kTagPilot});
  parallel_for(pilot.size(), [&](std::size_t t) {
    pilot[t] = detail::sequence_mean(pool, cfg.g, cfg.n, fold(pilot_key, t), mode);
  });
  const detail::MeanStats pilot_stats = detail::mean_stats(pilot);
  report.center = pilot_stats.mean;

  std::vector<double> main(static_cast<std::size_t>(cfg.trials));
  const std::uint64_t main_key = derive_key(cfg.seed, {kTagTrial});
  parallel_for(main.size(), [&](std::size_t t) {
    main[t] = detail::sequence_mean(pool, cfg.g, cfg.n, fold(main_key, t), mode);
  });
  const detail::MeanStats main_stats = detail::mean_stats(main);
  report.sanity_ok =
      std::abs(main_stats.mean - pilot_stats.mean) <=
      4.0 * std::sqrt(pilot_stats.se * pilot_stats.se + main_stats.se * main_stats.se);

  std::vector<double> deviations(main.size());
  for (std::size_t i = 0; i < main.size(); ++i)
    deviations[i] = std::abs(main[i] - report.center);

  const double c2n = report.c_coord * report.c_coord * cfg.n;
  std::vector<double> bounds;
  for (double t : cfg.grid)
    bounds.push_back(2.0 * std::exp(-2.0 * t * t / (c2n * summary.tau_min)));
  detail::fill_tail(report, deviations, bounds);
  return report;
}

// ---------------------------------------------------------------------------
// Variance-sensitive tail (aggregated-gap Bernstein)
// ---------------------------------------------------------------------------

// Compares the deviation of S/n from the exact weighted stationary mean
// against 2 eta exp(-n u^2 g_aps / (8 |P| V_f (1 + 1/g_aps) + 20 u M)), with
// V_f, g_aps and eta computed from the pool, and the sup-norm constant M
// standing in for the otherwise unspecified constant in the denominator.
inline TailReport verify_bernstein(const ChainPool& pool, const ExperimentConfig& cfg) {
  detail::check_tail_config(pool, cfg);
  const AssignMode mode = cfg.mode.value_or(AssignMode::probabilistic);
  const PoolSummary summary = pool_summary(pool);

  TailReport report;
  report.kind = "bernstein";
  report.grid = cfg.grid;
  report.trials = cfg.trials;
  report.seed = cfg.seed;
  report.gamma_aps = summary.gamma_aps;
  report.eta = summary.eta;
  report.m_bound = cfg.g.cwiseAbs().maxCoeff();

  double center = 0.0;
  double v_f = 0.0;
  for (int c = 0; c < pool.size(); ++c) {
    const Distribution& pi = summary.per_chain[static_cast<std::size_t>(c)].pi;
    const double mean = pi.probs.dot(cfg.g);
    const double second = pi.probs.dot(cfg.g.cwiseProduct(cfg.g));
    center += pool.chains[static_cast<std::size_t>(c)].weight * mean;
    v_f = std::max(v_f, second - mean * mean);
  }
  report.center = center;
  report.v_f = v_f;

  std::vector<double> deviations(static_cast<std::size_t>(cfg.trials));
  const std::uint64_t main_key = derive_key(cfg.seed, {kTagTrial});
  parallel_for(deviations.size(), [&](std::size_t t) {
    deviations[t] = std::abs(
        detail::sequence_mean(pool, cfg.g, cfg.n, fold(main_key, t), mode) - center);
  });

  const double g_aps = summary.gamma_aps;
  const double chains = pool.size();
  std::vector<double> bounds;
  for (double u : cfg.grid) {
    const double denom =
        8.0 * chains * v_f * (1.0 + 1.0 / g_aps) + 20.0 * u * report.m_bound;
    bounds.push_back(2.0 * summary.eta * std::exp(-cfg.n * u * u * g_aps / denom));
  }
  detail::fill_tail(report, deviations, bounds);
  return report;
}

// ---------------------------------------------------------------------------
// Symmetrization
// ---------------------------------------------------------------------------

struct SymmetrizationReport {
  double lhs = 0.0;         // estimated E sup_f |P_n f - P f|
  double lhs_stderr = 0.0;
  double pn0 = 0.0;         // estimated E sup_f |n^{-1} sum eps_i f(X_i)|
  double pn0_stderr = 0.0;
  double a_n = 0.0;
  double rhs = 0.0;         // 2 pn0 + a_n
  double combined_stderr = 0.0;
  bool pass = false;
  long trials = 0;
  std::uint64_t seed = 0;
  double m_bound = 0.0;
};

inline SymmetrizationReport verify_symmetrization(const ChainPool& pool,
                                                  const ExperimentConfig& cfg) {
  if (cfg.trials < 100) throw ConfigError("trials must be >= 100");
  if (cfg.function_class.empty()) throw ConfigError("function class must not be empty");
  for (const auto& f : cfg.function_class)
    if (f.size() != pool.n_states())
      throw ConfigError("function table size must match the state count");
  const AssignMode mode = cfg.mode.value_or(AssignMode::proportional);

  SymmetrizationReport report;
  report.trials = cfg.trials;
  report.seed = cfg.seed;
  double m_bound = 0.0;
  for (const auto& f : cfg.function_class)
    m_bound = std::max(m_bound, f.cwiseAbs().maxCoeff());
  if (m_bound == 0.0) m_bound = 1.0;  // any positive sup-norm bound is valid
  report.m_bound = m_bound;
  report.a_n = symmetrization_offset(pool, cfg.n, m_bound).a_n;

  // Exact population means P f = sum_P mu_P <pi_P, f>.
  std::vector<double> population;
  {
    std::vector<Distribution> pis;
    for (const auto& wc : pool.chains)
      pis.push_back(stationary_distribution(wc.chain.transition));
    for (const auto& f : cfg.function_class) {
      double acc = 0.0;
      for (int c = 0; c < pool.size(); ++c)
        acc += pool.chains[static_cast<std::size_t>(c)].weight *
               pis[static_cast<std::size_t>(c)].probs.dot(f);
      population.push_back(acc);
    }
  }

  const int states = pool.n_states();
  auto histogram = [&](const StateSequence& seq) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(states);
    for (int s : seq.states) h[s] += 1.0;
    return h;
  };

  // Independent trial sets for the two expectations.
  std::vector<double> lhs_values(static_cast<std::size_t>(cfg.trials));
  const std::uint64_t lhs_key = derive_key(cfg.seed, {kTagTrial, 0x6c6873ULL});
  parallel_for(lhs_values.size(), [&](std::size_t t) {
    const StateSequence seq = simulate_states(pool, cfg.n, fold(lhs_key, t), mode);
    const Eigen::VectorXd h = histogram(seq) / static_cast<double>(cfg.n);
    double sup = 0.0;
    for (std::size_t fi = 0; fi < cfg.function_class.size(); ++fi)
      sup = std::max(sup, std::abs(h.dot(cfg.function_class[fi]) - population[fi]));
    lhs_values[t] = sup;
  });

  std::vector<double> pn0_values(static_cast<std::size_t>(cfg.trials));
  const std::uint64_t rhs_key = derive_key(cfg.seed, {kTagTrial, 0x726873ULL});
  parallel_for(pn0_values.size(), [&](std::size_t t) {
    const std::uint64_t trial_seed = fold(rhs_key, t);
    const StateSequence seq = simulate_states(pool, cfg.n, trial_seed, mode);
    CounterRng eps_rng(fold(trial_seed, kTagEps));
    Eigen::VectorXd signed_hist = Eigen::VectorXd::Zero(states);
    for (int s : seq.states) signed_hist[s] += eps_rng.next_sign();
    signed_hist /= static_cast<double>(cfg.n);
    double sup = 0.0;
    for (const auto& f : cfg.function_class)
      sup = std::max(sup, std::abs(signed_hist.dot(f)));
    pn0_values[t] = sup;
  });

  const detail::MeanStats lhs_stats = detail::mean_stats(lhs_values);
  const detail::MeanStats pn0_stats = detail::mean_stats(pn0_values);
  report.lhs = lhs_stats.mean;
  report.lhs_stderr = lhs_stats.se;
  report.pn0 = pn0_stats.mean;
  report.pn0_stderr = pn0_stats.se;
  report.rhs = 2.0 * pn0_stats.mean + report.a_n;
  report.combined_stderr =
      std::sqrt(lhs_stats.se * lhs_stats.se + 4.0 * pn0_stats.se * pn0_stats.se);
  report.pass = report.lhs <= report.rhs + 3.0 * report.combined_stderr;
  return report;
}

// ---------------------------------------------------------------------------
// Generalization coverage
// ---------------------------------------------------------------------------

struct GeneralizationReport {
  int runs = 0;
  double coverage = 0.0;   // fraction of runs with estimation error <= bound
  double threshold = 0.0;  // 1 - alpha - 3 binomial stderr
  bool pass = false;
  double bound = 0.0;
  double tau_min = 0.0;
  double b_n = 0.0;
  double kappa_value = 0.0;
  std::vector<double> slack;  // bound - estimation error, per run
  std::uint64_t seed = 0;
};

inline GeneralizationReport verify_generalization(const ChainPool& pool,
                                                  const ExperimentConfig& cfg) {
  if (cfg.runs < 1) throw ConfigError("runs must be >= 1");
  if (cfg.family.base.empty()) throw ConfigError("kernel family required");
  validate_pool(pool);

  GeneralizationReport report;
  report.runs = cfg.runs;
  report.seed = cfg.seed;

  const PoolSummary summary = pool_summary(pool);
  report.tau_min = summary.tau_min;
  report.b_n = symmetrization_offset(pool, cfg.n, 1.0).b_n;

  double domain_norm = 0.0;
  for (const auto& wc : pool.chains)
    for (int s = 0; s < wc.chain.n_states(); ++s)
      domain_norm = std::max(domain_norm, wc.chain.feature(s).norm());
  report.kappa_value = kappa(cfg.family, domain_norm);

  BoundInputs inputs;
  inputs.n = cfg.n;
  inputs.m = cfg.family.size();
  inputs.B = cfg.family.B;
  inputs.kappa = report.kappa_value;
  inputs.delta = cfg.delta;
  inputs.alpha = cfg.alpha;
  inputs.tau_min = summary.tau_min;
  inputs.b_n = report.b_n;
  report.bound = generalization_bound(BoundKind::thm1, inputs).value;

  std::vector<double> errors(static_cast<std::size_t>(cfg.runs));
  const std::uint64_t run_key = derive_key(cfg.seed, {kTagRun});
  parallel_for(errors.size(), [&](std::size_t r) {
    const std::uint64_t run_seed = fold(run_key, r);
    MixedDataset ds = generate_features(pool, cfg.n, run_seed);
    ds = emit_labels(ds, pool, run_seed);
    MklModel model;
    if (cfg.force_zero_model) {
      model.alpha = Eigen::VectorXd::Zero(ds.size());
      model.eta = uniform_weights(cfg.family.size(), cfg.family.q);
      model.family = cfg.family;
      model.B = cfg.family.B;
      model.delta = cfg.delta;
      model.q = cfg.family.q;
      for (const auto& s : ds.samples) model.train_points.push_back(s.feature);
    } else {
      model = train(ds, cfg.family, cfg.delta, cfg.train);
    }
    errors[r] = estimation_error(model, ds, pool, cfg.delta);
  });

  int covered = 0;
  for (double e : errors) {
    report.slack.push_back(report.bound - e);
    if (e <= report.bound) ++covered;
  }
  report.coverage = static_cast<double>(covered) / static_cast<double>(cfg.runs);
  report.threshold =
      1.0 - cfg.alpha -
      3.0 * std::sqrt(cfg.alpha * (1.0 - cfg.alpha) / static_cast<double>(cfg.runs));
  report.pass = report.coverage >= report.threshold;
  return report;
}

// ---------------------------------------------------------------------------
// Spectral relations
// ---------------------------------------------------------------------------

struct RelationCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;  // lhs <= rhs

  static RelationCheck make(std::string name, double lhs, double rhs) {
    RelationCheck c;
    c.name = std::move(name);
    c.lhs = lhs;
    c.rhs = rhs;
    c.pass = lhs <= rhs;
    return c;
  }
};

struct SpectralRelationsReport {
  std::vector<RelationCheck> checks;
  bool all_pass = true;

  void add(RelationCheck c) {
    all_pass = all_pass && c.pass;
    checks.push_back(std::move(c));
  }
};

// Evaluates every gap-vs-mixing-time inequality with exactly computed
// quantities; each check records its margin.
inline SpectralRelationsReport verify_spectral_relations(const ChainPool& pool,
                                                         const PoolOptions& opts = {}) {
  const PoolSummary summary = pool_summary(pool, opts);
  SpectralRelationsReport report;
  const double ln2 = std::log(2.0);

  for (std::size_t c = 0; c < summary.per_chain.size(); ++c) {
    const auto& pc = summary.per_chain[c];
    const std::string id = "chain" + std::to_string(c);
    const double t_mix = pc.t_mix_quarter;
    if (pc.is_reversible) {
      report.add(RelationCheck::make(id + ".gap_lower", (1.0 / pc.gamma_star - 1.0) * ln2,
                                     t_mix));
      report.add(RelationCheck::make(id + ".gap_upper", t_mix,
                                     std::log(4.0 / pc.pi_min) / pc.gamma_star));
      report.add(RelationCheck::make(id + ".gamma_vs_gamma_star", pc.gamma_star,
                                     *pc.gamma_reversible));
    }
    report.add(
        RelationCheck::make(id + ".pseudo_lower", 1.0 / (2.0 * pc.gamma_ps), t_mix));
    report.add(RelationCheck::make(
        id + ".pseudo_upper", t_mix,
        (std::log(1.0 / pc.pi_min) + 2.0 * ln2 + 1.0) / pc.gamma_ps));
  }

  for (std::size_t g = 0; g < summary.eps_grid.size(); ++g) {
    const double eps = summary.eps_grid[g];
    if (eps >= 0.5) continue;
    report.add(RelationCheck::make(
        "pool.aggregated_gap_eps_" + std::to_string(eps),
        (1.0 - 2.0 * eps) / summary.t_amix[g], summary.gamma_aps));
  }
  report.add(RelationCheck::make("pool.aggregated_gap_quarter",
                                 1.0 / (2.0 * summary.t_amix_quarter),
                                 summary.gamma_aps));
  return report;
}

}  // namespace mixmkl
