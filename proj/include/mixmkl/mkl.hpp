#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixmkl/data.hpp"
#include "mixmkl/error.hpp"
#include "mixmkl/kernels.hpp"
#include "mixmkl/pool.hpp"

namespace mixmkl {

struct TrainOptions {
  int iterations = 500;
  double eta_step = 0.1;
  bool check_psd = true;
};

// Trained classifier in dual form: f(x) = sum_j alpha_j K_eta(x_j, x) with
// alpha' G(eta) alpha <= B^2 and eta on the L_q sphere.
struct MklModel {
  Eigen::VectorXd alpha;
  CombinationWeights eta;
  std::vector<Eigen::VectorXd> train_points;
  KernelFamily family;
  double B = 1.0;
  double delta = 1.0;
  double q = 1.0;
  double final_objective = 0.0;
  std::vector<double> objective_history;  // accepted iterates, non-increasing

  double norm_sq(const std::vector<Eigen::MatrixXd>& grams) const {
    Eigen::MatrixXd G = combine(grams, eta, q);
    return alpha.dot(G * alpha);
  }
};

namespace detail {

inline double hinge_objective(const Eigen::VectorXd& f, const Eigen::VectorXd& y,
                              double delta) {
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i)
    acc += std::max(0.0, 1.0 - y[i] * f[i] / delta);
  return acc / static_cast<double>(f.size());
}

// A few warm-started power-iteration steps; adequate for a step-size scale.
inline double lambda_max_estimate(const Eigen::MatrixXd& G, Eigen::VectorXd& warm,
                                  int steps = 6) {
  if (warm.size() != G.rows()) warm = Eigen::VectorXd::Ones(G.rows());
  double lambda = 1.0;
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXd next = G * warm;
    const double norm = next.norm();
    if (norm <= 0.0) return 1.0;
    lambda = warm.dot(next) / warm.squaredNorm();
    warm = next / norm;
  }
  return std::max(lambda, 1e-12);
}

}  // namespace detail

// Alternating projected subgradient descent on the margin hinge loss:
// (a) subgradient step in alpha followed by radial projection onto the
//     G(eta)-norm ball of radius B,
// (b) weight step in eta (exponentiated gradient on the simplex for q = 1,
//     projected gradient with L_q renormalization for q > 1),
// with a monotone safeguard that rejects steps increasing the loss. The alpha
// step size B*delta/(L*t) keeps the trajectory equivariant under joint
// rescaling of (B, delta).
inline MklModel train(const MixedDataset& ds, const KernelFamily& family, double delta,
                      const TrainOptions& opts = {}) {
  if (delta <= 0.0 || delta > 1.0) throw InvalidMargin("delta must be in (0,1]");
  if (ds.samples.empty()) throw InvalidArgument("empty dataset");
  if (family.base.empty()) throw InvalidArgument("empty kernel family");

  const int n = ds.size();
  const int m = family.size();
  Eigen::VectorXd y(n);
  bool has_pos = false, has_neg = false;
  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& s = ds.samples[static_cast<std::size_t>(i)];
    if (s.label != 1 && s.label != -1)
      throw InvalidArgument("dataset labels must be +1/-1 (run emit_labels first)");
    y[i] = s.label;
    (s.label > 0 ? has_pos : has_neg) = true;
    points.push_back(s.feature);
  }
  if (!has_pos || !has_neg) throw SingleClassData("both labels must be present");

  std::vector<Eigen::MatrixXd> grams;
  grams.reserve(static_cast<std::size_t>(m));
  for (const auto& k : family.base)
    grams.push_back(gram_matrix(k, points, opts.check_psd));

  MklModel model;
  model.train_points = std::move(points);
  model.family = family;
  model.B = family.B;
  model.delta = delta;
  model.q = family.q;
  model.alpha = Eigen::VectorXd::Zero(n);
  model.eta = uniform_weights(m, family.q);

  Eigen::MatrixXd G = combine(grams, model.eta, family.q);
  Eigen::VectorXd warm;  // power-iteration warm start
  double best_obj = detail::hinge_objective(G * model.alpha, y, delta);
  model.objective_history.push_back(best_obj);

  const double inv_ndelta = 1.0 / (static_cast<double>(n) * delta);
  for (int t = 1; t <= opts.iterations; ++t) {
    const double L = detail::lambda_max_estimate(G, warm);

    // (a) alpha step + projection in the current metric
    Eigen::VectorXd f = G * model.alpha;
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
      if (y[i] * f[i] < delta) weighted[i] = y[i];
    Eigen::VectorXd grad_alpha = -inv_ndelta * (G * weighted);
    const double step = model.B * delta / (L * static_cast<double>(t));
    Eigen::VectorXd alpha_next = model.alpha - step * grad_alpha;
    double norm_sq = alpha_next.dot(G * alpha_next);
    if (norm_sq > model.B * model.B)
      alpha_next *= model.B / std::sqrt(norm_sq);

    // (b) eta step
    CombinationWeights eta_next = model.eta;
    Eigen::MatrixXd G_next = G;
    if (m > 1) {
      Eigen::VectorXd margin_mask = Eigen::VectorXd::Zero(n);
      Eigen::VectorXd f_alpha = G * alpha_next;
      for (int i = 0; i < n; ++i)
        if (y[i] * f_alpha[i] < delta) margin_mask[i] = y[i];
      Eigen::VectorXd grad_eta(m);
      for (int i = 0; i < m; ++i)
        grad_eta[i] =
            -inv_ndelta * margin_mask.dot(grams[static_cast<std::size_t>(i)] * alpha_next);
      if (family.q == 1.0) {
        for (int i = 0; i < m; ++i)
          eta_next.eta[i] *= std::exp(-opts.eta_step * grad_eta[i]);
        eta_next.eta /= eta_next.eta.sum();
      } else {
        eta_next.eta -= opts.eta_step * grad_eta;
        normalize_weights(eta_next.eta, family.q);
      }
      G_next = combine(grams, eta_next, family.q);
      // Re-project in the updated metric so feasibility survives the eta step.
      norm_sq = alpha_next.dot(G_next * alpha_next);
      if (norm_sq > model.B * model.B)
        alpha_next *= model.B / std::sqrt(norm_sq);
    }

    const double obj = detail::hinge_objective(G_next * alpha_next, y, delta);
    if (obj <= best_obj) {
      model.alpha = std::move(alpha_next);
      model.eta = std::move(eta_next);
      G = std::move(G_next);
      best_obj = obj;
    }
    model.objective_history.push_back(best_obj);
  }
  model.final_objective = best_obj;
  return model;
}

inline double predict(const MklModel& model, const Eigen::VectorXd& x) {
  if (!model.train_points.empty() &&
      model.train_points.front().size() != x.size())
    throw DimensionMismatch("feature dimension mismatch in predict");
  double acc = 0.0;
  for (std::size_t j = 0; j < model.train_points.size(); ++j)
    acc += model.alpha[static_cast<Eigen::Index>(j)] *
           combined_eval(model.family, model.eta, model.train_points[j], x);
  return acc;
}

// Fraction of samples with y f(x) < delta (ties at delta are not violations).
inline double empirical_margin_error(const MklModel& model, const MixedDataset& ds,
                                     double delta) {
  if (delta <= 0.0 || delta > 1.0) throw InvalidMargin("delta must be in (0,1]");
  if (ds.samples.empty()) throw InvalidArgument("empty dataset");
  int violations = 0;
  for (const auto& s : ds.samples) {
    if (s.label != 1 && s.label != -1)
      throw InvalidArgument("dataset labels must be +1/-1");
    if (s.label * predict(model, s.feature) < delta) ++violations;
  }
  return static_cast<double>(violations) / static_cast<double>(ds.size());
}

// Exact population error sum_P mu_P sum_x pi_P(x) sum_y P(y|x) 1{y f(x) <= 0};
// no sampling, every state and label enumerated.
inline double true_error_exact(const MklModel& model, const ChainPool& pool) {
  validate_pool(pool);
  double total = 0.0;
  for (const auto& wc : pool.chains) {
    if (!wc.chain.emission)
      throw MissingEmissionTable("true error needs per-state emission tables");
    const Emission& em = *wc.chain.emission;
    const Distribution pi = stationary_distribution(wc.chain.transition);
    double chain_err = 0.0;
    for (int x = 0; x < wc.chain.n_states(); ++x) {
      const double fx = predict(model, wc.chain.feature(x));
      const int s = em.sign(x);
      const double flip = em.flip[x];
      double err = 0.0;
      if (s * fx <= 0.0) err += 1.0 - flip;   // clean label misclassified
      if (-s * fx <= 0.0) err += flip;        // flipped label misclassified
      chain_err += pi.probs[x] * err;
    }
    total += wc.weight * chain_err;
  }
  return total;
}

inline double estimation_error(const MklModel& model, const MixedDataset& ds,
                               const ChainPool& pool, double delta) {
  return true_error_exact(model, pool) - empirical_margin_error(model, ds, delta);
}

}  // namespace mixmkl
