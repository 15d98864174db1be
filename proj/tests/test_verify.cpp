#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"

using namespace mixmkl;
using namespace testsupport;

namespace {

ExperimentConfig tail_config(const ChainPool& pool, long trials, int n) {
  ExperimentConfig cfg;
  cfg.trials = trials;
  cfg.n = n;
  cfg.seed = 42;
  cfg.grid = {0.02, 0.05, 0.1, 0.2};
  cfg.g = sign_split_function(pool.n_states());
  return cfg;
}

}  // namespace

TEST_CASE("mcdiarmid tail on an independent-like chain") {
  // Rows equal to pi make the samples independent, so tau_min = 4.
  Eigen::MatrixXd iid(2, 2);
  iid << 0.5, 0.5, 0.5, 0.5;
  const ChainPool pool = single_chain_pool(validate_chain(iid));
  ExperimentConfig cfg = tail_config(pool, 2000, 100);
  const TailReport report = verify_mcdiarmid(pool, cfg);
  REQUIRE(report.tau_min == Catch::Approx(4.0).margin(1e-12));
  REQUIRE(report.sanity_ok);
  REQUIRE(report.all_pass);
  for (std::size_t i = 0; i < report.grid.size(); ++i) {
    REQUIRE(report.empirical[i] >= 0.0);
    REQUIRE(report.empirical[i] <= 1.0);
    REQUIRE(report.pass[i] ==
            (report.empirical[i] <= report.bound[i] + 3.0 * report.stderr_[i]));
  }
}

TEST_CASE("mcdiarmid bound is vacuous at t = 0") {
  const ChainPool pool = desk_pool();
  ExperimentConfig cfg = tail_config(pool, 200, 50);
  cfg.grid = {0.0};
  const TailReport report = verify_mcdiarmid(pool, cfg);
  REQUIRE(report.bound[0] == 2.0);
  REQUIRE(report.empirical[0] <= 1.0);
  REQUIRE(report.all_pass);
}

TEST_CASE("mcdiarmid config validation") {
  const ChainPool pool = desk_pool();
  ExperimentConfig cfg = tail_config(pool, 50, 100);  // too few trials
  REQUIRE_THROWS_AS(verify_mcdiarmid(pool, cfg), ConfigError);
  cfg = tail_config(pool, 200, 100);
  cfg.grid.clear();
  REQUIRE_THROWS_AS(verify_mcdiarmid(pool, cfg), ConfigError);
  cfg = tail_config(pool, 200, 100);
  cfg.g = Eigen::VectorXd::Ones(5);  // wrong arity
  REQUIRE_THROWS_AS(verify_mcdiarmid(pool, cfg), ConfigError);
}

TEST_CASE("bernstein tail basics") {
  const ChainPool pool = single_chain_pool(two_state_chain(0.25));
  ExperimentConfig cfg = tail_config(pool, 2000, 200);
  cfg.grid = {0.0, 0.05, 0.2, 0.5};
  const TailReport report = verify_bernstein(pool, cfg);
  REQUIRE(report.gamma_aps == Catch::Approx(0.75).margin(1e-10));
  REQUIRE(report.eta == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(report.v_f == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(report.center == Catch::Approx(0.0).margin(1e-12));
  // u = 0 gives the vacuous bound 2 eta >= 1.
  REQUIRE(report.bound[0] == Catch::Approx(2.0 * report.eta).margin(1e-12));
  REQUIRE(report.all_pass);
}

TEST_CASE("bernstein tail of a constant function is zero") {
  const ChainPool pool = single_chain_pool(two_state_chain(0.25));
  ExperimentConfig cfg = tail_config(pool, 500, 100);
  cfg.g = Eigen::VectorXd::Constant(2, 0.7);
  cfg.grid = {0.01, 0.1};
  const TailReport report = verify_bernstein(pool, cfg);
  REQUIRE(report.v_f == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(report.empirical[0] == 0.0);
  REQUIRE(report.empirical[1] == 0.0);
  REQUIRE(report.all_pass);
}

TEST_CASE("symmetrization trivial classes") {
  const ChainPool pool = desk_pool();
  ExperimentConfig cfg;
  cfg.trials = 300;
  cfg.n = 100;
  cfg.seed = 1;

  // The zero function: lhs is exactly 0 <= A_n.
  cfg.function_class = {Eigen::VectorXd::Zero(2)};
  SymmetrizationReport zero = verify_symmetrization(pool, cfg);
  REQUIRE(zero.lhs == 0.0);
  REQUIRE(zero.pass);

  // A constant class cancels on the left but not on the right.
  cfg.function_class = {Eigen::VectorXd::Constant(2, 1.0)};
  SymmetrizationReport constant = verify_symmetrization(pool, cfg);
  REQUIRE(constant.lhs == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(constant.pn0 > 0.0);
  REQUIRE(constant.pass);
}

TEST_CASE("symmetrization holds for random sign tables") {
  const ChainPool pool = random_pool(4, 2, 17);
  ExperimentConfig cfg;
  cfg.trials = 1500;
  cfg.n = 150;
  cfg.seed = 3;
  cfg.function_class = random_sign_tables(20, 4, 99);
  const SymmetrizationReport report = verify_symmetrization(pool, cfg);
  REQUIRE(report.m_bound == 1.0);
  REQUIRE(report.pass);
  REQUIRE(report.lhs <= report.rhs + 3.0 * report.combined_stderr);
}

TEST_CASE("generalization coverage with the zero model is total") {
  const ChainPool pool = desk_pool(0.1);
  ExperimentConfig cfg;
  cfg.runs = 25;
  cfg.n = 60;
  cfg.seed = 5;
  cfg.delta = 0.5;
  cfg.alpha = 0.05;
  cfg.family = gaussian_family({0.5, 1.0}, 1.0, 1.0);
  cfg.force_zero_model = true;
  const GeneralizationReport report = verify_generalization(pool, cfg);
  REQUIRE(report.coverage == 1.0);  // estimation error is exactly 0 <= bound
  REQUIRE(report.pass);
  REQUIRE(report.bound > 0.0);
}

TEST_CASE("generalization coverage with trained models") {
  const ChainPool pool = desk_pool(0.1);
  ExperimentConfig cfg;
  cfg.runs = 12;
  cfg.n = 80;
  cfg.seed = 6;
  cfg.delta = 0.5;
  cfg.alpha = 0.05;
  cfg.family = gaussian_family({0.5, 1.0}, 1.0, 1.0);
  cfg.train.iterations = 60;
  const GeneralizationReport report = verify_generalization(pool, cfg);
  REQUIRE(report.pass);
  for (double s : report.slack) REQUIRE(s >= 0.0);
}

TEST_CASE("spectral relations on the desk chain") {
  const ChainPool pool = single_chain_pool(two_state_chain(0.25));
  const SpectralRelationsReport report = verify_spectral_relations(pool);
  REQUIRE(report.all_pass);
  // Frozen two-state margins: gap sandwich 0.693 <= 1 <= 4.159 and the
  // pseudo-gap floor 0.667 <= 1.
  bool saw_lower = false, saw_upper = false, saw_ps = false, saw_pool = false;
  for (const auto& c : report.checks) {
    if (c.name == "chain0.gap_lower") {
      REQUIRE(c.lhs == Catch::Approx(std::log(2.0)).margin(1e-10));
      REQUIRE(c.rhs == 1.0);
      saw_lower = true;
    }
    if (c.name == "chain0.gap_upper") {
      REQUIRE(c.rhs == Catch::Approx(std::log(8.0) / 0.5).margin(1e-9));
      saw_upper = true;
    }
    if (c.name == "chain0.pseudo_lower") {
      REQUIRE(c.lhs == Catch::Approx(1.0 / 1.5).margin(1e-10));
      saw_ps = true;
    }
    if (c.name == "pool.aggregated_gap_quarter") {
      REQUIRE(c.lhs == Catch::Approx(0.5).margin(1e-12));
      REQUIRE(c.rhs == Catch::Approx(0.75).margin(1e-10));
      saw_pool = true;
    }
  }
  REQUIRE(saw_lower);
  REQUIRE(saw_upper);
  REQUIRE(saw_ps);
  REQUIRE(saw_pool);
}

TEST_CASE("spectral relations on random pools") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ChainPool pool = random_pool(3 + seed % 4, 2 + seed % 2, seed);
    REQUIRE(verify_spectral_relations(pool).all_pass);
  }
}

TEST_CASE("tail reports are reproducible") {
  const ChainPool pool = desk_pool();
  ExperimentConfig cfg = tail_config(pool, 300, 80);
  const json a = to_json(verify_mcdiarmid(pool, cfg));
  const json b = to_json(verify_mcdiarmid(pool, cfg));
  REQUIRE(a.dump() == b.dump());
  const json c = to_json(verify_bernstein(pool, cfg));
  const json d = to_json(verify_bernstein(pool, cfg));
  REQUIRE(c.dump() == d.dump());
}
