#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"

using namespace mixmkl;
using namespace testsupport;

namespace {

MixedDataset tiny_separable() {
  MixedDataset ds;
  ds.feature_dim = 1;
  Sample a;
  a.feature = Eigen::VectorXd::Constant(1, -1.0);
  a.label = -1;
  Sample b;
  b.feature = Eigen::VectorXd::Constant(1, 1.0);
  b.label = 1;
  ds.samples = {a, b};
  ds.partitions = {{0, 1}};
  return ds;
}

KernelFamily linear_family(double B) {
  KernelFamily fam;
  fam.base.push_back(KernelSpec::linear());
  fam.B = B;
  fam.q = 1.0;
  return fam;
}

MixedDataset labeled_desk_data(int n, std::uint64_t seed) {
  const ChainPool pool = desk_pool(0.1);
  MixedDataset ds = generate_features(pool, n, seed);
  return emit_labels(ds, pool, seed);
}

}  // namespace

TEST_CASE("separable data trains to zero margin error") {
  const MixedDataset ds = tiny_separable();
  const MklModel model = train(ds, linear_family(10.0), 0.5);
  // Exhaustive check: every training point clears the margin.
  for (const auto& s : ds.samples)
    REQUIRE(s.label * predict(model, s.feature) >= 0.5);
  REQUIRE(empirical_margin_error(model, ds, 0.5) == 0.0);
  REQUIRE(model.final_objective == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("flipping every label mirrors the model") {
  MixedDataset ds = labeled_desk_data(60, 4);
  MixedDataset flipped = ds;
  for (auto& s : flipped.samples) s.label = -s.label;
  const KernelFamily fam = gaussian_family({0.5, 1.0}, 1.0, 1.0);
  const MklModel m = train(ds, fam, 0.5);
  const MklModel mf = train(flipped, fam, 0.5);
  REQUIRE(mf.final_objective == m.final_objective);  // sign symmetry, bitwise
  for (int i = 0; i < m.alpha.size(); ++i) REQUIRE(mf.alpha[i] == -m.alpha[i]);
}

TEST_CASE("single-kernel families keep eta = (1)") {
  const MixedDataset ds = labeled_desk_data(40, 5);
  const MklModel model = train(ds, gaussian_family({1.0}), 0.5);
  REQUIRE(model.eta.eta.size() == 1);
  REQUIRE(model.eta.eta[0] == 1.0);
}

TEST_CASE("training respects the norm ball and decreases the objective") {
  for (double q : {1.0, 2.0}) {
    const MixedDataset ds = labeled_desk_data(80, 6);
    KernelFamily fam = gaussian_family({0.5, 1.0, 2.0}, 1.5, q);
    TrainOptions opts;
    opts.iterations = 120;
    const MklModel model = train(ds, fam, 0.5, opts);

    std::vector<Eigen::VectorXd> pts;
    for (const auto& s : ds.samples) pts.push_back(s.feature);
    std::vector<Eigen::MatrixXd> grams;
    for (const auto& k : fam.base) grams.push_back(gram_matrix(k, pts));
    REQUIRE(model.norm_sq(grams) <= fam.B * fam.B * (1.0 + 1e-6));

    for (std::size_t i = 1; i < model.objective_history.size(); ++i)
      REQUIRE(model.objective_history[i] <= model.objective_history[i - 1]);

    // Weights stay on the L_q sphere.
    REQUIRE_NOTHROW(validate_weights(model.eta, q));

    // sup norm bound B * kappa on the training domain.
    const double bk = fam.B * kappa(fam);
    for (const auto& s : ds.samples)
      REQUIRE(std::abs(predict(model, s.feature)) <= bk + 1e-8);
  }
}

TEST_CASE("margin decisions are invariant under joint (B, delta) scaling") {
  const MixedDataset ds = labeled_desk_data(50, 8);
  KernelFamily fam = gaussian_family({0.5, 1.0}, 0.5, 1.0);
  TrainOptions opts;
  opts.iterations = 100;
  const MklModel m1 = train(ds, fam, 0.25, opts);
  KernelFamily fam2 = fam;
  fam2.B = 1.0;  // doubled
  const MklModel m2 = train(ds, fam2, 0.5, opts);

  // Power-of-two rescaling keeps every fp operation exact, so the accepted
  // objective sequence and the margin decisions agree bit for bit.
  REQUIRE(m1.objective_history == m2.objective_history);
  for (const auto& s : ds.samples) {
    const bool v1 = s.label * predict(m1, s.feature) < 0.25;
    const bool v2 = s.label * predict(m2, s.feature) < 0.5;
    REQUIRE(v1 == v2);
  }
}

TEST_CASE("train input validation") {
  const MixedDataset ds = tiny_separable();
  REQUIRE_THROWS_AS(train(ds, linear_family(1.0), 0.0), InvalidMargin);
  REQUIRE_THROWS_AS(train(ds, linear_family(1.0), 1.5), InvalidMargin);
  MixedDataset one_class = ds;
  one_class.samples[0].label = 1;
  REQUIRE_THROWS_AS(train(one_class, linear_family(1.0), 0.5), SingleClassData);
  MixedDataset unlabeled = ds;
  unlabeled.samples[0].label = 0;
  REQUIRE_THROWS_AS(train(unlabeled, linear_family(1.0), 0.5), InvalidArgument);
}

TEST_CASE("predict dual form") {
  MklModel zero;
  zero.family = linear_family(1.0);
  zero.eta = uniform_weights(1, 1.0);
  zero.train_points = {Eigen::Vector2d(1.0, 2.0).eval()};
  zero.alpha = Eigen::VectorXd::Zero(1);
  REQUIRE(predict(zero, Eigen::Vector2d(3.0, 4.0)) == 0.0);

  MklModel single = zero;
  single.alpha = Eigen::VectorXd::Ones(1);
  REQUIRE(predict(single, Eigen::Vector2d(3.0, 4.0)) ==
          Catch::Approx(11.0).margin(1e-14));
  REQUIRE_THROWS_AS(predict(single, Eigen::VectorXd::Ones(3)), DimensionMismatch);
}

TEST_CASE("empirical margin error counts strict violations") {
  MixedDataset ds = tiny_separable();
  MklModel zero;
  zero.family = linear_family(1.0);
  zero.eta = uniform_weights(1, 1.0);
  zero.train_points = {ds.samples[0].feature, ds.samples[1].feature};
  zero.alpha = Eigen::VectorXd::Zero(2);
  REQUIRE(empirical_margin_error(zero, ds, 0.5) == 1.0);  // 0 < delta everywhere

  // Four points, exactly one violation.
  MixedDataset four;
  four.feature_dim = 1;
  for (int i = 0; i < 4; ++i) {
    Sample s;
    s.feature = Eigen::VectorXd::Constant(1, i < 2 ? -1.0 : 1.0);
    s.label = i == 0 ? 1 : (i < 2 ? -1 : 1);  // sample 0 mislabeled
    four.samples.push_back(s);
  }
  four.partitions = {{0, 1, 2, 3}};
  MklModel unit;
  unit.family = linear_family(2.0);
  unit.eta = uniform_weights(1, 1.0);
  unit.train_points = {Eigen::VectorXd::Constant(1, 1.0)};
  unit.alpha = Eigen::VectorXd::Ones(1);  // f(x) = x
  REQUIRE(empirical_margin_error(unit, four, 0.5) == 0.25);
}

TEST_CASE("exact true error enumeration") {
  // Zero model: y * 0 <= 0 for both labels, every state errs.
  const ChainPool pool = desk_pool(0.1);
  MklModel zero;
  zero.family = gaussian_family({1.0});
  zero.eta = uniform_weights(1, 1.0);
  zero.train_points = {pool.chains[0].chain.feature(0)};
  zero.alpha = Eigen::VectorXd::Zero(1);
  REQUIRE(true_error_exact(zero, pool) == Catch::Approx(1.0).margin(1e-12));

  // Noiseless pool and a sign-matching predictor: zero error.
  ChainPool clean = desk_pool(0.0);
  MklModel matcher;
  matcher.family = linear_family(2.0);
  matcher.eta = uniform_weights(1, 1.0);
  matcher.train_points = {clean.chains[0].chain.feature(0),
                          clean.chains[0].chain.feature(1)};
  matcher.alpha = Eigen::VectorXd(2);
  matcher.alpha << -1.0, 1.0;  // f(e0) = -1, f(e1) = +1
  REQUIRE(true_error_exact(matcher, clean) == Catch::Approx(0.0).margin(1e-12));

  // Fair-coin labels: any predictor nonzero on all states errs half the time.
  const ChainPool coin = desk_pool(0.5);
  REQUIRE(true_error_exact(matcher, coin) == Catch::Approx(0.5).margin(1e-12));

  // Independent enumeration oracle over states and labels.
  double oracle = 0.0;
  for (const auto& wc : coin.chains) {
    const Distribution pi = stationary_distribution(wc.chain.transition);
    for (int x = 0; x < wc.chain.n_states(); ++x) {
      const double fx = predict(matcher, wc.chain.feature(x));
      const int sx = wc.chain.emission->sign(x);
      for (int y : {-1, 1}) {
        const double py =
            y == sx ? 1.0 - wc.chain.emission->flip[x] : wc.chain.emission->flip[x];
        if (y * fx <= 0.0) oracle += wc.weight * pi.probs[x] * py;
      }
    }
  }
  REQUIRE(true_error_exact(matcher, coin) == Catch::Approx(oracle).margin(1e-14));
}

TEST_CASE("estimation error composes the two errors") {
  const ChainPool pool = desk_pool(0.1);
  MixedDataset ds = generate_features(pool, 50, 12);
  ds = emit_labels(ds, pool, 12);
  MklModel zero;
  zero.family = gaussian_family({1.0});
  zero.eta = uniform_weights(1, 1.0);
  zero.train_points = {pool.chains[0].chain.feature(0)};
  zero.alpha = Eigen::VectorXd::Zero(1);
  REQUIRE(estimation_error(zero, ds, pool, 0.5) == Catch::Approx(0.0).margin(1e-12));
}
