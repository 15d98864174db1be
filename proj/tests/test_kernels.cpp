#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_support.hpp"

using namespace mixmkl;
using namespace testsupport;

namespace {

std::vector<Eigen::VectorXd> random_points(int n, int dim, std::uint64_t seed) {
  CounterRng rng(seed, {0x9053ULL});
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p(dim);
    for (int d = 0; d < dim; ++d) p[d] = 2.0 * rng.next_unit() - 1.0;
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST_CASE("gram matrix basics") {
  const std::vector<Eigen::VectorXd> basis = {Eigen::Vector2d(1, 0).eval(),
                                              Eigen::Vector2d(0, 1).eval()};
  const Eigen::MatrixXd lin = gram_matrix(KernelSpec::linear(), basis);
  REQUIRE((lin - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  // Gaussian diagonal is exactly one; sigma = 1 at distance 1 gives e^{-1}.
  const std::vector<Eigen::VectorXd> line = {Eigen::VectorXd::Zero(1),
                                             Eigen::VectorXd::Ones(1)};
  const Eigen::MatrixXd g = gram_matrix(KernelSpec::gaussian(1.0), line);
  REQUIRE(g(0, 0) == 1.0);
  REQUIRE(g(1, 1) == 1.0);
  REQUIRE(g(0, 1) == Catch::Approx(std::exp(-1.0)).margin(1e-15));

  std::vector<Eigen::VectorXd> ragged = {Eigen::Vector2d(1, 0).eval(),
                                         Eigen::VectorXd::Ones(3)};
  REQUIRE_THROWS_AS(gram_matrix(KernelSpec::linear(), ragged), DimensionMismatch);
}

TEST_CASE("gram matrices are symmetric PSD") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto pts = random_points(25, 3, seed);
    for (const KernelSpec& k :
         {KernelSpec::linear(), KernelSpec::gaussian(0.7),
          KernelSpec::polynomial(3, 1.0)}) {
      const Eigen::MatrixXd G = gram_matrix(k, pts);
      REQUIRE((G - G.transpose()).cwiseAbs().maxCoeff() == 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
      REQUIRE(es.eigenvalues().minCoeff() >= -1e-8);
    }
  }
}

TEST_CASE("combine basics") {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
  REQUIRE((combine({I}, CombinationWeights{Eigen::VectorXd::Ones(1)}, 1.0) - I)
              .cwiseAbs()
              .maxCoeff() == 0.0);

  Eigen::VectorXd vertex(3);
  vertex << 1.0, 0.0, 0.0;
  REQUIRE((combine({I, 2 * I, 3 * I}, CombinationWeights{vertex}, 2.0) - I)
              .cwiseAbs()
              .maxCoeff() == 0.0);

  Eigen::VectorXd half = Eigen::VectorXd::Constant(2, 0.5);
  REQUIRE((combine({I, I}, CombinationWeights{half}, 1.0) - I).cwiseAbs().maxCoeff() ==
          0.0);

  Eigen::VectorXd bad = Eigen::VectorXd::Constant(2, 0.9);
  REQUIRE_THROWS_AS(combine({I, I}, CombinationWeights{bad}, 1.0), InvalidWeights);
  REQUIRE_THROWS_AS(combine({I, Eigen::MatrixXd::Identity(2, 2)},
                            CombinationWeights{half}, 1.0),
                    SizeMismatch);
}

TEST_CASE("gram of the combined kernel equals the combined grams exactly") {
  const auto pts = random_points(15, 2, 4);
  KernelFamily fam = gaussian_family({0.5, 1.0, 2.0});
  fam.base.push_back(KernelSpec::polynomial(2, 0.5));
  const CombinationWeights w = uniform_weights(4, 1.0);

  std::vector<Eigen::MatrixXd> grams;
  for (const auto& k : fam.base) grams.push_back(gram_matrix(k, pts));
  const Eigen::MatrixXd combined = combine(grams, w, 1.0);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      REQUIRE(combined(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
              combined_eval(fam, w, pts[i], pts[j]));  // bitwise
}

TEST_CASE("combine is monotone in the weights (PSD order)") {
  const auto pts = random_points(12, 2, 5);
  KernelFamily fam = gaussian_family({0.5, 1.5});
  std::vector<Eigen::MatrixXd> grams;
  for (const auto& k : fam.base) grams.push_back(gram_matrix(k, pts));
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.3, 0.2;
  hi << 0.5, 0.5;
  // Raw combinations (weights need not be normalized for the order check).
  const Eigen::MatrixXd diff =
      (hi[0] - lo[0]) * grams[0] + (hi[1] - lo[1]) * grams[1];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff, Eigen::EigenvaluesOnly);
  REQUIRE(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("kappa over families") {
  REQUIRE(kappa(gaussian_family({0.5, 1.0})) == 1.0);

  KernelFamily lin;
  lin.base.push_back(KernelSpec::linear());
  REQUIRE(kappa(lin, 2.0) == 2.0);
  REQUIRE_THROWS_AS(kappa(lin), UnboundedKernel);

  KernelFamily mixed = gaussian_family({1.0});
  mixed.base.push_back(KernelSpec::linear());
  REQUIRE(kappa(mixed, 3.0) == 3.0);

  KernelFamily poly;
  poly.base.push_back(KernelSpec::polynomial(2, 1.0));
  REQUIRE(kappa(poly, 2.0) == Catch::Approx(5.0).margin(1e-12));  // (4+1)^{2/2}
}

TEST_CASE("pseudo-dimension registry") {
  REQUIRE(pseudo_dimension_bound(gaussian_family({0.5, 1.0, 2.0}), 3) == 6);
  REQUIRE(pseudo_dimension_bound(gaussian_family({1.0}), 1) == 1);
  KernelFamily lin;
  lin.base.push_back(KernelSpec::linear());
  REQUIRE_THROWS_AS(pseudo_dimension_bound(lin, 3), UnknownFamily);
}

TEST_CASE("weight validation") {
  REQUIRE_NOTHROW(validate_weights(uniform_weights(4, 1.0), 1.0));
  REQUIRE_NOTHROW(validate_weights(uniform_weights(4, 2.0), 2.0));
  Eigen::VectorXd neg(2);
  neg << 1.5, -0.5;
  REQUIRE_THROWS_AS(validate_weights(CombinationWeights{neg}, 1.0), InvalidWeights);
}
