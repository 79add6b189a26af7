#include <gtest/gtest.h>

#include <random>

#include "equivoq/prob.hpp"
#include "oracles.hpp"

using namespace equivoq;

namespace {

// Frozen from oracle::binary_entropy (50-digit arithmetic).
constexpr double kH01 = 0.468995593589281;
constexpr double kH02 = 0.721928094887362;

JointPmf random_joint(std::mt19937_64& rng, std::vector<std::size_t> dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  std::gamma_distribution<double> g(0.7, 1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (double& v : p) total += (v = g(rng));
  for (double& v : p) v /= total;
  return JointPmf(std::move(dims), std::move(p));
}

}  // namespace

TEST(Pmf, RejectsBadMass) {
  EXPECT_THROW(Pmf({0.5, 0.6}), ArgumentError);
  EXPECT_THROW(Pmf({-0.1, 1.1}), ArgumentError);
  EXPECT_THROW(Pmf(std::vector<double>{}), ArgumentError);
  EXPECT_NO_THROW(Pmf({0.5, 0.5 + 1e-10}));
}

TEST(Pmf, SmallDeviationIsRenormalized) {
  const Pmf p({0.25, 0.75 + 5e-10});
  EXPECT_NEAR(p[0] + p[1], 1.0, 1e-15);
}

TEST(Entropy, Values) {
  EXPECT_DOUBLE_EQ(entropy(Pmf({0.5, 0.5})), 1.0);
  EXPECT_DOUBLE_EQ(entropy(Pmf({1.0, 0.0})), 0.0);
  EXPECT_NEAR(entropy(Pmf({0.1, 0.9})), kH01, 1e-12);
  EXPECT_NEAR(entropy(Pmf::uniform(8)), 3.0, 1e-12);
}

TEST(ConditionalEntropy, Values) {
  const auto indep = JointPmf::product(Pmf::uniform(2), Pmf::uniform(2));
  EXPECT_NEAR(conditional_entropy(indep, 0, {1}), 1.0, 1e-12);
  const auto copula = JointPmf::from_matrix({{0.5, 0.0}, {0.0, 0.5}});
  EXPECT_NEAR(conditional_entropy(copula, 0, {1}), 0.0, 1e-12);
  const auto bsc = JointPmf::from_matrix({{0.4, 0.1}, {0.1, 0.4}});
  EXPECT_NEAR(conditional_entropy(bsc, 0, {1}), kH02, 1e-12);
  EXPECT_NEAR(conditional_entropy(bsc, 0, {}), 1.0, 1e-12);
}

TEST(MutualInformation, Values) {
  const auto indep = JointPmf::product(Pmf({0.3, 0.7}), Pmf({0.6, 0.4}));
  EXPECT_NEAR(mutual_information(indep, {0}, {1}), 0.0, 1e-12);
  const auto copula = JointPmf::from_matrix({{0.5, 0.0}, {0.0, 0.5}});
  EXPECT_NEAR(mutual_information(copula, {0}, {1}), 1.0, 1e-12);
  const auto bsc = JointPmf::from_matrix({{0.4, 0.1}, {0.1, 0.4}});
  EXPECT_NEAR(mutual_information(bsc, {0}, {1}), 1.0 - kH02, 1e-12);
  EXPECT_GE(mutual_information(indep, {0}, {1}), 0.0);
}

TEST(MutualInformation, RejectsBadAxes) {
  const auto j = JointPmf::from_matrix({{0.4, 0.1}, {0.1, 0.4}});
  EXPECT_THROW(mutual_information(j, {0}, {0}), ArgumentError);
  EXPECT_THROW(mutual_information(j, {}, {1}), ArgumentError);
  EXPECT_THROW(mutual_information(j, {0}, {2}), ArgumentError);
}

TEST(Marginalize, Values) {
  const auto u = JointPmf({2, 2}, {0.25, 0.25, 0.25, 0.25});
  EXPECT_EQ(marginal_pmf(u, 1), Pmf::uniform(2));
  const Pmf p({0.2, 0.8}), q({0.1, 0.3, 0.6});
  const auto pq = JointPmf::product(p, q);
  const Pmf back = marginal_pmf(pq, 1);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(back[i], q[i], 1e-15);
  const auto bsc = JointPmf::from_matrix({{0.4, 0.1}, {0.1, 0.4}});
  const Pmf m = marginal_pmf(bsc, 1);
  EXPECT_NEAR(m[0], 0.5, 1e-15);
  EXPECT_NEAR(m[1], 0.5, 1e-15);
}

TEST(Marginalize, KeepsRequestedAxisOrder) {
  std::mt19937_64 rng(3);
  const auto j = random_joint(rng, {2, 3, 4});
  const auto m = marginalize(j, {2, 0});
  EXPECT_EQ(m.dims(), (std::vector<std::size_t>{4, 2}));
  double direct = 0.0;
  for (std::size_t b = 0; b < 3; ++b) direct += j.at({1, b, 3});
  EXPECT_NEAR(m.at({3, 1}), direct, 1e-15);
}

TEST(Compose, ConstantAuxGivesProduct) {
  const auto j = compose(Pmf({1.0}), Kernel({Pmf({0.3, 0.7})}), Kernel({Pmf({0.6, 0.4})}));
  const auto xy = marginalize(j, {0, 2});
  EXPECT_NEAR(xy.at({0, 1}), 0.3 * 0.4, 1e-15);
  EXPECT_NEAR(mutual_information(j, {0}, {2}), 0.0, 1e-12);
}

TEST(Compose, IdentityCopula) {
  const auto j = compose(Pmf::uniform(2), Kernel::identity(2), Kernel::identity(2));
  EXPECT_NEAR(j.at({0, 0, 0}), 0.5, 1e-15);
  EXPECT_NEAR(j.at({1, 1, 1}), 0.5, 1e-15);
  EXPECT_NEAR(conditional_entropy(j, 0, {2}), 0.0, 1e-12);
}

TEST(Compose, AgreementProbability) {
  const Kernel k({Pmf({0.9, 0.1}), Pmf({0.1, 0.9})});
  const auto xy = marginalize(compose(Pmf::uniform(2), k, k), {0, 2});
  EXPECT_NEAR(xy.at({0, 0}) + xy.at({1, 1}), 0.82, 1e-12);
}

TEST(Compose, RejectsMismatchedKernels) {
  EXPECT_THROW(compose(Pmf::uniform(3), Kernel::identity(2), Kernel::identity(2)), ArgumentError);
}

TEST(Properties, ChainRule) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto j = random_joint(rng, {static_cast<std::size_t>(2 + trial % 3), 3, 2});
    const double lhs = entropy(j);
    const double rhs = entropy(j, {0}) + conditional_entropy(j, 1, {0}) +
                       conditional_entropy(j, 2, {0, 1});
    EXPECT_NEAR(lhs, rhs, 1e-12);
    EXPECT_NEAR(conditional_entropy(j, {1, 2}, {0}),
                conditional_entropy(j, 1, {0}) + conditional_entropy(j, 2, {0, 1}), 1e-12);
  }
}

TEST(Properties, DataProcessing) {
  std::mt19937_64 rng(5);
  std::gamma_distribution<double> g(1.0, 1.0);
  auto row = [&](std::size_t n) {
    std::vector<double> r(n);
    double t = 0;
    for (double& v : r) t += (v = g(rng));
    for (double& v : r) v /= t;
    return Pmf(std::move(r));
  };
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Pmf> ax, ay;
    for (int u = 0; u < 3; ++u) {
      ax.push_back(row(2));
      ay.push_back(row(3));
    }
    const auto j = compose(row(3), Kernel(ax), Kernel(ay));
    const double ixy = mutual_information(j, {0}, {2});
    EXPECT_LE(ixy, mutual_information(j, {0}, {1}) + 1e-12);
    EXPECT_LE(ixy, mutual_information(j, {1}, {2}) + 1e-12);
  }
}

TEST(Properties, EntropyAgreesWithOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto j = random_joint(rng, {3, 4});
    const std::vector<double> flat(j.probs().begin(), j.probs().end());
    EXPECT_NEAR(entropy(j), oracle::entropy(flat), 1e-12);
  }
}

TEST(Json, RoundTripIsExact) {
  std::mt19937_64 rng(2);
  const auto j = random_joint(rng, {2, 3, 2});
  const nlohmann::json doc = j;
  const auto back = nlohmann::json::parse(doc.dump()).get<JointPmf>();
  EXPECT_EQ(back.dims(), j.dims());
  EXPECT_EQ(back, j);

  const Pmf p = marginal_pmf(j, 1);
  EXPECT_EQ(nlohmann::json::parse(nlohmann::json(p).dump()).get<Pmf>(), p);
  const Kernel k({Pmf({0.9, 0.1}), Pmf({0.1, 0.9})});
  EXPECT_EQ(nlohmann::json::parse(nlohmann::json(k).dump()).get<Kernel>(), k);
}
