#include <gtest/gtest.h>

#include "equivoq/characterization.hpp"
#include "oracles.hpp"

using namespace equivoq;

namespace {

SecrecyConfig binary(double p, double D, double R, double R0) {
  return SecrecyConfig{Pmf({p, 1 - p}), DistortionSpec::hamming(2, D), R, R0};
}

SearchOptions quick() {
  SearchOptions o;
  o.restarts = 16;
  return o;
}

// Copula triple: U uniform binary, X = U, Y = U.
AuxTriple copula() { return AuxTriple{Pmf::uniform(2), Kernel::identity(2), Kernel::identity(2)}; }

}  // namespace

TEST(Config, Validation) {
  EXPECT_THROW(binary(0.5, 0.1, -1, 0).validate(), ArgumentError);
  EXPECT_THROW(binary(0.5, 0.1, 1, std::nan("")).validate(), ArgumentError);
  SecrecyConfig c = binary(0.5, 0.1, 1, 0);
  c.distortion = DistortionSpec::hamming(3, 0.1);
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(Config, RateBelowRdIsInfeasible) {
  EXPECT_THROW(require_feasible(binary(0.5, 0.1, 0.2, 0)), InfeasibleError);
  EXPECT_NO_THROW(require_feasible(binary(0.5, 0.1, 1 - oracle::binary_entropy(0.1), 0)));
}

TEST(Config, JsonRoundTripAndMessages) {
  const auto c = binary(0.3, 0.2, 0.6, 0.1);
  EXPECT_EQ(nlohmann::json::parse(nlohmann::json(c).dump()).get<SecrecyConfig>(), c);
  auto j = nlohmann::json(c);
  j.erase("key_rate");
  try {
    j.get<SecrecyConfig>();
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("key_rate"), std::string::npos);
  }
  j = nlohmann::json(c);
  j["distortion"]["matrix"][1][0] = "x";
  try {
    j.get<SecrecyConfig>();
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("distortion.matrix[1][0]"), std::string::npos);
  }
}

TEST(SourceEquivocation, Values) {
  EXPECT_NEAR(source_equivocation(binary(0.5, 0.0, 1, 0)).value, 0.0, 1e-6);
  EXPECT_NEAR(source_equivocation(binary(0.5, 0.0, 1, 1)).value, 1.0, 1e-12);
  EXPECT_NEAR(source_equivocation(binary(0.5, 0.3, 1, 1.5)).value, 1.0, 1e-12);
  EXPECT_NEAR(source_equivocation(binary(0.5, 0.5, 0, 0)).value, 1.0, 1e-12);
  // h(0.3) - [h(0.3) - h(0.1) - 0.2]+
  EXPECT_NEAR(source_equivocation(binary(0.3, 0.1, 1, 0.2)).value,
              oracle::binary_entropy(0.1) + 0.2, 1e-6);
  EXPECT_FALSE(source_equivocation(binary(0.5, 0.1, 1, 0)).optimizer.has_value());
}

TEST(SourceEquivocation, Infeasible) {
  const SecrecyConfig c{Pmf::uniform(2), DistortionSpec({{0.2, 1}, {1, 0.2}}, 0.1), 1, 0};
  EXPECT_THROW(source_equivocation(c), InfeasibleError);
  EXPECT_THROW(source_equivocation(binary(0.5, 0.0, 0.5, 0)), InfeasibleError);
}

TEST(Membership, Examples) {
  const AuxTriple indep{Pmf({1.0}), Kernel({Pmf::uniform(2)}), Kernel({Pmf::uniform(2)})};
  EXPECT_TRUE(check_membership(indep, binary(0.5, 0.5, 0, 0)).member);
  EXPECT_FALSE(check_membership(indep, binary(0.5, 0.4, 0, 0)).member);
  EXPECT_TRUE(check_membership(copula(), binary(0.5, 0.0, 1, 0)).member);
  const auto r = check_membership(copula(), binary(0.5, 0.0, 0.5, 0));
  EXPECT_FALSE(r.member);
  EXPECT_NEAR(r.rate_slack, -0.5, 1e-12);
  EXPECT_NEAR(r.mutual_information, 1.0, 1e-12);
}

TEST(Membership, WrongMarginalOrShape) {
  EXPECT_FALSE(check_membership(copula(), binary(0.3, 0.0, 1, 0)).member);
  const AuxTriple bad{Pmf::uniform(2), Kernel::identity(2), Kernel::identity(3)};
  EXPECT_THROW(check_membership(bad, binary(0.5, 0.1, 1, 0)), ArgumentError);
}

TEST(Grid, CoarseStepReturnsMember) {
  const auto c = binary(0.5, 0.25, 1, 0);
  const auto r = exhaustive_aux_search(c, 0.5, 2, AuxObjective::reconstruction);
  ASSERT_TRUE(r.optimizer);
  EXPECT_TRUE(check_membership(*r.optimizer, c).member);
  EXPECT_EQ(aux_grid_size(c, 0.5, 2), 36.0);
}

TEST(Grid, ReferenceValues) {
  // Values below are what the grid itself returns; see the ascent tests.
  const auto a = exhaustive_aux_search(binary(0.5, 0.0, 1, 1), 0.05, 3, AuxObjective::joint);
  EXPECT_NEAR(a.value, 1.0, 1e-12);
  const auto b = exhaustive_aux_search(binary(0.5, 0.5, 0, 0), 0.05, 3, AuxObjective::joint);
  EXPECT_NEAR(b.value, 2.0, 1e-12);
  const auto c = exhaustive_aux_search(binary(0.5, 0.5, 0, 0), 0.05, 3,
                                       AuxObjective::reconstruction);
  EXPECT_NEAR(c.value, 1.0, 1e-12);
}

TEST(Grid, Errors) {
  EXPECT_THROW(exhaustive_aux_search(binary(0.5, 0.1, 1, 0), 0.05, 4, AuxObjective::joint),
               ResourceError);
  EXPECT_THROW(exhaustive_aux_search(binary(0.5, 0.1, 1, 0), 0.3, 2, AuxObjective::joint),
               ArgumentError);
  const SecrecyConfig c{Pmf::uniform(2), DistortionSpec({{0.2, 1}, {1, 0.2}}, 0.1), 1, 0};
  EXPECT_THROW(exhaustive_aux_search(c, 0.25, 2, AuxObjective::joint), InfeasibleError);
}

TEST(Grid, ResourceErrorCarriesCount) {
  try {
    exhaustive_aux_search(binary(0.5, 0.1, 1, 0), 0.05, 4, AuxObjective::joint);
    FAIL();
  } catch (const ResourceError& e) {
    EXPECT_GT(e.count(), 1e8);
  }
}

TEST(Reconstruction, Examples) {
  EXPECT_NEAR(reconstruction_equivocation(binary(0.5, 0.0, 1, 0), quick()).value, 0.0, 1e-9);
  EXPECT_NEAR(reconstruction_equivocation(binary(0.5, 0.0, 1, 1), quick()).value, 1.0, 1e-9);
  EXPECT_NEAR(reconstruction_equivocation(binary(0.5, 0.0, 1, 2), quick()).value, 1.0, 1e-9);
  EXPECT_NEAR(reconstruction_equivocation(binary(0.5, 0.5, 0, 0), quick()).value, 1.0, 1e-9);
}

TEST(Reconstruction, Infeasible) {
  const SecrecyConfig c{Pmf::uniform(2), DistortionSpec({{0.2, 1}, {1, 0.2}}, 0.1), 1, 0};
  EXPECT_THROW(reconstruction_equivocation(c, quick()), InfeasibleError);
}

TEST(Joint, Examples) {
  EXPECT_NEAR(joint_equivocation(binary(0.5, 0.0, 1, 1), quick()).value, 1.0, 1e-9);
  EXPECT_NEAR(joint_equivocation(binary(0.5, 0.5, 0, 0), quick()).value, 2.0, 1e-9);
}

TEST(Joint, BeatsIdentityAux) {
  // U = (X, Y) scores H(X,Y|U) = 0 at R0 = 0; a noisy reconstruction does better.
  const auto c = binary(0.5, 0.2, 1, 0);
  const auto r = joint_equivocation(c, quick());
  EXPECT_GT(r.value, 1e-3);
  EXPECT_TRUE(check_membership(*r.optimizer, c).member);
}

TEST(Ascent, AtLeastGrid) {
  for (const auto& c : {binary(0.3, 0.2, 0.6, 0.2), binary(0.5, 0.1, 0.6, 0.2)}) {
    for (auto obj : {AuxObjective::reconstruction, AuxObjective::joint}) {
      const double grid = exhaustive_aux_search(c, 0.05, 3, obj).value;
      const auto r = obj == AuxObjective::joint ? joint_equivocation(c, quick())
                                                : reconstruction_equivocation(c, quick());
      EXPECT_GE(r.value, grid - 1e-3);
      EXPECT_TRUE(check_membership(*r.optimizer, c).member);
      EXPECT_NEAR(aux_objective_value(*r.optimizer, c, obj), r.value, 1e-12);
    }
  }
}

TEST(Ascent, DeterministicForSeed) {
  const auto c = binary(0.3, 0.2, 0.6, 0.1);
  SearchOptions o = quick();
  o.seed = 7;
  EXPECT_EQ(joint_equivocation(c, o), joint_equivocation(c, o));
}

TEST(Ascent, SmallerAuxCardinality) {
  SearchOptions o = quick();
  o.aux_cardinality = 2;
  const auto c = binary(0.3, 0.2, 0.6, 0.2);
  const auto r = reconstruction_equivocation(c, o);
  EXPECT_EQ(r.optimizer->aux_cardinality(), 2u);
  EXPECT_TRUE(check_membership(*r.optimizer, c).member);
}

TEST(Ascent, RejectsZeroRestarts) {
  SearchOptions o;
  o.restarts = 0;
  EXPECT_THROW(joint_equivocation(binary(0.5, 0.1, 1, 0), o), ArgumentError);
}

TEST(Result, JsonRoundTrip) {
  const auto r = joint_equivocation(binary(0.3, 0.2, 0.6, 0.1), quick());
  const nlohmann::json j = r;
  EXPECT_EQ(nlohmann::json::parse(j.dump()).get<EquivocationResult>(), r);
  const auto s = source_equivocation(binary(0.3, 0.2, 0.6, 0.1));
  EXPECT_EQ(nlohmann::json::parse(nlohmann::json(s).dump()).get<EquivocationResult>(), s);
}

TEST(Sweep, KeyRateSaturates) {
  const auto r = equivocation_sweep(binary(0.5, 0.1, 1, 0), SweepAxis::key_rate,
                                    {0, 0.5, 1, 1.5, 2}, {true, false, false});
  ASSERT_EQ(r.rows.size(), 5u);
  EXPECT_NEAR(r.rows.back().source.value(), 1.0, 1e-12);
  EXPECT_FALSE(r.rows[0].joint.has_value());
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    EXPECT_GE(*r.rows[i].source, *r.rows[i - 1].source - 1e-9);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Sweep, DistortionMonotoneAndOrderPreserved) {
  const auto r = equivocation_sweep(binary(0.5, 0.1, 1, 0.1), SweepAxis::distortion_limit,
                                    {0.4, 0.0, 0.2}, {true, false, false});
  EXPECT_DOUBLE_EQ(r.rows[0].axis_value, 0.4);
  EXPECT_LE(*r.rows[1].source, *r.rows[2].source + 1e-9);
  EXPECT_LE(*r.rows[2].source, *r.rows[0].source + 1e-9);
}

TEST(Sweep, MaxFormsNondecreasingInKeyRate) {
  SearchOptions o = quick();
  const auto r = equivocation_sweep(binary(0.3, 0.2, 0.6, 0), SweepAxis::key_rate,
                                    {0, 0.1, 0.2, 0.4}, {false, true, true}, o);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    EXPECT_GE(*r.rows[i].reconstruction, *r.rows[i - 1].reconstruction - 1e-9);
    EXPECT_GE(*r.rows[i].joint, *r.rows[i - 1].joint - 1e-9);
  }
}

TEST(Sweep, BadInput) {
  EXPECT_THROW(equivocation_sweep(binary(0.5, 0.1, 1, 0), SweepAxis::rate, {}, {}),
               ArgumentError);
  EXPECT_THROW(parse_sweep_axis("noise"), ArgumentError);
}
