#include <gtest/gtest.h>

#include <random>
#include <set>

#include "equivoq/oracle.hpp"
#include "oracles.hpp"

using namespace equivoq;

namespace {

const Pmf kUniform = Pmf::uniform(2);

BlockCode code(std::size_t n, std::size_t keys, std::size_t messages,
               std::vector<std::uint32_t> enc, std::vector<std::uint32_t> dec) {
  BlockCode c;
  c.n = n;
  c.key_size = keys;
  c.message_size = messages;
  c.encoder = std::move(enc);
  c.decoder = std::move(dec);
  c.validate();
  return c;
}

// m = x xor k, y = m xor k.
BlockCode one_time_pad() { return code(1, 2, 2, {0, 1, 1, 0}, {0, 1, 1, 0}); }
BlockCode identity_code() { return code(1, 1, 2, {0, 1}, {0, 1}); }
BlockCode constant_code() { return code(1, 1, 1, {0, 0}, {0}); }

SecrecyConfig uniform_cfg(double D, double R, double R0) {
  return SecrecyConfig{kUniform, DistortionSpec::hamming(2, D), R, R0};
}

}  // namespace

TEST(BlockCode, Validation) {
  BlockCode c = one_time_pad();
  c.encoder[0] = 2;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = one_time_pad();
  c.decoder.pop_back();
  EXPECT_THROW(c.validate(), ArgumentError);
  EXPECT_THROW(induced_joint(one_time_pad(), Pmf::uniform(3)), ArgumentError);
}

TEST(BlockCode, JsonRoundTrip) {
  const BlockCode c = enumerate_codes(2, 2, 2, 2, 2).at(40000);
  EXPECT_EQ(nlohmann::json::parse(nlohmann::json(c).dump()).get<BlockCode>(), c);
}

TEST(InducedJoint, IdentityCoupling) {
  const auto j = induced_joint(identity_code(), kUniform);
  EXPECT_NEAR(j.at({0, 0, 0, 0}), 0.5, 1e-15);
  EXPECT_NEAR(j.at({1, 0, 1, 1}), 0.5, 1e-15);
}

TEST(InducedJoint, OneTimePad) {
  const auto j = induced_joint(one_time_pad(), kUniform);
  EXPECT_NEAR(mutual_information(j, {0}, {2}), 0.0, 1e-12);
  const auto xy = marginalize(j, {0, 3});
  EXPECT_NEAR(xy.at({0, 0}) + xy.at({1, 1}), 1.0, 1e-15);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t m = 0; m < 2; ++m) EXPECT_NEAR(j.at({x, k, m, x}), (m == (x ^ k)) * 0.25, 1e-15);
}

TEST(LogLossValue, Examples) {
  const auto mode = DisclosureMode::past_source;
  EXPECT_NEAR(eavesdropper_value_logloss(one_time_pad(), kUniform, mode, LogLossVariant::source),
              1.0, 1e-12);
  const Pmf p({0.3, 0.7});
  EXPECT_NEAR(eavesdropper_value_logloss(constant_code(), p, mode, LogLossVariant::source),
              oracle::binary_entropy(0.3), 1e-12);
  EXPECT_NEAR(eavesdropper_value_logloss(identity_code(), kUniform, mode, LogLossVariant::source),
              0.0, 1e-12);
}

TEST(LogLossValue, AgreesWithDirectEnumeration) {
  const Pmf p({0.3, 0.7});
  const auto space = enumerate_codes(1, 2, 2, 2, 2);
  space.for_each([&](std::uint64_t, const BlockCode& c) {
    const std::vector<std::vector<int>> enc{{static_cast<int>(c.encode(0, 0)),
                                             static_cast<int>(c.encode(0, 1))},
                                            {static_cast<int>(c.encode(1, 0)),
                                             static_cast<int>(c.encode(1, 1))}};
    EXPECT_NEAR(
        eavesdropper_value_logloss(c, p, DisclosureMode::past_source, LogLossVariant::source),
        oracle::single_letter_equivocation({0.3, 0.7}, enc, 2), 1e-12);
  });
}

TEST(LogLossValue, RoutesAgreeAtBlocklengthTwo) {
  const Pmf p({0.2, 0.8});
  const auto space = enumerate_codes(2, 2, 2, 2, 2);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 300; ++i) {
    const BlockCode c = space.at(rng() % space.size());
    for (auto v : {LogLossVariant::source, LogLossVariant::reconstruction, LogLossVariant::joint}) {
      const auto r = logloss_routes(c, p, matched_mode(v), v);
      ASSERT_TRUE(r.closed_form);
      EXPECT_NEAR(r.explicit_strategy, *r.closed_form, 1e-10);
    }
  }
}

TEST(LogLossValue, CrossPairingHasNoClosedForm) {
  const auto r = logloss_routes(one_time_pad(), kUniform, DisclosureMode::past_both,
                                LogLossVariant::source);
  EXPECT_FALSE(r.closed_form);
  EXPECT_NEAR(r.explicit_strategy, 1.0, 1e-12);
}

TEST(GeneralPayoff, HammingGuess) {
  const auto hamming = PayoffTensor::from(2, 2, 2, [](auto x, auto, auto z) { return x == z ? 0.0 : 1.0; });
  EXPECT_NEAR(eavesdropper_value_general(one_time_pad(), kUniform, DisclosureMode::past_source,
                                         hamming),
              0.5, 1e-12);
  EXPECT_NEAR(eavesdropper_value_general(identity_code(), kUniform, DisclosureMode::past_source,
                                         hamming),
              0.0, 1e-12);
}

TEST(GeneralPayoff, ActionIndependentPayoff) {
  const auto flat = PayoffTensor::from(2, 2, 3, [](auto x, auto y, auto) { return x + 2.0 * y; });
  const Pmf p({0.3, 0.7});
  // Y = X under the pad: E[X + 2Y] = 3 * 0.7.
  EXPECT_NEAR(eavesdropper_value_general(one_time_pad(), p, DisclosureMode::past_both, flat), 2.1,
              1e-12);
}

TEST(GeneralPayoff, MoreDisclosureNeverHelpsTheSystem) {
  const Pmf p({0.4, 0.6});
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto space = enumerate_codes(2, 2, 2, 2, 2);
  for (int i = 0; i < 200; ++i) {
    PayoffTensor pi;
    pi = PayoffTensor::from(2, 2, 3, [&](auto, auto, auto) { return u(rng); });
    const BlockCode c = space.at(rng() % space.size());
    const double both = eavesdropper_value_general(c, p, DisclosureMode::past_both, pi);
    EXPECT_LE(both, eavesdropper_value_general(c, p, DisclosureMode::past_source, pi) + 1e-12);
    EXPECT_LE(both, eavesdropper_value_general(c, p, DisclosureMode::past_reconstruction, pi) + 1e-12);
  }
}

TEST(GeneralPayoff, ShapeMismatch) {
  const auto pi = PayoffTensor::from(3, 2, 2, [](auto, auto, auto) { return 0.0; });
  EXPECT_THROW(eavesdropper_value_general(one_time_pad(), kUniform, DisclosureMode::past_source, pi),
               ArgumentError);
}

TEST(Enumeration, Counts) {
  EXPECT_EQ(enumerate_codes(1, 2, 2, 2, 2).size(), 256u);
  EXPECT_EQ(enumerate_codes(2, 2, 2, 2, 2).size(), 65536u);
  EXPECT_EQ(enumerate_codes(1, 2, 2, 1, 2).size(), 4u);
  try {
    enumerate_codes(3, 2, 2, 4, 1);
    FAIL();
  } catch (const ResourceError& e) {
    EXPECT_DOUBLE_EQ(e.count(), 268435456.0);
  }
}

TEST(Enumeration, EveryCodeOnce) {
  const auto space = enumerate_codes(1, 2, 2, 2, 2);
  std::set<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>> seen;
  space.for_each([&](std::uint64_t, const BlockCode& c) { seen.emplace(c.encoder, c.decoder); });
  EXPECT_EQ(seen.size(), 256u);
}

TEST(Enumeration, SingleMessageIgnoresMessage) {
  const auto space = enumerate_codes(1, 2, 2, 1, 2);
  space.for_each([&](std::uint64_t, const BlockCode& c) {
    EXPECT_EQ(c.encoder, (std::vector<std::uint32_t>{0, 0, 0, 0}));
  });
}

TEST(AlphabetForRate, Rounding) {
  EXPECT_EQ(alphabet_for_rate(1, 0.0), 1u);
  EXPECT_EQ(alphabet_for_rate(1, 1.0), 2u);
  EXPECT_EQ(alphabet_for_rate(2, 0.5), 2u);
  EXPECT_EQ(alphabet_for_rate(3, 2.0 / 3.0), 4u);
  EXPECT_EQ(alphabet_for_rate(1, 0.9), 1u);
}

TEST(OperationalValue, OneTimePadAttainsCharacterization) {
  const auto r = operational_value(1, uniform_cfg(0, 1, 1), DisclosureMode::past_source,
                                   LogLossVariant::source);
  EXPECT_EQ(r.codes_enumerated, 256u);
  EXPECT_NEAR(r.operational_value, 1.0, 1e-12);
  EXPECT_NEAR(r.characterization_value, 1.0, 1e-12);
  EXPECT_NEAR(r.gap, 0.0, 1e-9);
  EXPECT_NEAR(r.intended_distortion, 0.0, 1e-15);
}

TEST(OperationalValue, NoKeyNoSecrecy) {
  const auto r = operational_value(1, uniform_cfg(0, 1, 0), DisclosureMode::past_source,
                                   LogLossVariant::source);
  EXPECT_NEAR(r.operational_value, 0.0, 1e-12);
  EXPECT_NEAR(r.characterization_value, 0.0, 1e-6);
}

TEST(OperationalValue, ReconstructionAndJoint) {
  SearchOptions o;
  o.restarts = 8;
  for (auto v : {LogLossVariant::reconstruction, LogLossVariant::joint}) {
    const auto r = operational_value(1, uniform_cfg(0.25, 1, 1), matched_mode(v), v, true, o);
    EXPECT_GE(r.gap, -1e-9);
  }
}

TEST(OperationalValue, Errors) {
  EXPECT_THROW(operational_value(1, uniform_cfg(0, 1, 1), DisclosureMode::past_both,
                                 LogLossVariant::source),
               ArgumentError);
  EXPECT_THROW(operational_value(3, uniform_cfg(0, 2.0 / 3.0, 0), DisclosureMode::past_source,
                                 LogLossVariant::source),
               ResourceError);
  // No single-message code reaches D = 0 on a uniform source.
  const SecrecyConfig c{kUniform, DistortionSpec::hamming(2, 0.0), 0.5, 0};
  EXPECT_THROW(operational_value(1, c, DisclosureMode::past_source, LogLossVariant::source),
               InfeasibleError);
}

TEST(OperationalValue, FilterOffAdmitsEveryCode) {
  const SecrecyConfig c{kUniform, DistortionSpec::hamming(2, 0.5), 1, 0};
  const auto r = operational_value(1, c, DisclosureMode::past_source, LogLossVariant::source, false);
  EXPECT_EQ(r.codes_meeting_distortion, r.codes_enumerated);
}

TEST(OperationalValue, ReportJsonRoundTrip) {
  const auto r = operational_value(1, uniform_cfg(0, 1, 1), DisclosureMode::past_source,
                                   LogLossVariant::source);
  EXPECT_EQ(nlohmann::json::parse(nlohmann::json(r).dump()).get<OracleReport>(), r);
}

TEST(OperationalValue, TiesResolveToFirstIndex) {
  const auto a = operational_value(1, uniform_cfg(0, 1, 1), DisclosureMode::past_source,
                                   LogLossVariant::source);
  const auto space = enumerate_codes(1, 2, 2, 2, 2);
  for (std::uint64_t i = 0; i < space.size(); ++i) {
    const BlockCode c = space.at(i);
    if (intended_distortion(c, kUniform, DistortionSpec::hamming(2, 0)) > 1e-12) continue;
    if (eavesdropper_value_logloss(c, kUniform, DisclosureMode::past_source,
                                   LogLossVariant::source) >= a.operational_value) {
      EXPECT_EQ(c, a.best_code);
      break;
    }
  }
}
