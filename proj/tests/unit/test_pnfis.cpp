#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "nfa/pnfis.hpp"
#include "test_support.hpp"

using namespace nfa;

namespace {

DependencyRule acap_lowers_cplx() {
  return {{{"acap", 4}}, "cplx", -0.5, "capable analysts simplify the design"};
}

RatingVector nominal_with(const FactorSchema& schema, std::map<std::string, double> overrides) {
  auto rv = RatingVector::at_level(schema, 2);
  for (const auto& [id, v] : overrides) rv.values[*schema.index_of(id)] = v;
  return rv;
}

}  // namespace

TEST(ValidateRules, EmptySetIsValid) {
  EXPECT_TRUE(validate_rules({}, cocomo81_schema()).empty());
}

TEST(ValidateRules, UnknownTarget) {
  DependencySet rules{{{{{"acap", 4}}, "xxxx", 0.5, ""}}};
  const auto report = validate_rules(rules, cocomo81_schema());
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].rule_index, 0u);
  EXPECT_NE(report[0].reason.find("unknown target factor"), std::string::npos);
}

TEST(ValidateRules, DeltaBeyondRatingSpan) {
  DependencySet rules{{{{{"acap", 4}}, "cplx", 9.0, ""}}};
  const auto report = validate_rules(rules, cocomo81_schema());
  ASSERT_EQ(report.size(), 1u);
  EXPECT_NE(report[0].reason.find("delta exceeds rating span"), std::string::npos);
}

TEST(ValidateRules, OtherViolationsCarryRuleIndex) {
  DependencySet rules{{acap_lowers_cplx(),
                       {{}, "cplx", 0.5, "no antecedents"},
                       {{{"acap", 6}}, "cplx", 0.5, "level out of range"},
                       {{{"nope", 1}}, "cplx", 0.5, "unknown antecedent"}}};
  const auto report = validate_rules(rules, cocomo81_schema());
  ASSERT_EQ(report.size(), 3u);
  EXPECT_EQ(report[0].rule_index, 1u);
  EXPECT_EQ(report[1].rule_index, 2u);
  EXPECT_EQ(report[2].rule_index, 3u);
}

TEST(PnfisAdjust, EmptyRulesAreIdentity) {
  const auto schema = cocomo81_schema();
  const auto rf = nominal_with(schema, {{"cplx", 3.7}, {"acap", 0.2}});
  EXPECT_EQ(pnfis_adjust(rf, {}, schema), rf);
}

TEST(PnfisAdjust, CrispAntecedentAppliesFullDelta) {
  const auto schema = cocomo81_schema();
  const auto rf = nominal_with(schema, {{"acap", 4.0}, {"cplx", 3.0}});
  const auto arf = pnfis_adjust(rf, {{acap_lowers_cplx()}}, schema);
  EXPECT_EQ(arf.values[*schema.index_of("cplx")], 2.5);
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (schema.factors[i].id != "cplx") EXPECT_EQ(arf.values[i], rf.values[i]);
}

TEST(PnfisAdjust, PartialAntecedentScalesDelta) {
  const auto schema = cocomo81_schema();
  const auto rf = nominal_with(schema, {{"acap", 3.5}, {"cplx", 3.0}});
  const auto arf = pnfis_adjust(rf, {{acap_lowers_cplx()}}, schema);
  EXPECT_DOUBLE_EQ(arf.values[*schema.index_of("cplx")], 2.75);
}

TEST(PnfisAdjust, MinConjunctionOverAntecedents) {
  const auto schema = cocomo81_schema();
  DependencyRule rule{{{"acap", 4}, {"pcap", 4}}, "cplx", -1.0, ""};
  const auto rf = nominal_with(schema, {{"acap", 4.0}, {"pcap", 3.75}, {"cplx", 3.0}});
  // strengths 1.0 and 0.75 -> 0.75
  EXPECT_DOUBLE_EQ(pnfis_adjust(rf, {{rule}}, schema).values[*schema.index_of("cplx")], 2.25);
}

TEST(PnfisAdjust, ClampsToRatingRange) {
  const auto schema = cocomo81_schema();
  DependencySet rules{{{{{"acap", 4}}, "cplx", -5.0, ""}, {{{"acap", 4}}, "rely", 5.0, ""}}};
  const auto rf = nominal_with(schema, {{"acap", 4.0}});
  const auto arf = pnfis_adjust(rf, rules, schema);
  EXPECT_EQ(arf.values[*schema.index_of("cplx")], 0.0);
  EXPECT_EQ(arf.values[*schema.index_of("rely")], 5.0);
}

TEST(PnfisAdjust, NoCascadingThroughAdjustedRatings) {
  const auto schema = cocomo81_schema();
  // acap -> cplx, then cplx(level 2) -> rely. The second rule reads raw cplx.
  DependencySet rules{{{{{"acap", 4}}, "cplx", -1.0, ""}, {{{"cplx", 2}}, "rely", 1.0, ""}}};
  const auto rf = nominal_with(schema, {{"acap", 4.0}, {"cplx", 3.0}});
  const auto arf = pnfis_adjust(rf, rules, schema);
  EXPECT_EQ(arf.values[*schema.index_of("cplx")], 2.0);
  EXPECT_EQ(arf.values[*schema.index_of("rely")], 2.0);  // raw cplx=3 fires rule 2 with 0
}

TEST(PnfisAdjust, InvalidRulesArePreconditionErrors) {
  const auto schema = cocomo81_schema();
  DependencySet rules{{{{{"acap", 4}}, "xxxx", 0.5, ""}}};
  try {
    pnfis_adjust(RatingVector::at_level(schema, 2), rules, schema);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
    EXPECT_EQ(e.stage(), "pnfis");
  }
}

TEST(PnfisProperties, RangeSafetyLocalityAndOrderIndependence) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto doc = nfa::testing::random_document(rng);
    const auto& schema = doc.schema;
    RatingVector rf;
    for (const auto& f : schema.factors) rf.values.push_back(f.max_rating() * u(rng));

    const auto arf = pnfis_adjust(rf, doc.rules, schema);
    for (std::size_t i = 0; i < schema.size(); ++i) {
      EXPECT_GE(arf.values[i], 0.0);
      EXPECT_LE(arf.values[i], schema.factors[i].max_rating());
      const bool targeted = std::any_of(doc.rules.rules.begin(), doc.rules.rules.end(),
                                        [&](const auto& r) { return r.target == schema.factors[i].id; });
      if (!targeted) EXPECT_EQ(arf.values[i], rf.values[i]);
    }

    auto permuted = doc.rules;
    std::shuffle(permuted.rules.begin(), permuted.rules.end(), rng);
    const auto arf2 = pnfis_adjust(rf, permuted, schema);
    for (std::size_t i = 0; i < schema.size(); ++i) EXPECT_NEAR(arf2.values[i], arf.values[i], 1e-12);
  }
}
