#include <gtest/gtest.h>

#include <random>

#include "nfa/nfb.hpp"
#include "test_support.hpp"

using namespace nfa;
using nfa::testing::piecewise_linear;

TEST(TriangularMembership, CrispValueAtCenterIsOne) {
  EXPECT_EQ(triangular_membership(2.0, 2, 6), 1.0);
}

TEST(TriangularMembership, AdjacentCenterHasZeroSupport) {
  EXPECT_EQ(triangular_membership(3.0, 2, 6), 0.0);
}

TEST(TriangularMembership, QuarterStepFromCenter) {
  EXPECT_DOUBLE_EQ(triangular_membership(2.25, 2, 6), 0.75);
}

TEST(TriangularMembership, OutOfRangeInputsNameFactorAndValue) {
  try {
    triangular_membership(6.5, 2, 6, "cplx");
    FAIL() << "expected domain error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::domain);
    EXPECT_NE(std::string(e.what()).find("cplx"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("6.5"), std::string::npos);
  }
  EXPECT_THROW(triangular_membership(-0.1, 0, 6), Error);
  EXPECT_THROW(triangular_membership(1.0, 6, 6), Error);
}

TEST(NfbForward, CrispRatingSelectsConsequent) {
  const std::vector<double> fmp{0.75, 1.00, 1.40};
  EXPECT_EQ(nfb_forward(1.0, fmp).fm, 1.00);
}

TEST(NfbForward, MidpointAveragesNeighbours) {
  const std::vector<double> fmp{0.75, 1.00, 1.40};
  const auto row = nfb_forward(0.5, fmp);
  EXPECT_DOUBLE_EQ(row.fm, 0.875);
  EXPECT_EQ(row.w, (std::vector<double>{0.5, 0.5, 0.0}));
  EXPECT_EQ(row.w_bar, (std::vector<double>{0.5, 0.5, 0.0}));
}

TEST(NfbForward, QuarterPastLevelOne) {
  const std::vector<double> fmp{0.75, 1.00, 1.40};
  const auto row = nfb_forward(1.25, fmp);
  EXPECT_NEAR(row.fm, 1.10, 1e-15);
  EXPECT_DOUBLE_EQ(row.w_bar[1], 0.75);
  EXPECT_DOUBLE_EQ(row.w_bar[2], 0.25);
}

TEST(NfbForward, ZeroFiringStrengthIsAnInferenceError) {
  auto gap = [](double x, std::size_t c, std::size_t) {
    // Narrow sets that leave gaps between levels.
    const double d = std::abs(x - static_cast<double>(c));
    return d < 0.25 ? 1.0 - 4.0 * d : 0.0;
  };
  const std::vector<double> fmp{1.0, 2.0, 3.0};
  EXPECT_NO_THROW(nfb_forward(1.1, fmp, gap));
  try {
    nfb_forward(0.5, fmp, gap);
    FAIL() << "expected inference error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::inference);
  }
}

TEST(NfbForwardAll, NominalRatingsWithUnitConsequentsGiveUnitMultipliers) {
  const auto schema = cocomo81_schema();
  const auto out = nfb_forward_all(RatingVector::at_level(schema, 2), NfbParameters::initial(schema), schema);
  ASSERT_EQ(out.multipliers.size(), 15u);
  for (double fm : out.multipliers) EXPECT_EQ(fm, 1.0);
  EXPECT_EQ(out.trace.rows.size(), 15u);
}

TEST(NfbForwardAll, SingleFactorMidpoint) {
  const auto schema = nfa::testing::single_factor_schema();
  const auto out = nfb_forward_all({{0.5}}, NfbParameters::initial(schema), schema);
  const auto keyed = out.keyed(schema);
  ASSERT_EQ(keyed.size(), 1u);
  EXPECT_DOUBLE_EQ(keyed.at("cplx"), 0.875);
}

TEST(NfbForwardAll, CrispExtremesSelectEndpoints) {
  auto schema = cocomo81_schema();
  schema.factors.resize(2);
  const auto params = NfbParameters::initial(schema);
  const auto out = nfb_forward_all({{0.0, 5.0}}, params, schema);
  EXPECT_EQ(out.multipliers[0], params.fmp[0].front());
  EXPECT_EQ(out.multipliers[1], params.fmp[1].back());
}

TEST(NfbForwardAll, SchemaMismatchListsIds) {
  const auto schema = cocomo81_schema();
  std::map<std::string, double> ratings;
  for (const auto& f : schema.factors) ratings[f.id] = 2.0;
  ratings.erase("tool");
  ratings["xxxx"] = 1.0;
  try {
    RatingVector::from_map(schema, ratings);
    FAIL() << "expected schema error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::schema);
    const std::string what = e.what();
    EXPECT_NE(what.find("tool"), std::string::npos);
    EXPECT_NE(what.find("xxxx"), std::string::npos);
  }
  EXPECT_THROW(nfb_forward_all({{2.0}}, NfbParameters::initial(schema), schema), Error);
}

// ---------------------------------------------------------------------------
// Properties

class NfbProperties : public ::testing::TestWithParam<std::size_t> {};

TEST_P(NfbProperties, MatchesPiecewiseLinearInterpolation) {
  const std::size_t levels = GetParam();
  std::mt19937_64 rng(1000 + levels);
  std::uniform_real_distribution<double> value(0.1, 3.0);
  std::uniform_real_distribution<double> where(0.0, static_cast<double>(levels - 1));
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> fmp(levels);
    for (auto& v : fmp) v = value(rng);
    const double x = where(rng);
    EXPECT_NEAR(nfb_forward(x, fmp).fm, piecewise_linear(fmp, x), 1e-12);
  }
}

TEST_P(NfbProperties, CoverageBoundsAndTraceShape) {
  const std::size_t levels = GetParam();
  std::mt19937_64 rng(2000 + levels);
  std::uniform_real_distribution<double> value(0.1, 3.0);
  std::uniform_real_distribution<double> where(0.0, static_cast<double>(levels - 1));
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> fmp(levels);
    for (auto& v : fmp) v = value(rng);
    const double x = trial == 0 ? 0.0 : trial == 1 ? static_cast<double>(levels - 1) : where(rng);
    const auto row = nfb_forward(x, fmp);

    double sw = 0.0, swb = 0.0;
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < levels; ++k) {
      EXPECT_GE(row.w[k], 0.0);
      EXPECT_LE(row.w[k], 1.0);
      sw += row.w[k];
      swb += row.w_bar[k];
      if (row.w[k] > 0.0) active.push_back(k);
    }
    EXPECT_GE(sw, 1.0 - 1e-12);
    EXPECT_NEAR(swb, 1.0, 1e-12);
    ASSERT_LE(active.size(), 2u);
    if (active.size() == 2) EXPECT_EQ(active[1], active[0] + 1);

    EXPECT_GE(row.fm, *std::min_element(fmp.begin(), fmp.end()));
    EXPECT_LE(row.fm, *std::max_element(fmp.begin(), fmp.end()));
  }
}

TEST_P(NfbProperties, CrispConsistencyAndMonotoneResponse) {
  const std::size_t levels = GetParam();
  std::mt19937_64 rng(3000 + levels);
  for (int trial = 0; trial < 50; ++trial) {
    auto fmp = nfa::testing::random_monotone_row(rng, levels, Direction::increasing);
    for (std::size_t k = 0; k < levels; ++k)
      EXPECT_EQ(nfb_forward(static_cast<double>(k), fmp).fm, fmp[k]);
    double prev = -1.0;
    const int grid = 400;
    for (int g = 0; g <= grid; ++g) {
      const double x = static_cast<double>(levels - 1) * g / grid;
      const double fm = nfb_forward(x, fmp).fm;
      EXPECT_GE(fm, prev - 1e-15);
      prev = fm;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(LevelCounts, NfbProperties, ::testing::Values(2, 3, 6, 9));
