#include "skewpath/error.hpp"
#include "skewpath/model.hpp"
#include "skewpath/numeric.hpp"
#include "skewpath/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace skewpath {
namespace {

SparseVector vec(std::vector<ItemId> items, std::uint32_t d = 16) { return SparseVector(std::move(items), d); }

bool has_kind(const std::vector<Violation>& vs, ViolationKind kind) {
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.kind == kind; });
}

TEST(SparseVector, RejectsUnsortedDuplicateAndOutOfRangeItems) {
    EXPECT_THROW(vec({3, 1}), std::invalid_argument);
    EXPECT_THROW(vec({1, 1}), std::invalid_argument);
    EXPECT_THROW(vec({16}), std::invalid_argument);
    EXPECT_NO_THROW(vec({}));
}

TEST(SparseVector, FromUnsortedSortsAndDeduplicates) {
    const auto x = SparseVector::from_unsorted({5, 1, 5, 3}, 8);
    EXPECT_EQ(std::vector<ItemId>(x.items().begin(), x.items().end()), (std::vector<ItemId>{1, 3, 5}));
    EXPECT_TRUE(x.contains(3));
    EXPECT_FALSE(x.contains(4));
}

TEST(BraunBlanquet, HandExamples) {
    EXPECT_DOUBLE_EQ(braun_blanquet(vec({1, 5, 9}), vec({1, 5, 9})), 1.0);
    EXPECT_DOUBLE_EQ(braun_blanquet(vec({0, 1}), vec({2, 3})), 0.0);
    EXPECT_DOUBLE_EQ(braun_blanquet(vec({1, 2, 3}), vec({2, 3, 4, 5})), 0.5);
}

TEST(BraunBlanquet, BothEmptyIsAnError) {
    EXPECT_THROW(braun_blanquet(vec({}), vec({})), std::invalid_argument);
    EXPECT_DOUBLE_EQ(braun_blanquet(vec({}), vec({1})), 0.0);
}

TEST(BraunBlanquet, DimensionMismatchIsAnError) {
    EXPECT_THROW(braun_blanquet(vec({1}, 8), vec({1}, 9)), std::invalid_argument);
}

TEST(BraunBlanquet, SymmetricBoundedAndOneOnlyForEqualSets) {
    SeededRng rng(7);
    for (int t = 0; t < 500; ++t) {
        std::vector<ItemId> a;
        std::vector<ItemId> b;
        for (ItemId i = 0; i < 12; ++i) {
            if (rng.uniform01() < 0.4) a.push_back(i);
            if (rng.uniform01() < 0.4) b.push_back(i);
        }
        if (a.empty() && b.empty()) continue;
        const auto x = vec(a);
        const auto q = vec(b);
        const double bxq = braun_blanquet(x, q);
        EXPECT_EQ(bxq, braun_blanquet(q, x));
        const double cap = static_cast<double>(std::min(x.size(), q.size())) / std::max(x.size(), q.size());
        EXPECT_GE(bxq, 0.0);
        EXPECT_LE(bxq, cap);
        EXPECT_EQ(bxq == 1.0, x == q);
    }
}

TEST(Distribution, RejectsProbabilitiesOutsideUnitInterval) {
    EXPECT_THROW(Distribution({0.5, 0.0}), std::invalid_argument);
    EXPECT_THROW(Distribution({1.5}), std::invalid_argument);
    EXPECT_THROW(Distribution({std::nan("")}), std::invalid_argument);
    EXPECT_NO_THROW(Distribution({1.0, 0.75}));
}

TEST(Distribution, CachedSumMatchesRecomputation) {
    SeededRng rng(11);
    std::vector<double> p(10000);
    for (auto& v : p) v = 1e-6 + 0.5 * rng.uniform01();
    const Distribution dist(p);
    long double direct = 0.0L;
    for (double v : p) direct += v;
    EXPECT_NEAR(dist.sum_p(), static_cast<double>(direct), 1e-12 * dist.sum_p());
    EXPECT_NEAR(dist.neg_log2(3), -std::log2(p[3]), 1e-12);
}

TEST(Distribution, TextRoundTrip) {
    const Distribution dist({0.5, 0.125, 1e-9});
    std::stringstream buf;
    write_distribution(buf, dist);
    EXPECT_EQ(read_distribution(buf), dist);
}

TEST(Distribution, ParserReportsLineNumbers) {
    std::istringstream bad("3\n0.5\n1.5\n0.1\n");
    try {
        read_distribution(bad);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    std::istringstream short_file("3\n0.5\n");
    EXPECT_THROW(read_distribution(short_file), ParseError);
    std::istringstream junk("2\n0.5\nabc\n");
    EXPECT_THROW(read_distribution(junk), ParseError);
}

TEST(ModelParams, DerivesLogNAndC) {
    const auto dist = Distribution::uniform(960, 0.25);
    const auto params = ModelParams::derive(dist, 256, 2.0 / 3.0);
    EXPECT_EQ(params.log_n, 8u);
    EXPECT_NEAR(params.big_c, 30.0, 1e-12);
    EXPECT_NEAR(params.big_c * params.log_n, dist.sum_p(), 1e-12 * dist.sum_p());
    EXPECT_NEAR(params.b1, (2.0 / 3.0) / 1.3, 1e-15);
    EXPECT_EQ(ModelParams::derive(dist, 257, 0.5).log_n, 9u);
    EXPECT_EQ(ModelParams::derive(dist, 2, 0.5).log_n, 1u);
    EXPECT_THROW(ModelParams::derive(dist, 1, 0.5), std::invalid_argument);
}

TEST(ValidateModel, ConformingCorrelatedModelIsClean) {
    // uniform p = 1/4, alpha = 2/3, C = 30, n = 256: 1/4 <= 1/3 and C alpha = 20 >= 15.
    const auto dist = Distribution::uniform(960, 0.25);
    EXPECT_TRUE(validate_model(dist, ModelParams::derive(dist, 256, 2.0 / 3.0)).empty());
}

TEST(ValidateModel, FlagsProbabilityAboveHalf) {
    const Distribution dist({0.6, 0.1, 0.1});
    const auto vs = validate_model(dist, ModelParams::derive(dist, 4, std::nullopt, 0.5));
    EXPECT_TRUE(has_kind(vs, ViolationKind::probability_above_half));
}

TEST(ValidateModel, FlagsSmallCAlpha) {
    // C = 10 with alpha = 2/3 gives C alpha = 20/3 < 15.
    const auto dist = Distribution::uniform(320, 0.25);
    const auto params = ModelParams::derive(dist, 256, 2.0 / 3.0);
    ASSERT_NEAR(params.big_c, 10.0, 1e-12);
    const auto vs = validate_model(dist, params);
    EXPECT_TRUE(has_kind(vs, ViolationKind::c_alpha_below_15));
    EXPECT_FALSE(has_kind(vs, ViolationKind::probability_above_half));
}

TEST(ValidateModel, FlagsProbabilityAboveHalfAlpha) {
    const auto dist = Distribution::uniform(4000, 0.4);
    const auto vs = validate_model(dist, ModelParams::derive(dist, 256, 0.5));
    EXPECT_TRUE(has_kind(vs, ViolationKind::probability_above_half_alpha));
}

TEST(ValidateModel, FlagsSumBelowCLogN) {
    const auto dist = Distribution::uniform(960, 0.25);
    auto params = ModelParams::derive(dist, 256, 2.0 / 3.0);
    params.big_c = 40.0;
    EXPECT_TRUE(has_kind(validate_model(dist, params), ViolationKind::sum_below_c_log_n));
}

TEST(ChernoffTail, HandExamples) {
    EXPECT_NEAR(chernoff_tail(100, 0.3, 1.0, TailSide::upper), std::exp(-3.0), 1e-15);
    EXPECT_NEAR(chernoff_tail(100, 0.3, 1.0, TailSide::upper), 0.0498, 1e-4);
    EXPECT_DOUBLE_EQ(chernoff_tail(100, 0.0, 1.0, TailSide::lower), 1.0);
    EXPECT_NEAR(chernoff_tail(200, 0.1, 0.5, TailSide::lower), std::exp(-2.0), 1e-15);
    EXPECT_NEAR(chernoff_tail(200, 0.1, 0.5, TailSide::lower), 0.1353, 1e-4);
}

TEST(ChernoffTail, RejectsDomainViolations) {
    EXPECT_THROW(chernoff_tail(0.0, 0.1, 1.0, TailSide::upper), std::domain_error);
    EXPECT_THROW(chernoff_tail(10.0, 1.5, 1.0, TailSide::upper), std::domain_error);
    EXPECT_THROW(chernoff_tail(10.0, 0.5, 0.0, TailSide::upper), std::domain_error);
}

TEST(Numeric, CeilLog2) {
    EXPECT_EQ(ceil_log2(1), 0u);
    EXPECT_EQ(ceil_log2(2), 1u);
    EXPECT_EQ(ceil_log2(3), 2u);
    EXPECT_EQ(ceil_log2(1024), 10u);
    EXPECT_EQ(ceil_log2(1025), 11u);
}

TEST(Numeric, CompensatedSumRecoversSmallTerms) {
    CompensatedSum s;
    s.add(1.0);
    for (int k = 0; k < 1000; ++k) s.add(1e-16);
    s.add(-1.0);
    EXPECT_NEAR(s.value(), 1e-13, 1e-20);
}

}  // namespace
}  // namespace skewpath
