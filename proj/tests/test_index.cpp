#include "skewpath/error.hpp"
#include "skewpath/index.hpp"
#include "skewpath/rng.hpp"
#include "skewpath/sampling.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <set>
#include <vector>

namespace skewpath {
namespace {

constexpr std::uint32_t kDim = 512;
constexpr double kP = 1.0 / 8;

std::vector<SparseVector> small_dataset(std::uint64_t seed, std::size_t n = 64) {
    return sample_dataset(Distribution::uniform(kDim, kP), n, seed);
}

FilterIndex small_index(std::uint64_t seed = 3, std::uint32_t reps = 6) {
    return FilterIndex::build(small_dataset(seed), ThresholdScheme::adversarial(0.5),
                              Distribution::uniform(kDim, kP), reps, 77);
}

// Minimal little-endian writer for hand-assembled index images.
struct Bytes {
    std::vector<std::uint8_t> data;
    void u8(std::uint8_t v) { data.push_back(v); }
    void u32(std::uint32_t v) {
        for (int k = 0; k < 4; ++k) data.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void u64(std::uint64_t v) {
        for (int k = 0; k < 8; ++k) data.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void magic() {
        for (char c : std::string("SKPIDX1")) u8(static_cast<std::uint8_t>(c));
        u8(1);
    }
};

// d = 2, n = 2, one repetition with no filters, dataset {0} and {1}, empty smallside.
std::vector<std::uint8_t> empty_index_image() {
    Bytes b;
    b.magic();
    b.u32(2);
    b.u32(2);
    b.u32(1);
    b.u32(hash_levels_for(2));
    b.u8(0);
    b.f64(0.5);
    b.f64(0.0);
    b.f64(0.0);
    b.f64(0.0);
    b.u64(7);
    b.f64(0.5);
    b.f64(0.5);
    b.u64(0);
    b.u32(1);
    b.u32(0);
    b.u32(1);
    b.u32(1);
    b.u32(0);
    return b.data;
}

TEST(DefaultRepetitions, LogNTimesLogInverseFailure) {
    EXPECT_EQ(default_repetitions(256), 24u);
    EXPECT_EQ(default_repetitions(1024, 0.05), 30u);
    EXPECT_EQ(default_repetitions(2, 0.5), 1u);
    EXPECT_GE(default_repetitions(2, 0.999), 1u);
}

TEST(Smallside, RoutingRules) {
    const auto dist = Distribution::uniform(960, 0.25);
    const auto adv = ThresholdScheme::adversarial(0.5);
    EXPECT_TRUE(routes_to_smallside(adv, dist, 0));
    EXPECT_TRUE(routes_to_smallside(adv, dist, 2));
    EXPECT_FALSE(routes_to_smallside(adv, dist, 3));
    const auto cor = ThresholdScheme::correlated(dist, ModelParams::derive(dist, 256, 2.0 / 3));
    // sum_p = 240, threshold 240 * sqrt(3) / 2 ~ 207.8.
    EXPECT_TRUE(routes_to_smallside(cor, dist, 207));
    EXPECT_FALSE(routes_to_smallside(cor, dist, 208));
}

TEST(Build, RejectsBadArguments) {
    const auto dist = Distribution::uniform(kDim, kP);
    const auto adv = ThresholdScheme::adversarial(0.5);
    EXPECT_THROW(FilterIndex::build(small_dataset(1, 1), adv, dist, 4, 1), std::invalid_argument);
    EXPECT_THROW(FilterIndex::build(small_dataset(1), adv, dist, 0, 1), std::invalid_argument);
    auto mixed = small_dataset(1);
    mixed.push_back(SparseVector({1}, kDim + 1));
    EXPECT_THROW(FilterIndex::build(mixed, adv, dist, 4, 1), std::invalid_argument);
}

TEST(Build, PostingsMatchEnumeratedFilters) {
    const auto index = small_index();
    const std::set<VectorId> small(index.smallside().begin(), index.smallside().end());
    std::uint64_t expected_total = 0;
    for (std::uint32_t r = 0; r < index.repetitions(); ++r) {
        const auto& table = index.table(r);
        for (VectorId id = 0; id < index.size(); ++id) {
            if (small.count(id)) continue;
            auto fps = enumerate_filter_fingerprints(index.dataset()[id], index.scheme(), index.distribution(),
                                                     index.family(r), index.size());
            std::sort(fps.begin(), fps.end());
            fps.erase(std::unique(fps.begin(), fps.end()), fps.end());
            expected_total += fps.size();
            for (std::uint64_t fp : fps) {
                const auto ids = table.lookup(fp);
                EXPECT_TRUE(std::binary_search(ids.begin(), ids.end(), id));
            }
        }
        // Every run is non-empty, sorted and free of smallside ids.
        for (std::size_t k = 0; k < table.filter_count(); ++k) {
            const auto run = table.run(k);
            ASSERT_FALSE(run.empty());
            EXPECT_TRUE(std::is_sorted(run.begin(), run.end()));
            for (VectorId id : run) EXPECT_EQ(small.count(id), 0u);
        }
        EXPECT_TRUE(std::is_sorted(table.keys().begin(), table.keys().end()));
    }
    EXPECT_EQ(index.total_postings(), expected_total);
}

TEST(Build, EmptyVectorsGoToSmallside) {
    auto data = small_dataset(5);
    data[4] = SparseVector({}, kDim);
    data[9] = SparseVector({}, kDim);
    const auto index =
        FilterIndex::build(data, ThresholdScheme::adversarial(0.5), Distribution::uniform(kDim, kP), 3, 1);
    EXPECT_EQ(index.smallside(), (std::vector<VectorId>{4, 9}));
    // An empty query never matches an empty vector.
    const auto report = index.query(SparseVector({}, kDim), 0.5, QueryMode::best);
    EXPECT_FALSE(report.match.has_value());
    EXPECT_EQ(report.candidates_examined, 2u);
}

TEST(Build, RebuildIsByteIdentical) {
    EXPECT_EQ(small_index(3).serialize(), small_index(3).serialize());
    EXPECT_NE(small_index(3).serialize(), small_index(4).serialize());
}

TEST(Query, StoredVectorFindsItself) {
    auto data = small_dataset(8);
    data[20] = data[11];
    const auto index =
        FilterIndex::build(data, ThresholdScheme::adversarial(0.5), Distribution::uniform(kDim, kP), 12, 5);
    for (VectorId id : {0u, 11u, 20u, 33u}) {
        const auto report = index.query(data[id], QueryMode::best);
        ASSERT_TRUE(report.match.has_value()) << "id " << id;
        EXPECT_DOUBLE_EQ(report.match->similarity, 1.0);
        // Duplicates resolve to the lowest id.
        EXPECT_EQ(report.match->id, id == 20u ? 11u : id);
        EXPECT_EQ(report.repetitions_touched, index.repetitions());
    }
}

TEST(Query, NeverReportsAFalseMatch) {
    const auto index = small_index(9, 8);
    const auto dist = Distribution::uniform(kDim, kP);
    SeededRng rng(10);
    for (int t = 0; t < 200; ++t) {
        const auto& base = index.dataset()[rng.below(index.size())];
        const auto q = sample_correlated_query(dist, base, 0.8, rng);
        for (auto mode : {QueryMode::first, QueryMode::best}) {
            const auto report = index.query(q, 0.5, mode);
            if (!report.match) continue;
            const double b = braun_blanquet(index.dataset()[report.match->id], q);
            EXPECT_DOUBLE_EQ(report.match->similarity, b);
            EXPECT_GE(b, 0.5);
        }
    }
}

TEST(Query, BestModeAgreesWithFirstModeOnHits) {
    const auto index = small_index(12, 8);
    for (VectorId id = 0; id < 20; ++id) {
        const auto first = index.query(index.dataset()[id], QueryMode::first);
        const auto best = index.query(index.dataset()[id], QueryMode::best);
        EXPECT_EQ(first.match.has_value(), best.match.has_value());
        EXPECT_LE(first.candidates_examined, best.candidates_examined);
    }
}

TEST(Query, DimensionMismatchIsAnError) {
    EXPECT_THROW(small_index().query(SparseVector({1}, kDim + 1), 0.5), std::invalid_argument);
}

TEST(Query, CandidatesPerFilterStaySmallForUnrelatedQueries) {
    // Random queries share about p^2 d = 8 items with each stored vector, far below b1 |x|,
    // so a filter should rarely list more than a couple of ids.
    const auto index = small_index(13, 8);
    const auto dist = Distribution::uniform(kDim, kP);
    SeededRng rng(14);
    double candidates = 0.0;
    double filters = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto report = index.query(sample_vector(dist, rng), 0.5, QueryMode::best);
        candidates += static_cast<double>(report.candidates_examined);
        filters += static_cast<double>(report.filters_enumerated);
    }
    ASSERT_GT(filters, 0.0);
    EXPECT_LE(candidates / filters, 2.0);
}

TEST(Serialization, RoundTripPreservesBytesAndAnswers) {
    const auto index = small_index(15, 5);
    const auto bytes = index.serialize();
    const auto loaded = FilterIndex::deserialize(bytes);
    EXPECT_EQ(loaded.serialize(), bytes);
    for (VectorId id = 0; id < 30; ++id) {
        for (auto mode : {QueryMode::first, QueryMode::best}) {
            EXPECT_EQ(loaded.query(index.dataset()[id], mode), index.query(index.dataset()[id], mode));
        }
    }
}

TEST(Serialization, SaveAndLoadThroughAFile) {
    const auto index = small_index(16, 2);
    const auto path = std::filesystem::temp_directory_path() / "skewpath_test_index.bin";
    index.save(path);
    EXPECT_EQ(FilterIndex::load(path).serialize(), index.serialize());
    std::filesystem::remove(path);
    EXPECT_THROW(FilterIndex::load(path), std::runtime_error);
}

TEST(Serialization, HandAssembledEmptyIndex) {
    const auto bytes = empty_index_image();
    const auto index = FilterIndex::deserialize(bytes);
    EXPECT_EQ(index.dimension(), 2u);
    EXPECT_EQ(index.size(), 2u);
    EXPECT_EQ(index.repetitions(), 1u);
    EXPECT_EQ(index.master_seed(), 7u);
    EXPECT_EQ(index.total_postings(), 0u);
    EXPECT_EQ(index.serialize(), bytes);
    const auto report = index.query(SparseVector({0}, 2), 0.5, QueryMode::best);
    EXPECT_FALSE(report.match.has_value());
    EXPECT_EQ(report.candidates_examined, 0u);
}

TEST(Serialization, RejectsCorruptImages) {
    const auto good = small_index(17, 2).serialize();

    auto bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_THROW(FilterIndex::deserialize(bad_magic), FormatError);

    auto bad_version = good;
    bad_version[7] = 2;
    EXPECT_THROW(FilterIndex::deserialize(bad_version), FormatError);

    auto trailing = good;
    trailing.push_back(0);
    EXPECT_THROW(FilterIndex::deserialize(trailing), FormatError);

    // Every strict prefix is truncated somewhere.
    for (std::size_t len = 0; len < good.size(); len += 1 + len / 16) {
        EXPECT_THROW(FilterIndex::deserialize(std::span(good.data(), len)), FormatError) << "prefix " << len;
    }
    EXPECT_THROW(FilterIndex::deserialize(std::span(good.data(), good.size() - 1)), FormatError);
}

TEST(Serialization, RejectsInconsistentContents) {
    auto wrong_levels = empty_index_image();
    wrong_levels[20] = 9;
    EXPECT_THROW(FilterIndex::deserialize(wrong_levels), FormatError);

    auto bad_prob = empty_index_image();
    const double over = 1.5;
    std::memcpy(bad_prob.data() + 65, &over, 8);
    EXPECT_THROW(FilterIndex::deserialize(bad_prob), FormatError);

    auto item_out_of_range = empty_index_image();
    item_out_of_range[item_out_of_range.size() - 8] = 5;
    EXPECT_THROW(FilterIndex::deserialize(item_out_of_range), FormatError);

    Bytes b;
    b.data = empty_index_image();
    b.data.resize(b.data.size() - 4);
    b.u32(2);
    b.u32(1);
    b.u32(0);
    EXPECT_THROW(FilterIndex::deserialize(b.data), FormatError);
}

}  // namespace
}  // namespace skewpath
