#pragma once

#include "skewpath/model.hpp"
#include "skewpath/path_engine.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace skewpath {

enum class QueryMode { first, best };

struct Match {
    VectorId id = 0;
    double similarity = 0.0;

    friend bool operator==(const Match&, const Match&) = default;
};

struct QueryReport {
    std::optional<Match> match;
    /// Postings scanned, counting an id once per filter (and repetition) that lists it,
    /// plus every smallside id.
    std::uint64_t candidates_examined = 0;
    std::uint64_t filters_enumerated = 0;
    std::uint32_t repetitions_touched = 0;

    friend bool operator==(const QueryReport&, const QueryReport&) = default;
};

/// Fingerprint -> vector ids for one repetition, stored as sorted runs (CSR).
class InvertedTable {
public:
    std::span<const VectorId> lookup(std::uint64_t fingerprint) const noexcept;

    std::size_t filter_count() const noexcept { return keys_.size(); }
    std::size_t posting_count() const noexcept { return ids_.size(); }
    std::span<const std::uint64_t> keys() const noexcept { return keys_; }
    std::span<const VectorId> run(std::size_t k) const noexcept {
        return {ids_.data() + offsets_[k], ids_.data() + offsets_[k + 1]};
    }

    /// Builds from (fingerprint, id) pairs; sorts and drops exact duplicates.
    static InvertedTable from_pairs(std::vector<std::pair<std::uint64_t, VectorId>> pairs);

    friend bool operator==(const InvertedTable&, const InvertedTable&) = default;

private:
    friend class FilterIndex;

    std::vector<std::uint64_t> keys_;
    std::vector<std::uint64_t> offsets_{0};
    std::vector<VectorId> ids_;
};

/// ceil(log2 n) * ceil(ln(1/fail_prob)); at least 1.
std::uint32_t default_repetitions(std::uint64_t n, double fail_prob = 0.05);

/// Vectors answered by linear scan instead of filters: empty vectors, adversarial b1 |x| <= 1,
/// correlated |x| < sum_p * sqrt(3)/2.
bool routes_to_smallside(const ThresholdScheme& scheme, const Distribution& dist, std::size_t x_size) noexcept;

/// R independent chosen-path inverted indexes over one dataset.
class FilterIndex {
public:
    /// Throws std::invalid_argument for fewer than 2 vectors, more than 2^32 - 1 vectors,
    /// dimension mismatches, or R == 0.
    static FilterIndex build(std::vector<SparseVector> dataset, ThresholdScheme scheme, Distribution dist,
                             std::uint32_t repetitions, std::uint64_t master_seed);

    /// Looks up F(q) in each repetition and verifies candidates exactly against b1.
    /// first: stop at the first candidate with B >= b1. best: scan everything, keep the
    /// highest similarity (lowest id on ties).
    QueryReport query(const SparseVector& q, double b1, QueryMode mode = QueryMode::first) const;

    /// Uses the scheme's b1.
    QueryReport query(const SparseVector& q, QueryMode mode = QueryMode::first) const {
        return query(q, scheme_.b1(), mode);
    }

    std::uint32_t dimension() const noexcept { return dist_.dimension(); }
    std::uint64_t size() const noexcept { return dataset_.size(); }
    std::uint32_t repetitions() const noexcept { return static_cast<std::uint32_t>(tables_.size()); }
    std::uint64_t master_seed() const noexcept { return master_seed_; }
    const ThresholdScheme& scheme() const noexcept { return scheme_; }
    const Distribution& distribution() const noexcept { return dist_; }
    const std::vector<SparseVector>& dataset() const noexcept { return dataset_; }
    const std::vector<VectorId>& smallside() const noexcept { return smallside_; }
    const InvertedTable& table(std::uint32_t r) const { return tables_.at(r); }
    const HashFamily& family(std::uint32_t r) const { return families_.at(r); }

    /// sum over repetitions and vectors of |F(x)|.
    std::uint64_t total_postings() const noexcept;

    /// Little-endian binary encoding; layout in docs/index_format.md.
    std::vector<std::uint8_t> serialize() const;
    void save(const std::filesystem::path& path) const;

    /// Throws FormatError on bad magic, unsupported version, truncation, trailing bytes or
    /// inconsistent contents.
    static FilterIndex deserialize(std::span<const std::uint8_t> bytes);
    static FilterIndex load(const std::filesystem::path& path);

private:
    FilterIndex() = default;

    std::vector<SparseVector> dataset_;
    ThresholdScheme scheme_;
    Distribution dist_;
    std::uint64_t master_seed_ = 0;
    std::vector<HashFamily> families_;
    std::vector<InvertedTable> tables_;
    std::vector<VectorId> smallside_;
};

}  // namespace skewpath
