#pragma once

#include "skewpath/model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace skewpath {

/// Transactions over densely re-indexed items (0..d-1 in order of first appearance).
struct TransactionDataset {
    std::uint32_t d = 0;
    std::vector<SparseVector> transactions;
    std::vector<std::uint64_t> counts;        // c_i: transactions containing item i
    std::vector<std::uint64_t> original_ids;  // item i was read as original_ids[i]

    std::uint64_t n() const noexcept { return transactions.size(); }
};

/// Whitespace-separated non-negative integer ids per line. Lines starting with '#' and blank lines
/// are skipped; repeated ids within a line collapse. Throws ParseError with the line number on a
/// bad token and ParseError("empty dataset") when no transaction remains.
TransactionDataset load_transactions(std::istream& in);
TransactionDataset load_transactions(const std::filesystem::path& path);

/// Builds a dataset from vectors already indexed over [0, d). Items never seen are dropped
/// and the rest re-indexed by first appearance, as load_transactions would.
TransactionDataset make_transactions(const std::vector<SparseVector>& vectors);

struct ProfileRow {
    std::uint32_t rank = 0;  // 1-based j
    double p = 0.0;          // c_j / n, nonincreasing in j
    double rank_fraction = 0.0;  // j / d
    double log_d_rank = 0.0;     // ln j / ln d
    double y = 0.0;              // 1 + ln p / ln n
};

/// Requires n >= 2 and d >= 2.
std::vector<ProfileRow> frequency_profile(const TransactionDataset& ds);

struct IndependenceRatio {
    std::uint32_t k = 0;
    double observed = 0.0;   // sum_t C(|t|, k)
    double estimated = 0.0;  // n * e_k(p_1..p_d)
    double ratio = 0.0;
};

/// k must be 2 or 3. Throws std::domain_error when the estimate is 0.
IndependenceRatio independence_ratio(const TransactionDataset& ds, std::uint32_t k);

struct FittedDistribution {
    Distribution dist;
    std::uint32_t clamped = 0;  // items whose frequency exceeded 1/2 and was clamped
};

/// p_i = c_i / n; with clamp, frequencies above 1/2 become 1/2.
FittedDistribution fit_distribution(const TransactionDataset& ds, bool clamp);

}  // namespace skewpath
