#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace skewpath {

using ItemId = std::uint32_t;
using VectorId = std::uint32_t;

/// A boolean vector in {0,1}^d stored as its strictly increasing set of item indices.
class SparseVector {
public:
    SparseVector() = default;

    /// Throws std::invalid_argument unless `items` is strictly increasing and every item < d.
    SparseVector(std::vector<ItemId> items, std::uint32_t d);

    /// Sorts and deduplicates `items` first.
    static SparseVector from_unsorted(std::vector<ItemId> items, std::uint32_t d);

    std::span<const ItemId> items() const noexcept { return items_; }
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    std::uint32_t dimension() const noexcept { return d_; }
    bool contains(ItemId i) const noexcept;

    friend bool operator==(const SparseVector&, const SparseVector&) = default;

private:
    std::vector<ItemId> items_;
    std::uint32_t d_ = 0;
};

/// |x ∩ q| by sorted merge.
std::size_t intersection_size(const SparseVector& x, const SparseVector& q) noexcept;

/// Braun-Blanquet similarity |x∩q| / max(|x|,|q|).
/// Throws std::invalid_argument on dimension mismatch or when both vectors are empty.
double braun_blanquet(const SparseVector& x, const SparseVector& q);

/// Item-level probabilities p_1..p_d of a product distribution over {0,1}^d.
///
/// Every p_i lies in (0, 1]. The stricter p_i <= 1/2 assumed by the index is checked
/// by validate_model rather than here, so raw empirical frequencies stay representable.
class Distribution {
public:
    Distribution() = default;
    explicit Distribution(std::vector<double> p);

    static Distribution uniform(std::uint32_t d, double p);

    std::uint32_t dimension() const noexcept { return static_cast<std::uint32_t>(p_.size()); }
    double p(ItemId i) const noexcept { return p_[i]; }
    std::span<const double> probs() const noexcept { return p_; }
    double sum_p() const noexcept { return sum_p_; }

    /// log2(1/p_i), cached; the path stopping rule accumulates these.
    double neg_log2(ItemId i) const noexcept { return neg_log2_[i]; }

    friend bool operator==(const Distribution& a, const Distribution& b) noexcept { return a.p_ == b.p_; }

private:
    std::vector<double> p_;
    std::vector<double> neg_log2_;
    double sum_p_ = 0.0;
};

/// Text format: first line d, then d lines with one probability each.
Distribution read_distribution(std::istream& in);
Distribution read_distribution(const std::filesystem::path& path);
void write_distribution(std::ostream& out, const Distribution& dist);

struct ModelParams {
    std::uint64_t n = 0;
    std::uint32_t log_n = 1;       // ceil(log2 n), at least 1
    double big_c = 0.0;            // sum_p / log_n
    std::optional<double> alpha;   // correlated regime only
    double b1 = 0.0;

    /// Derives log_n and C from the distribution. b1 defaults to alpha/1.3 when alpha is
    /// given and b1 is not. Throws std::invalid_argument for n < 2 or when neither is given.
    static ModelParams derive(const Distribution& dist, std::uint64_t n,
                              std::optional<double> alpha, std::optional<double> b1 = std::nullopt);
};

/// b1 used for correlated queries when none is supplied.
inline double correlated_default_b1(double alpha) noexcept { return alpha / 1.3; }

enum class ViolationKind {
    probability_above_half,
    probability_above_half_alpha,
    c_alpha_below_15,
    sum_below_c_log_n,
};

struct Violation {
    ViolationKind kind;
    std::string message;
};

/// Lists every model assumption the (distribution, params) pair breaks. Empty means conformant.
std::vector<Violation> validate_model(const Distribution& dist, const ModelParams& params);

enum class TailSide { upper, lower };

/// Weighted Chernoff bound for sums of independent [0, a_max]-valued variables:
/// upper: exp(-eps^2 E / (3a)), lower: exp(-eps^2 E / (2a)).
double chernoff_tail(double expected, double epsilon, double a_max, TailSide side);

}  // namespace skewpath
