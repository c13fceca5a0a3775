#pragma once

#include "skewpath/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace skewpath {

/// An ordered sequence of distinct items (i_1..i_j) plus sum_k log2(1/p_{i_k}).
struct Path {
    std::vector<ItemId> nodes;
    double log_prod = 0.0;

    std::size_t size() const noexcept { return nodes.size(); }
    friend bool operator==(const Path& a, const Path& b) noexcept { return a.nodes == b.nodes; }
    friend auto operator<=>(const Path& a, const Path& b) noexcept { return a.nodes <=> b.nodes; }
};

/// Builds a Path with log_prod computed from `dist`.
Path make_path(std::vector<ItemId> nodes, const Distribution& dist);

enum class SchemeKind : std::uint8_t { adversarial = 0, correlated = 1 };

/// Sampling-threshold rule s(x, j, i).
///
/// adversarial: s = 1 / (b1 |x| - j), depends only on |x| and the path length j.
/// correlated:  s = (1 + delta) / (p_hat_i * c_log_n - j), with p_hat_i = p_i (1 - alpha) + alpha
///              and delta = 3 / sqrt(alpha C). Independent of |x|.
/// Either way the value is clamped into [0, 1]; a non-positive denominator gives 1.
class ThresholdScheme {
public:
    static ThresholdScheme adversarial(double b1);

    /// `c_log_n` is the C log n product the denominator uses (sum_p under the model's binding).
    /// b1 (the verification threshold carried along for queries) defaults to alpha / 1.3.
    static ThresholdScheme correlated(const Distribution& dist, double alpha, double big_c, double c_log_n,
                                      std::optional<double> b1 = std::nullopt);

    /// C and c_log_n taken from the params (C = sum_p / log_n, c_log_n = sum_p).
    static ThresholdScheme correlated(const Distribution& dist, const ModelParams& params);

    SchemeKind kind() const noexcept { return kind_; }
    double b1() const noexcept { return b1_; }
    double alpha() const noexcept { return alpha_; }
    double delta() const noexcept { return delta_; }
    double big_c() const noexcept { return big_c_; }
    double c_log_n() const noexcept { return c_log_n_; }
    double p_hat(ItemId i) const noexcept { return p_hat_[i]; }
    /// Dimension the correlated p_hat table was built for; 0 for adversarial schemes.
    std::size_t dimension() const noexcept { return p_hat_.size(); }

    /// Threshold before clamping; may be negative or above 1.
    double raw(std::size_t x_size, std::uint32_t j, ItemId i) const noexcept;

    /// s(x, j, i) clamped into [0, 1].
    double operator()(std::size_t x_size, std::uint32_t j, ItemId i) const noexcept;

    /// Adversarial only.
    ThresholdScheme with_b1(double b1) const;

private:
    SchemeKind kind_ = SchemeKind::adversarial;
    double b1_ = 0.0;
    double alpha_ = 0.0;
    double delta_ = 0.0;
    double big_c_ = 0.0;
    double c_log_n_ = 0.0;
    std::vector<double> p_hat_;
};

/// Free-function form of ThresholdScheme::operator(); `dist` is only used for a dimension check.
double threshold(const ThresholdScheme& scheme, const Distribution& dist, std::size_t x_size, std::uint32_t j,
                 ItemId i);

inline constexpr std::uint64_t kEmptyPathFingerprint = 0x6A09E667F3BCC909ULL;

/// Order-sensitive 64-bit fingerprint of a path; fingerprint_extend(fp(v), i) == fp(v∘i).
std::uint64_t fingerprint_extend(std::uint64_t prefix, ItemId item) noexcept;
std::uint64_t path_fingerprint(std::span<const ItemId> nodes) noexcept;
inline std::uint64_t path_fingerprint(const Path& path) noexcept { return path_fingerprint(path.nodes); }

inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

/// Number of pre-committed hash levels for a dataset of n vectors: ceil(log2 n) + 1.
std::uint32_t hash_levels_for(std::uint64_t n) noexcept;

/// h_1..h_k for one repetition. Level j maps a fingerprint split into 32-bit halves (hi, lo) to
/// ((a_j hi + c_j lo + b_j) mod 2^61-1) scaled to [0, 1), which is pairwise independent over
/// distinct fingerprints.
class HashFamily {
public:
    HashFamily(std::uint64_t master_seed, std::uint32_t repetition, std::uint32_t levels);

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint32_t repetition() const noexcept { return repetition_; }
    std::uint32_t levels() const noexcept { return static_cast<std::uint32_t>(keys_.size()); }

    /// Raw value in [0, 2^61 - 1) for level in [1, levels()].
    std::uint64_t hash_raw(std::uint32_t level, std::uint64_t fingerprint) const noexcept;

    /// Value in [0, 1).
    double hash(std::uint32_t level, std::uint64_t fingerprint) const noexcept;

private:
    struct LevelKey {
        std::uint64_t a_hi;
        std::uint64_t a_lo;
        std::uint64_t b;
    };

    std::uint64_t master_seed_;
    std::uint32_t repetition_;
    std::vector<LevelKey> keys_;
};

/// h_level(path). Throws std::invalid_argument unless level == path length and level <= levels().
double path_hash(const HashFamily& family, std::uint32_t level, const Path& path);

/// F(x): every path reachable by the recursion
///   F_{j+1} = { v∘i : v ∈ F_j, prod p(v) > 1/n, i ∈ x \ v, h_{j+1}(v∘i) < s(x, j, i) }
/// that satisfies prod p <= 1/n, in depth-first order. Empty x yields the empty set.
///
/// The stopping test is log-domain: a path stops once log_prod >= log2(n) - 1e-9.
/// Throws std::domain_error if a path would outgrow the family's levels (only possible when
/// some p_i > 1/2).
std::vector<Path> enumerate_filters(const SparseVector& x, const ThresholdScheme& scheme, const Distribution& dist,
                                    const HashFamily& family, std::uint64_t n);

/// Fingerprints of enumerate_filters(...) in the same order, without materializing paths.
std::vector<std::uint64_t> enumerate_filter_fingerprints(const SparseVector& x, const ThresholdScheme& scheme,
                                                         const Distribution& dist, const HashFamily& family,
                                                         std::uint64_t n);

/// True iff a path with this log_prod has reached the stopping rule for n.
bool path_stops(double log_prod, std::uint64_t n) noexcept;

}  // namespace skewpath
