#pragma once

#include "skewpath/index.hpp"
#include "skewpath/model.hpp"
#include "skewpath/path_engine.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace skewpath {

/// Sample mean with its standard error (sample standard deviation / sqrt(trials)).
struct EstimateWithCI {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;

    /// mean - k * std_error, the value compared against a theoretical floor.
    double lower(double k = 3.0) const noexcept { return mean - k * std_error; }
    double upper(double k = 3.0) const noexcept { return mean + k * std_error; }
};

/// Builds an estimate from per-trial samples with compensated sums.
EstimateWithCI summarize(std::span<const double> samples);

/// Exact linear scan. first: lowest id with B >= b1. best: highest B >= b1, lowest id on ties.
/// Pairs of empty vectors never match.
std::optional<Match> brute_force_query(std::span<const SparseVector> dataset, const SparseVector& q, double b1,
                                       QueryMode mode = QueryMode::best);

struct BranchingCheck {
    bool holds = false;
    double sum = 0.0;
    double margin = 0.0;  // sum - 1
};

/// sum over i in (x ∩ q) \ v of min(s(x, j, i), s(q, j, i)) with j = |v|, each threshold clamped.
/// `holds` allows 1e-12 of rounding below 1 so that B(x, q) == b1 exactly counts as holding.
BranchingCheck check_branching_condition(const SparseVector& x, const SparseVector& q, const Path& v,
                                         const ThresholdScheme& scheme, const Distribution& dist,
                                         std::size_t x_size, std::size_t q_size);

/// Fraction of hash families (repetition t = 0..trials-1 under `seed`) for which F(x) and F(q)
/// share a fingerprint. Requires trials >= 100.
EstimateWithCI estimate_collision_probability(const SparseVector& x, const SparseVector& q,
                                              const ThresholdScheme& scheme, const Distribution& dist,
                                              std::uint64_t n, std::uint64_t trials, std::uint64_t seed);

/// Mean |F(x)| for a fixed x over fresh hash families. Requires trials >= 30.
EstimateWithCI estimate_filter_count(const SparseVector& x, const ThresholdScheme& scheme, const Distribution& dist,
                                     std::uint64_t n, std::uint64_t trials, std::uint64_t seed);

/// Mean |F(x)| over fresh pairs (x ~ dist, hash family). Requires trials >= 30.
EstimateWithCI estimate_filter_count(const ThresholdScheme& scheme, const Distribution& dist, std::uint64_t n,
                                     std::uint64_t trials, std::uint64_t seed);

struct Quantiles {
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
};

struct SeparationReport {
    double mean_correlated = 0.0;
    double mean_uncorrelated = 0.0;
    Quantiles correlated;
    Quantiles uncorrelated;
    /// Fraction of correlated pairs with B < close_threshold.
    double correlated_below = 0.0;
    /// Fraction of uncorrelated pairs with B > far_threshold.
    double uncorrelated_above = 0.0;
    double close_threshold = 0.0;
    double far_threshold = 0.0;
    std::uint64_t pairs = 0;
    std::vector<double> correlated_samples;
    std::vector<double> uncorrelated_samples;
};

/// Samples `pairs` correlated pairs (x ~ dist, q ~ D_alpha(x)) and as many uncorrelated pairs
/// (x' ~ dist independent of q). Thresholds are alpha/1.3 and alpha/1.5.
/// Pairs where both sides are empty get similarity 0.
SeparationReport measure_similarity_separation(const Distribution& dist, double alpha, std::uint64_t pairs,
                                               std::uint64_t seed);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double level);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least-squares fit of log2(y) against log2(x). Needs two or more distinct x and positive y.
LineFit fit_log_log(std::span<const double> x, std::span<const double> y);

}  // namespace skewpath
