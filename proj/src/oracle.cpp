#include "skewpath/oracle.hpp"

#include "skewpath/numeric.hpp"
#include "skewpath/parallel.hpp"
#include "skewpath/rng.hpp"
#include "skewpath/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace skewpath {

namespace {

// Separates the vector-sampling streams from the hash-family keys drawn under the same seed.
constexpr std::uint64_t kSampleSalt = 0x94D049BB133111EBULL;

double similarity_or_zero(const SparseVector& x, const SparseVector& q) {
    if (x.empty() && q.empty()) return 0.0;
    return braun_blanquet(x, q);
}

bool share_fingerprint(std::vector<std::uint64_t> a, std::vector<std::uint64_t> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia == *ib) return true;
        if (*ia < *ib) {
            ++ia;
        } else {
            ++ib;
        }
    }
    return false;
}

}  // namespace

EstimateWithCI summarize(std::span<const double> samples) {
    EstimateWithCI est;
    est.trials = samples.size();
    if (samples.empty()) return est;
    est.mean = compensated_sum(samples) / static_cast<double>(samples.size());
    if (samples.size() < 2) return est;
    CompensatedSum sq;
    for (double s : samples) sq.add((s - est.mean) * (s - est.mean));
    const double variance = sq.value() / static_cast<double>(samples.size() - 1);
    est.std_error = std::sqrt(variance / static_cast<double>(samples.size()));
    return est;
}

std::optional<Match> brute_force_query(std::span<const SparseVector> dataset, const SparseVector& q, double b1,
                                       QueryMode mode) {
    std::optional<Match> best;
    for (std::size_t k = 0; k < dataset.size(); ++k) {
        const auto& x = dataset[k];
        if (x.dimension() != q.dimension()) throw std::invalid_argument("brute_force_query: dimension mismatch");
        if (x.empty() && q.empty()) continue;
        const double sim = braun_blanquet(x, q);
        if (sim < b1) continue;
        if (!best || sim > best->similarity) best = Match{static_cast<VectorId>(k), sim};
        if (mode == QueryMode::first) break;
    }
    return best;
}

BranchingCheck check_branching_condition(const SparseVector& x, const SparseVector& q, const Path& v,
                                         const ThresholdScheme& scheme, const Distribution& dist,
                                         std::size_t x_size, std::size_t q_size) {
    const auto j = static_cast<std::uint32_t>(v.size());
    CompensatedSum sum;
    for (ItemId i : x.items()) {
        if (!q.contains(i)) continue;
        if (std::find(v.nodes.begin(), v.nodes.end(), i) != v.nodes.end()) continue;
        sum.add(std::min(threshold(scheme, dist, x_size, j, i), threshold(scheme, dist, q_size, j, i)));
    }
    BranchingCheck check;
    check.sum = sum.value();
    check.margin = check.sum - 1.0;
    check.holds = check.sum >= 1.0 - 1e-12;
    return check;
}

EstimateWithCI estimate_collision_probability(const SparseVector& x, const SparseVector& q,
                                              const ThresholdScheme& scheme, const Distribution& dist,
                                              std::uint64_t n, std::uint64_t trials, std::uint64_t seed) {
    if (trials < 100) throw std::invalid_argument("estimate_collision_probability: needs at least 100 trials");
    const std::uint32_t levels = hash_levels_for(n);
    std::vector<double> hits(trials, 0.0);
    parallel_for(trials, [&](std::size_t t) {
        const HashFamily family(seed, static_cast<std::uint32_t>(t), levels);
        hits[t] = share_fingerprint(enumerate_filter_fingerprints(x, scheme, dist, family, n),
                                    enumerate_filter_fingerprints(q, scheme, dist, family, n))
                      ? 1.0
                      : 0.0;
    });
    return summarize(hits);
}

EstimateWithCI estimate_filter_count(const SparseVector& x, const ThresholdScheme& scheme, const Distribution& dist,
                                     std::uint64_t n, std::uint64_t trials, std::uint64_t seed) {
    if (trials < 30) throw std::invalid_argument("estimate_filter_count: needs at least 30 trials");
    const std::uint32_t levels = hash_levels_for(n);
    std::vector<double> counts(trials, 0.0);
    parallel_for(trials, [&](std::size_t t) {
        const HashFamily family(seed, static_cast<std::uint32_t>(t), levels);
        counts[t] = static_cast<double>(enumerate_filter_fingerprints(x, scheme, dist, family, n).size());
    });
    return summarize(counts);
}

EstimateWithCI estimate_filter_count(const ThresholdScheme& scheme, const Distribution& dist, std::uint64_t n,
                                     std::uint64_t trials, std::uint64_t seed) {
    if (trials < 30) throw std::invalid_argument("estimate_filter_count: needs at least 30 trials");
    const std::uint32_t levels = hash_levels_for(n);
    std::vector<double> counts(trials, 0.0);
    parallel_for(trials, [&](std::size_t t) {
        SeededRng rng(seed ^ kSampleSalt, t);
        const SparseVector x = sample_vector(dist, rng);
        const HashFamily family(seed, static_cast<std::uint32_t>(t), levels);
        counts[t] = static_cast<double>(enumerate_filter_fingerprints(x, scheme, dist, family, n).size());
    });
    return summarize(counts);
}

double quantile(std::vector<double> values, double level) {
    if (values.empty()) throw std::invalid_argument("quantile: no values");
    if (!(level >= 0.0 && level <= 1.0)) throw std::invalid_argument("quantile: level outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = level * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

SeparationReport measure_similarity_separation(const Distribution& dist, double alpha, std::uint64_t pairs,
                                               std::uint64_t seed) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("measure_similarity_separation: alpha outside [0, 1]");
    if (pairs == 0) throw std::invalid_argument("measure_similarity_separation: pairs must be positive");
    SeparationReport rep;
    rep.pairs = pairs;
    rep.close_threshold = alpha / 1.3;
    rep.far_threshold = alpha / 1.5;
    rep.correlated_samples.assign(pairs, 0.0);
    rep.uncorrelated_samples.assign(pairs, 0.0);

    parallel_for(pairs, [&](std::size_t k) {
        SeededRng x_rng(seed, 3 * k);
        SeededRng q_rng(seed, 3 * k + 1);
        SeededRng far_rng(seed, 3 * k + 2);
        const SparseVector x = sample_vector(dist, x_rng);
        const SparseVector q = sample_correlated_query(dist, x, alpha, q_rng);
        const SparseVector far = sample_vector(dist, far_rng);
        rep.correlated_samples[k] = similarity_or_zero(x, q);
        rep.uncorrelated_samples[k] = similarity_or_zero(far, q);
    });

    const auto count = static_cast<double>(pairs);
    rep.mean_correlated = compensated_sum(rep.correlated_samples) / count;
    rep.mean_uncorrelated = compensated_sum(rep.uncorrelated_samples) / count;
    rep.correlated = {quantile(rep.correlated_samples, 0.05), quantile(rep.correlated_samples, 0.5),
                      quantile(rep.correlated_samples, 0.95)};
    rep.uncorrelated = {quantile(rep.uncorrelated_samples, 0.05), quantile(rep.uncorrelated_samples, 0.5),
                        quantile(rep.uncorrelated_samples, 0.95)};
    rep.correlated_below = static_cast<double>(std::count_if(rep.correlated_samples.begin(), rep.correlated_samples.end(),
                                                             [&](double b) { return b < rep.close_threshold; })) /
                           count;
    rep.uncorrelated_above =
        static_cast<double>(std::count_if(rep.uncorrelated_samples.begin(), rep.uncorrelated_samples.end(),
                                          [&](double b) { return b > rep.far_threshold; })) /
        count;
    return rep;
}

LineFit fit_log_log(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_log_log: need two or more points");
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0 && y[k] > 0.0)) throw std::invalid_argument("fit_log_log: values must be positive");
        lx.push_back(std::log2(x[k]));
        ly.push_back(std::log2(y[k]));
    }
    const double m = static_cast<double>(lx.size());
    const double mx = compensated_sum(lx) / m;
    const double my = compensated_sum(ly) / m;
    CompensatedSum sxy;
    CompensatedSum sxx;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy.add((lx[k] - mx) * (ly[k] - my));
        sxx.add((lx[k] - mx) * (lx[k] - mx));
    }
    if (sxx.value() == 0.0) throw std::invalid_argument("fit_log_log: x values are all equal");
    LineFit fit;
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = my - fit.slope * mx;
    return fit;
}

}  // namespace skewpath
