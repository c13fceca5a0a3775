#include "skewpath/bench.hpp"

#include "skewpath/index.hpp"
#include "skewpath/model.hpp"
#include "skewpath/numeric.hpp"
#include "skewpath/oracle.hpp"
#include "skewpath/path_engine.hpp"
#include "skewpath/rho_solver.hpp"
#include "skewpath/rng.hpp"
#include "skewpath/sampling.hpp"
#include "skewpath/skew_analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace skewpath {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v, int digits = 4) {
    std::ostringstream out;
    out.precision(digits);
    out << v;
    return out.str();
}

// Acceptance #1: golden exponents for uniform p.
CriterionResult rho_golden(const BenchOptions&) {
    CriterionResult res{1, "rho golden values", false, "", 0.0, 1.0, {}};
    struct Case {
        double p;
        double b1;
        double expected;
    };
    const Case cases[] = {{1.0 / 8, 1.0 / 3, 0.5283}, {1.0 / 4, 2.0 / 3, 0.2925}, {1.0 / 8, 2.0 / 3, 0.1949}};
    bool ok = true;
    std::ostringstream detail;
    for (const auto& c : cases) {
        const double rho = rho_adversarial_preprocess(Distribution::uniform(64, c.p), c.b1).rho;
        ok = ok && std::abs(rho - c.expected) <= 1e-3;
        res.metrics.emplace_back("rho_p" + fmt(c.p, 3) + "_b" + fmt(c.b1, 3), rho);
        detail << fmt(rho) << " vs " << c.expected << "; ";
    }
    res.passed = ok;
    res.detail = detail.str() + "tolerance 1e-3";
    return res;
}

std::vector<double> random_probs(SeededRng& rng, std::size_t count) {
    std::vector<double> probs(count);
    // Log-uniform on [2^-20, 1/2] so the instances span heavy skew.
    for (auto& p : probs) p = std::exp2(-1.0 - 19.0 * rng.uniform01());
    return probs;
}

// Acceptance #2: bracket ordering, secant monotonicity and the closed form.
CriterionResult solver_consistency(const BenchOptions& options) {
    CriterionResult res{2, "solver consistency", false, "", 0.0, 10.0, {}};
    constexpr double kSlack = 1e-12;
    std::uint64_t bad_bracket = 0;
    std::uint64_t bad_secant = 0;
    std::uint64_t max_steps = 0;
    double worst_gap = 0.0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        SeededRng rng(options.seed, t);
        const std::size_t count = 2 + rng.below(63);
        auto probs = random_probs(rng, count);
        RhoProblem problem = [&] {
            if (t % 2 == 0) {
                double mean = 0.0;
                for (double p : probs) mean += p;
                mean /= static_cast<double>(count);
                const double b1 = mean + (1.0 - mean) * (0.02 + 0.96 * rng.uniform01());
                return RhoProblem::plain(probs, b1 * static_cast<double>(count));
            }
            const double alpha = 0.05 + 0.9 * rng.uniform01();
            std::vector<double> weights;
            double sum_p = 0.0;
            for (double p : probs) {
                weights.push_back(p / (p * (1.0 - alpha) + alpha));
                sum_p += p;
            }
            return RhoProblem::weighted(probs, weights, sum_p);
        }();
        const RhoSolution sol = solve_rho(problem);
        const auto secant = rho_secant_sequence(problem);
        const double taylor = rho_lower_taylor(problem);
        if (taylor > sol.rho + kSlack) ++bad_bracket;
        bool secant_ok = secant.size() <= 50;
        for (std::size_t k = 0; k < secant.size(); ++k) {
            if (secant[k] < sol.rho - kSlack) secant_ok = false;
            if (k > 0 && secant[k] > secant[k - 1] + kSlack) secant_ok = false;
        }
        const double gap = std::abs(secant.back() - sol.rho);
        if (gap > 1e-6) secant_ok = false;
        worst_gap = std::max(worst_gap, gap);
        max_steps = std::max<std::uint64_t>(max_steps, secant.size());
        if (!secant_ok) ++bad_secant;
    }

    double worst_quadratic = 0.0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        SeededRng rng(options.seed ^ 0x5157ULL, t);
        const std::uint64_t qa = 1 + rng.below(100);
        const std::uint64_t qb = 1 + rng.below(100);
        const double pa = 0.01 + 0.49 * rng.uniform01();
        const double q = static_cast<double>(qa + qb);
        const double mean = (static_cast<double>(qa) * pa + static_cast<double>(qb) * pa * pa) / q;
        const double b1 = mean + (1.0 - mean) * (0.02 + 0.96 * rng.uniform01());
        std::vector<double> probs(qa, pa);
        probs.insert(probs.end(), qb, pa * pa);
        const double bisect = solve_rho(RhoProblem::plain(probs, b1 * q)).rho;
        worst_quadratic = std::max(worst_quadratic, std::abs(bisect - rho_quadratic_exact(qa, qb, pa, b1)));
    }

    res.metrics = {{"bracket_violations", static_cast<double>(bad_bracket)},
                   {"secant_violations", static_cast<double>(bad_secant)},
                   {"max_secant_steps", static_cast<double>(max_steps)},
                   {"worst_secant_gap", worst_gap},
                   {"worst_quadratic_gap", worst_quadratic}};
    res.passed = bad_bracket == 0 && bad_secant == 0 && worst_quadratic <= 1e-9;
    res.detail = "bracket violations " + std::to_string(bad_bracket) + ", secant violations " +
                 std::to_string(bad_secant) + ", worst closed-form gap " + fmt(worst_quadratic, 3) + " (limit 1e-9)";
    return res;
}

// Acceptance #3: Pr[F(x) ∩ F(q) != ∅] against the 1/(1 + log2 n) floor.
CriterionResult collision_floor(const BenchOptions& options) {
    CriterionResult res{3, "collision floor", false, "", 0.0, 120.0, {}};
    constexpr std::uint64_t n = 1024;
    const auto dist = Distribution::uniform(256, 0.25);
    std::vector<ItemId> items(64);
    for (ItemId i = 0; i < 64; ++i) items[i] = i;
    const SparseVector x(items, 256);
    const auto scheme = ThresholdScheme::adversarial(0.5);
    const auto est = estimate_collision_probability(x, x, scheme, dist, n, 2000, options.seed);
    const double floor = 1.0 / 11.0;
    res.metrics = {{"mean", est.mean}, {"stderr", est.std_error}, {"floor", floor}};
    res.passed = est.mean >= floor - 3.0 * est.std_error;
    res.detail = "empirical " + fmt(est.mean) + " +- " + fmt(est.std_error, 2) + " vs floor 1/11";
    return res;
}

struct CorrelatedModel {
    Distribution dist;
    ModelParams params;
    double alpha = 2.0 / 3.0;
};

CorrelatedModel correlated_model() {
    CorrelatedModel m;
    m.dist = Distribution::uniform(8192, 1.0 / 16);
    m.params = ModelParams::derive(m.dist, 256, m.alpha);
    return m;
}

// Acceptance #4: planted-partner recall through the full index.
CriterionResult correlated_recall(const BenchOptions& options) {
    CriterionResult res{4, "correlated end-to-end recall", false, "", 0.0, 300.0, {}};
    const auto m = correlated_model();
    const auto data = sample_dataset(m.dist, m.params.n, options.seed);
    const auto scheme = ThresholdScheme::correlated(m.dist, m.params);
    const std::uint32_t reps = default_repetitions(m.params.n);
    const auto index = FilterIndex::build(data, scheme, m.dist, reps, options.seed);
    const double b1 = scheme.b1();

    std::uint64_t found = 0;
    std::uint64_t matches = 0;
    std::uint64_t false_accepts = 0;
    for (VectorId id = 0; id < 100; ++id) {
        SeededRng rng(options.seed ^ 0xC0FFEEULL, id);
        const auto q = sample_correlated_query(m.dist, data[id], m.alpha, rng);
        const auto report = index.query(q, b1);
        if (!report.match) continue;
        ++matches;
        if (report.match->id == id) ++found;
        if (braun_blanquet(data[report.match->id], q) < b1) ++false_accepts;
    }
    const double recall = static_cast<double>(found) / 100.0;
    res.metrics = {{"recall", recall},
                   {"repetitions", reps},
                   {"matches", static_cast<double>(matches)},
                   {"false_accepts", static_cast<double>(false_accepts)}};
    res.passed = recall >= 0.9 && false_accepts == 0;
    res.detail = "recall " + fmt(recall) + " (need >= 0.9) with R=" + std::to_string(reps) + ", false accepts " +
                 std::to_string(false_accepts);
    return res;
}

// Acceptance #5: correlated versus independent similarity populations.
CriterionResult similarity_separation(const BenchOptions& options) {
    CriterionResult res{5, "similarity separation", false, "", 0.0, 60.0, {}};
    const auto m = correlated_model();
    const auto rep = measure_similarity_separation(m.dist, m.alpha, 500, options.seed);
    res.metrics = {{"mean_correlated", rep.mean_correlated},
                   {"mean_uncorrelated", rep.mean_uncorrelated},
                   {"correlated_below", rep.correlated_below},
                   {"uncorrelated_above", rep.uncorrelated_above}};
    res.passed = rep.correlated_below <= 0.05 && rep.uncorrelated_above <= 0.05;
    res.detail = "correlated below a/1.3: " + fmt(rep.correlated_below) + ", uncorrelated above a/1.5: " +
                 fmt(rep.uncorrelated_above) + " (limit 0.05 each)";
    return res;
}

// Acceptance #6: growth of E|F(x)| with n under the correlated scheme, C held fixed.
CriterionResult filter_scaling(const BenchOptions& options) {
    CriterionResult res{6, "filter-count scaling", false, "", 0.0, 300.0, {}};
    constexpr double p = 0.25;
    constexpr double alpha = 2.0 / 3.0;
    constexpr double big_c = 512.0;
    const std::uint64_t sizes[] = {256, 1024, 4096};
    std::vector<double> ns;
    std::vector<double> means;
    double rho = 0.0;
    for (std::uint64_t n : sizes) {
        const auto log_n = ceil_log2(n);
        const auto d = static_cast<std::uint32_t>(big_c * log_n / p);
        const auto dist = Distribution::uniform(d, p);
        const auto params = ModelParams::derive(dist, n, alpha);
        const auto scheme = ThresholdScheme::correlated(dist, params);
        const auto est = estimate_filter_count(scheme, dist, n, 2000, options.seed + n);
        rho = rho_correlated(dist, alpha).rho;
        ns.push_back(static_cast<double>(n));
        means.push_back(est.mean);
        res.metrics.emplace_back("mean_F_n" + std::to_string(n), est.mean);
    }
    const auto fit = fit_log_log(ns, means);
    res.metrics.emplace_back("slope", fit.slope);
    res.metrics.emplace_back("rho_correlated", rho);
    res.passed = fit.slope <= rho + 0.15;
    res.detail = "slope " + fmt(fit.slope) + " vs rho + 0.15 = " + fmt(rho + 0.15);
    return res;
}

// Acceptance #7: independence ratios on synthetic independent data and the hand instances.
CriterionResult independence_sanity(const BenchOptions& options) {
    CriterionResult res{7, "independence ratio sanity", false, "", 0.0, 30.0, {}};
    std::vector<double> probs(2000);
    for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = 0.5 / std::pow(1.0 + static_cast<double>(i), 0.7);
    const auto data = sample_dataset(Distribution(probs), 10000, options.seed);
    const auto ds = make_transactions(data);
    const double r2 = independence_ratio(ds, 2).ratio;
    const double r3 = independence_ratio(ds, 3).ratio;

    auto hand = [](std::vector<std::vector<ItemId>> rows) {
        std::vector<SparseVector> v;
        for (auto& r : rows) v.push_back(SparseVector::from_unsorted(std::move(r), 4));
        return independence_ratio(make_transactions(v), 2).ratio;
    };
    const double same = hand({{1, 2}, {1, 2}});
    const double mixed = hand({{1, 2}, {1, 3}});
    res.metrics = {{"ratio_k2", r2}, {"ratio_k3", r3}, {"hand_identical", same}, {"hand_mixed", mixed}};
    res.passed = r2 >= 0.9 && r2 <= 1.1 && r3 >= 0.9 && r3 <= 1.1 && same == 1.0 && mixed == 0.8;
    res.detail = "k=2 " + fmt(r2) + ", k=3 " + fmt(r3) + ", hand " + fmt(same) + " and " + fmt(mixed);
    return res;
}

struct SmallWorld {
    Distribution dist;
    std::vector<SparseVector> data;
    std::vector<SparseVector> queries;
};

SmallWorld adversarial_world(std::uint64_t seed) {
    SmallWorld w;
    w.dist = Distribution::uniform(1024, 1.0 / 8);
    w.data = sample_dataset(w.dist, 512, seed);
    for (std::uint64_t k = 0; k < 100; ++k) {
        SeededRng rng(seed ^ 0xD47AULL, k);
        w.queries.push_back(k % 2 == 0 ? sample_correlated_query(w.dist, w.data[k], 0.8, rng)
                                       : sample_vector(w.dist, rng));
    }
    return w;
}

// Acceptance #8: byte-identical rebuilds (across worker counts) and query-level round trips.
CriterionResult determinism(const BenchOptions& options) {
    CriterionResult res{8, "determinism and persistence", false, "", 0.0, 60.0, {}};
    const auto w = adversarial_world(options.seed);
    const auto scheme = ThresholdScheme::adversarial(0.5);

    const char* previous = std::getenv("SKEWPATH_THREADS");
    const std::string saved = previous ? previous : "";
    ::setenv("SKEWPATH_THREADS", "1", 1);
    const auto serial = FilterIndex::build(w.data, scheme, w.dist, 8, options.seed);
    ::setenv("SKEWPATH_THREADS", "4", 1);
    const auto threaded = FilterIndex::build(w.data, scheme, w.dist, 8, options.seed);
    if (previous) {
        ::setenv("SKEWPATH_THREADS", saved.c_str(), 1);
    } else {
        ::unsetenv("SKEWPATH_THREADS");
    }

    const auto bytes = serial.serialize();
    const bool identical = bytes == threaded.serialize();
    const auto restored = FilterIndex::deserialize(bytes);
    std::uint64_t mismatches = 0;
    for (const auto& q : w.queries) {
        for (auto mode : {QueryMode::first, QueryMode::best}) {
            if (!(serial.query(q, mode) == restored.query(q, mode))) ++mismatches;
        }
    }
    res.metrics = {{"byte_identical", identical ? 1.0 : 0.0},
                   {"bytes", static_cast<double>(bytes.size())},
                   {"report_mismatches", static_cast<double>(mismatches)}};
    res.passed = identical && mismatches == 0;
    res.detail = std::string(identical ? "rebuilds byte-identical" : "rebuilds differ") + ", " +
                 std::to_string(mismatches) + " of 200 reports differ after round trip";
    return res;
}

// Acceptance #9: the index never beats brute force and every match re-verifies.
CriterionResult oracle_dominance(const BenchOptions& options) {
    // The criterion sets no runtime limit.
    CriterionResult res{9, "oracle dominance", false, "", 0.0, std::numeric_limits<double>::infinity(), {}};
    std::uint64_t dominated = 0;
    std::uint64_t unconfirmed = 0;
    std::uint64_t matched = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        SeededRng rng(options.seed ^ 0x0AC1EULL, t);
        const auto d = static_cast<std::uint32_t>(64 + rng.below(193));
        const std::size_t n = 16 + rng.below(49);
        std::vector<double> probs(d);
        for (auto& p : probs) p = 0.02 + 0.3 * rng.uniform01();
        const Distribution dist(probs);
        const auto data = sample_dataset(dist, n, rng.next_u64());
        const double b1 = 0.3 + 0.5 * rng.uniform01();
        const auto index = FilterIndex::build(data, ThresholdScheme::adversarial(b1), dist, 4, rng.next_u64());
        const auto target = static_cast<VectorId>(rng.below(n));
        const auto q = sample_correlated_query(dist, data[target], 0.7, rng);

        const auto got = index.query(q, b1, QueryMode::best).match;
        const auto truth = brute_force_query(data, q, b1, QueryMode::best);
        if (!got) continue;
        ++matched;
        if (!truth || got->similarity > truth->similarity) ++dominated;
        const double recomputed = braun_blanquet(data[got->id], q);
        if (recomputed != got->similarity || recomputed < b1) ++unconfirmed;
    }
    res.metrics = {{"matched", static_cast<double>(matched)},
                   {"dominance_violations", static_cast<double>(dominated)},
                   {"unconfirmed_matches", static_cast<double>(unconfirmed)}};
    res.passed = dominated == 0 && unconfirmed == 0;
    res.detail = std::to_string(matched) + " of 100 instances matched, " + std::to_string(dominated) +
                 " exceed brute force, " + std::to_string(unconfirmed) + " fail recomputation";
    return res;
}

}  // namespace

CriterionResult run_criterion(int id, const BenchOptions& options) {
    using Runner = CriterionResult (*)(const BenchOptions&);
    static constexpr Runner runners[kCriterionCount] = {rho_golden,           solver_consistency, collision_floor,
                                                        correlated_recall,    similarity_separation, filter_scaling,
                                                        independence_sanity,  determinism,        oracle_dominance};
    if (id < 1 || id > kCriterionCount) throw std::out_of_range("no acceptance criterion " + std::to_string(id));
    const auto start = Clock::now();
    CriterionResult res = runners[id - 1](options);
    res.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    res.metrics.emplace_back("seconds", res.seconds);
    if (res.seconds > res.time_limit) {
        res.passed = false;
        res.detail += "; runtime " + fmt(res.seconds) + " s over the " + fmt(res.time_limit) + " s limit";
    }
    return res;
}

std::vector<CriterionResult> run_all_criteria(const BenchOptions& options) {
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCriterionCount; ++id) out.push_back(run_criterion(id, options));
    return out;
}

}  // namespace skewpath
