// skewpath: command-line front end for generating data, building and querying indexes,
// solving rho equations, analyzing transaction files and running the acceptance benchmarks.
//
// Exit codes: 0 success or match, 1 clean no-match (or failed benchmark), 2 usage or
// parameter error, 3 data error (unreadable, malformed or corrupt input).

#include "skewpath/bench.hpp"
#include "skewpath/error.hpp"
#include "skewpath/index.hpp"
#include "skewpath/model.hpp"
#include "skewpath/rho_solver.hpp"
#include "skewpath/rng.hpp"
#include "skewpath/sampling.hpp"
#include "skewpath/skew_analysis.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using namespace skewpath;

constexpr int kExitNoMatch = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

// Separates planted-query streams from the dataset streams under one seed.
constexpr std::uint64_t kPlantSalt = 0xA24BAED4963EE407ULL;

/// Raised for problems with input files; mapped to exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for inconsistent flag values that CLI11 cannot see; mapped to exit code 2.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct DistFlags {
    std::string dist_file;
    double uniform = 0.0;
    std::uint32_t d = 0;
};

/// `default_d` > 0 lets --uniform stand alone (for commands where d does not matter).
void add_dist_flags(CLI::App* cmd, DistFlags& flags, std::uint32_t default_d = 0) {
    auto* dist = cmd->add_option("--dist", flags.dist_file, "Distribution file (first line d, then d probabilities)");
    auto* uni = cmd->add_option("--uniform", flags.uniform, "Uniform item probability p for every item");
    auto* d = cmd->add_option("--d", flags.d, "Dimension for --uniform");
    dist->excludes(uni)->excludes(d);
    if (default_d > 0) {
        flags.d = default_d;
        d->capture_default_str();
    } else {
        uni->needs(d);
    }
}

Distribution resolve_dist(const DistFlags& flags) {
    if (!flags.dist_file.empty()) {
        if (!fs::exists(flags.dist_file)) throw DataError("distribution file not found: " + flags.dist_file);
        return read_distribution(fs::path(flags.dist_file));
    }
    if (flags.d == 0) throw UsageError("give --dist FILE or --uniform P --d D");
    if (!(flags.uniform > 0.0 && flags.uniform <= 1.0)) throw UsageError("--uniform must lie in (0, 1]");
    return Distribution::uniform(flags.d, flags.uniform);
}

void echo_config(const CLI::App* cmd) {
    std::cerr << "# skewpath " << cmd->get_name() << "\n";
    std::istringstream lines(cmd->config_to_str(true, false));
    for (std::string line; std::getline(lines, line);) {
        if (!line.empty()) std::cerr << "#   " << line << "\n";
    }
}

/// Reports violations; throws unless `force`, in which case they become warnings.
void check_model(const Distribution& dist, const ModelParams& params, bool force) {
    const auto violations = validate_model(dist, params);
    for (const auto& v : violations) std::cerr << (force ? "warning: " : "error: ") << v.message << "\n";
    if (!violations.empty() && !force) throw UsageError("model assumptions violated (use --force to proceed)");
}

std::vector<SparseVector> load_vectors(const std::string& path, std::uint32_t d) {
    if (!fs::exists(path)) throw DataError("file not found: " + path);
    return read_dataset(fs::path(path), d);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out.precision(17);
    return out;
}

// ---------------------------------------------------------------------------- gen

struct GenFlags {
    DistFlags dist;
    std::uint64_t n = 0;
    std::uint64_t seed = 1;
    std::string out;
    std::optional<double> plant_alpha;
    std::uint32_t plant_count = 1;
    std::string plant_out;
    bool force = false;
};

int cmd_gen(const GenFlags& f) {
    const auto dist = resolve_dist(f.dist);
    if (f.n < 2) throw UsageError("--n must be at least 2");
    const auto params = ModelParams::derive(dist, f.n, f.plant_alpha, f.plant_alpha ? std::nullopt : std::optional(0.5));
    check_model(dist, params, f.force);

    const auto data = sample_dataset(dist, f.n, f.seed);
    std::ostringstream header;
    header << "skewpath gen d=" << dist.dimension() << " n=" << f.n << " seed=" << f.seed;
    if (!f.dist.dist_file.empty()) {
        header << " dist=" << f.dist.dist_file;
    } else {
        header << " uniform=" << f.dist.uniform;
    }
    if (f.out.empty() || f.out == "-") {
        write_dataset(std::cout, data, header.str());
    } else {
        auto out = open_out(f.out);
        write_dataset(out, data, header.str());
    }

    if (f.plant_alpha) {
        const double alpha = *f.plant_alpha;
        if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("--plant-correlated must lie in (0, 1]");
        std::string sidecar = f.plant_out;
        if (sidecar.empty()) {
            if (f.out.empty() || f.out == "-") throw UsageError("--plant-out is required when writing to stdout");
            sidecar = f.out + ".planted";
        }
        auto out = open_out(sidecar);
        out << "# skewpath planted alpha=" << alpha << " seed=" << f.seed << " count=" << f.plant_count << "\n";
        for (std::uint32_t k = 0; k < f.plant_count; ++k) {
            SeededRng rng(f.seed ^ kPlantSalt, k);
            const auto target = static_cast<VectorId>(rng.below(f.n));
            const auto q = sample_correlated_query(dist, data[target], alpha, rng);
            out << "# target=" << target << " similarity=" << braun_blanquet(data[target], q) << "\n";
            write_dataset(out, std::span(&q, 1));
        }
        std::cerr << "# planted " << f.plant_count << " correlated quer" << (f.plant_count == 1 ? "y" : "ies")
                  << " in " << sidecar << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------- build

struct BuildFlags {
    DistFlags dist;
    std::string data;
    std::string scheme = "adversarial";
    std::optional<double> b1;
    std::optional<double> alpha;
    std::optional<std::uint32_t> reps;
    std::uint64_t seed = 1;
    std::string out;
    bool force = false;
};

int cmd_build(const BuildFlags& f) {
    const auto dist = resolve_dist(f.dist);
    auto data = load_vectors(f.data, dist.dimension());
    if (data.size() < 2) throw DataError("dataset needs at least 2 vectors, found " + std::to_string(data.size()));

    std::optional<ThresholdScheme> scheme;
    if (f.scheme == "adversarial") {
        if (!f.b1) throw UsageError("--scheme adversarial needs --b1");
        if (f.alpha) throw UsageError("--alpha applies to --scheme correlated only");
        check_model(dist, ModelParams::derive(dist, data.size(), std::nullopt, f.b1), f.force);
        scheme = ThresholdScheme::adversarial(*f.b1);
    } else {
        if (!f.alpha) throw UsageError("--scheme correlated needs --alpha");
        if (f.b1) {
            std::cerr << "warning: --b1 " << *f.b1 << " overrides the correlated default alpha/1.3 = "
                      << correlated_default_b1(*f.alpha) << "\n";
        }
        const auto params = ModelParams::derive(dist, data.size(), f.alpha, f.b1);
        check_model(dist, params, f.force);
        scheme = ThresholdScheme::correlated(dist, params);
    }

    const std::uint32_t reps = f.reps.value_or(default_repetitions(data.size()));
    if (reps == 0) throw UsageError("--reps must be positive");
    const auto index = FilterIndex::build(std::move(data), *scheme, dist, reps, f.seed);
    index.save(f.out);
    std::cerr << "# built " << index.repetitions() << " repetitions, " << index.total_postings() << " postings, "
              << index.smallside().size() << " smallside vectors -> " << f.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------- query

struct QueryFlags {
    std::string index;
    std::string queries;
    std::optional<double> b1;
    std::string mode = "first";
    bool human = false;
};

int cmd_query(const QueryFlags& f) {
    if (!fs::exists(f.index)) throw DataError("index file not found: " + f.index);
    const auto index = FilterIndex::load(f.index);
    const auto queries = load_vectors(f.queries, index.dimension());
    const double b1 = f.b1.value_or(index.scheme().b1());
    if (f.b1 && index.scheme().kind() == SchemeKind::correlated) {
        std::cerr << "warning: --b1 " << b1 << " overrides the index default " << index.scheme().b1() << "\n";
    }
    const QueryMode mode = f.mode == "best" ? QueryMode::best : QueryMode::first;

    bool all_matched = true;
    std::cout.precision(17);
    if (!f.human) std::cout << "query,matched,match_id,similarity,candidates_examined,filters_enumerated,repetitions_touched\n";
    for (std::size_t k = 0; k < queries.size(); ++k) {
        const auto r = index.query(queries[k], b1, mode);
        all_matched = all_matched && r.match.has_value();
        if (f.human) {
            std::cout << "query " << k << ": ";
            if (r.match) {
                std::cout << "match id " << r.match->id << " similarity " << r.match->similarity;
            } else {
                std::cout << "no high-similarity vector found";
            }
            std::cout << " (" << r.candidates_examined << " candidates, " << r.filters_enumerated << " filters, "
                      << r.repetitions_touched << " repetitions)\n";
            continue;
        }
        std::cout << k << "," << (r.match ? 1 : 0) << ",";
        if (r.match) std::cout << r.match->id << "," << r.match->similarity;
        else std::cout << ",";
        std::cout << "," << r.candidates_examined << "," << r.filters_enumerated << "," << r.repetitions_touched << "\n";
    }
    return all_matched ? 0 : kExitNoMatch;
}

// ---------------------------------------------------------------------------- rho

struct RhoFlags {
    DistFlags dist;
    std::optional<double> b1;
    std::optional<double> alpha;
    std::string queries;
    bool human = false;
};

void print_rho_row(const std::string& equation, const std::string& query, const RhoSolution& s, double rho_cp,
                   double taylor, bool human) {
    if (human) {
        std::cout << equation << (query.empty() ? "" : " q" + query) << ": rho = " << s.rho << " in [" << s.lower
                  << ", " << s.upper << "], rho_cp = " << rho_cp << ", taylor = " << taylor << "\n";
        return;
    }
    std::cout << equation << "," << query << "," << s.rho << "," << s.lower << "," << s.upper << "," << s.iterations
              << "," << s.residual << "," << rho_cp << "," << taylor << "\n";
}

int cmd_rho(const RhoFlags& f) {
    const auto dist = resolve_dist(f.dist);
    if (!f.b1 && !f.alpha) throw UsageError("rho needs --b1, --alpha or both");
    std::cout.precision(6);
    if (!f.human) std::cout << "equation,query,rho,lower,upper,iterations,residual,rho_cp,taylor\n";
    std::vector<double> probs(dist.probs().begin(), dist.probs().end());

    if (f.b1) {
        const double b1 = *f.b1;
        if (!(b1 > 0.0 && b1 <= 1.0)) throw UsageError("--b1 must lie in (0, 1]");
        const auto s = rho_adversarial_preprocess(dist, b1);
        const auto problem = RhoProblem::weighted(probs, probs, b1 * dist.sum_p());
        print_rho_row("adversarial_preprocess", "", s, rho_chosen_path(probs, b1), rho_lower_taylor(problem), f.human);

        if (!f.queries.empty()) {
            const auto queries = load_vectors(f.queries, dist.dimension());
            for (std::size_t k = 0; k < queries.size(); ++k) {
                if (queries[k].empty()) continue;
                const auto q = rho_adversarial_query(dist, queries[k], b1);
                std::vector<double> qp;
                for (ItemId i : queries[k].items()) qp.push_back(dist.p(i));
                const auto per_item_problem = RhoProblem::plain(qp, b1 * static_cast<double>(qp.size()));
                print_rho_row("adversarial_query", std::to_string(k), q.per_item, q.rho_cp,
                              rho_lower_taylor(per_item_problem), f.human);
                if (q.sum_p) {
                    print_rho_row("adversarial_query_sum_p", std::to_string(k), *q.sum_p, q.rho_cp,
                                  q.sum_p->lower, f.human);
                }
            }
        }
    }
    if (f.alpha) {
        const double alpha = *f.alpha;
        if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("--alpha must lie in (0, 1]");
        const auto s = rho_correlated(dist, alpha);
        print_rho_row("correlated", "", s, rho_chosen_path(probs, correlated_default_b1(alpha)), s.lower, f.human);
    }
    return 0;
}

// ---------------------------------------------------------------------------- analyze

struct AnalyzeFlags {
    std::string input;
    std::string out_dir = ".";
    std::string fit_out;
    bool clamp = false;
};

int cmd_analyze(const AnalyzeFlags& f) {
    if (!fs::exists(f.input)) throw DataError("transaction file not found: " + f.input);
    const auto ds = load_transactions(fs::path(f.input));
    fs::create_directories(f.out_dir);

    {
        auto out = open_out((fs::path(f.out_dir) / "profile.csv").string());
        out << "rank,p,rank_fraction,log_d_rank,y\n";
        for (const auto& row : frequency_profile(ds)) {
            out << row.rank << "," << row.p << "," << row.rank_fraction << "," << row.log_d_rank << "," << row.y << "\n";
        }
    }
    {
        auto out = open_out((fs::path(f.out_dir) / "independence.csv").string());
        out << "k,observed,estimated,ratio\n";
        for (std::uint32_t k : {2u, 3u}) {
            if (ds.d < k) continue;
            const auto r = independence_ratio(ds, k);
            out << r.k << "," << r.observed << "," << r.estimated << "," << r.ratio << "\n";
        }
    }
    if (!f.fit_out.empty()) {
        const auto fit = fit_distribution(ds, f.clamp);
        if (fit.clamped > 0) std::cerr << "warning: clamped " << fit.clamped << " item(s) with p > 1/2 to 1/2\n";
        auto out = open_out(f.fit_out);
        write_distribution(out, fit.dist);
    }
    std::cerr << "# analyzed n=" << ds.n() << " d=" << ds.d << " -> " << f.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------- bench

struct BenchFlags {
    std::vector<int> criteria;
    std::uint64_t seed = BenchOptions{}.seed;
    bool human = false;
};

int cmd_bench(const BenchFlags& f) {
    BenchOptions options;
    options.seed = f.seed;
    std::vector<int> ids = f.criteria;
    if (ids.empty()) {
        for (int id = 1; id <= kCriterionCount; ++id) ids.push_back(id);
    }
    bool all_passed = true;
    std::cout.precision(10);
    if (!f.human) std::cout << "criterion,name,metric,value\n";
    for (int id : ids) {
        const auto res = run_criterion(id, options);
        all_passed = all_passed && res.passed;
        if (f.human) {
            std::cout << "criterion " << res.id << " " << (res.passed ? "PASS" : "FAIL") << ": " << res.name << ": "
                      << res.detail << "\n";
            continue;
        }
        std::cout << res.id << "," << res.name << ",passed," << (res.passed ? 1 : 0) << "\n";
        for (const auto& [metric, value] : res.metrics) {
            std::cout << res.id << "," << res.name << "," << metric << "," << value << "\n";
        }
    }
    return all_passed ? 0 : kExitNoMatch;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skewpath: distribution-aware chosen-path similarity search"};
    app.require_subcommand(1);

    GenFlags gen;
    auto* gen_cmd = app.add_subcommand("gen", "Sample a dataset from a product distribution");
    add_dist_flags(gen_cmd, gen.dist);
    gen_cmd->add_option("--n", gen.n, "Number of vectors")->required();
    gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "Output dataset file (default stdout)");
    gen_cmd->add_option("--plant-correlated", gen.plant_alpha, "Also emit alpha-correlated queries of stored vectors");
    gen_cmd->add_option("--plant-count", gen.plant_count, "Number of planted queries")->capture_default_str();
    gen_cmd->add_option("--plant-out", gen.plant_out, "Planted query file (default OUT.planted)");
    gen_cmd->add_flag("--force", gen.force, "Proceed despite model violations");

    BuildFlags build;
    auto* build_cmd = app.add_subcommand("build", "Build a filter index over a dataset");
    add_dist_flags(build_cmd, build.dist);
    build_cmd->add_option("--data", build.data, "Dataset file")->required();
    build_cmd->add_option("--scheme", build.scheme, "Threshold scheme")
        ->check(CLI::IsMember({"adversarial", "correlated"}))
        ->capture_default_str();
    build_cmd->add_option("--b1", build.b1, "Similarity threshold (correlated default alpha/1.3)");
    build_cmd->add_option("--alpha", build.alpha, "Query correlation (correlated scheme)");
    build_cmd->add_option("--reps", build.reps, "Repetitions (default ceil(log2 n) * ceil(ln 20))");
    build_cmd->add_option("--seed", build.seed, "Master hash seed")->capture_default_str();
    build_cmd->add_option("--out", build.out, "Index file")->required();
    build_cmd->add_flag("--force", build.force, "Proceed despite model violations");

    QueryFlags query;
    auto* query_cmd = app.add_subcommand("query", "Query an index; exit 0 only if every query matched");
    query_cmd->add_option("--index", query.index, "Index file")->required();
    query_cmd->add_option("--query-file", query.queries, "Query vectors, dataset format")->required();
    query_cmd->add_option("--b1", query.b1, "Verification threshold (default: the index's b1)");
    query_cmd->add_option("--mode", query.mode, "first or best")
        ->check(CLI::IsMember({"first", "best"}))
        ->capture_default_str();
    query_cmd->add_flag("--human", query.human, "Readable output instead of CSV");

    RhoFlags rho;
    auto* rho_cmd = app.add_subcommand("rho", "Solve the rho equations");
    add_dist_flags(rho_cmd, rho.dist, 64);
    rho_cmd->add_option("--b1", rho.b1, "Adversarial threshold");
    rho_cmd->add_option("--alpha", rho.alpha, "Correlated-regime alpha");
    rho_cmd->add_option("--query-file", rho.queries, "Also solve the per-query equations for these vectors");
    rho_cmd->add_flag("--human", rho.human, "Readable output instead of CSV");

    AnalyzeFlags analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "Frequency profile and independence ratios of a transaction file");
    analyze_cmd->add_option("--input", analyze.input, "Transaction file")->required();
    analyze_cmd->add_option("--out-dir", analyze.out_dir, "Directory for profile.csv and independence.csv")
        ->capture_default_str();
    analyze_cmd->add_option("--fit-out", analyze.fit_out, "Also write the fitted distribution here");
    analyze_cmd->add_flag("--clamp", analyze.clamp, "Clamp fitted frequencies above 1/2");

    BenchFlags bench;
    auto* bench_cmd = app.add_subcommand("bench", "Run the acceptance experiments");
    bench_cmd->add_option("--criteria", bench.criteria, "Criterion ids (default all)")->delimiter(',')->check(CLI::Range(1, kCriterionCount));
    bench_cmd->add_option("--seed", bench.seed, "Experiment seed")->capture_default_str();
    bench_cmd->add_flag("--human", bench.human, "Readable output instead of CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        for (auto* cmd : app.get_subcommands()) echo_config(cmd);
        if (gen_cmd->parsed()) return cmd_gen(gen);
        if (build_cmd->parsed()) return cmd_build(build);
        if (query_cmd->parsed()) return cmd_query(query);
        if (rho_cmd->parsed()) return cmd_rho(rho);
        if (analyze_cmd->parsed()) return cmd_analyze(analyze);
        if (bench_cmd->parsed()) return cmd_bench(bench);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
