// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// The exit status is nonzero if any criterion fails.

#include "skewpath/bench.hpp"

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

int main(int argc, char** argv) {
    skewpath::BenchOptions options;
    int first = 1;
    int last = skewpath::kCriterionCount;
    if (argc > 1) {
        first = last = std::atoi(argv[1]);
    }

    int failures = 0;
    for (int id = first; id <= last; ++id) {
        try {
            const auto res = skewpath::run_criterion(id, options);
            std::printf("criterion %d %s: %s: %s (%.2f s)\n", res.id, res.passed ? "PASS" : "FAIL", res.name.c_str(),
                        res.detail.c_str(), res.seconds);
            if (!res.passed) ++failures;
        } catch (const std::exception& e) {
            std::printf("criterion %d FAIL: threw %s\n", id, e.what());
            ++failures;
        }
        std::fflush(stdout);
    }
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
