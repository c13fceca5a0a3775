#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace skewpath {

/// Outcome of one acceptance experiment.
struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;  // one-line human summary of what was measured against what
    double seconds = 0.0;
    double time_limit = 0.0;
    std::vector<std::pair<std::string, double>> metrics;
};

struct BenchOptions {
    std::uint64_t seed = 20240611;
};

/// Criteria 1..9. Each result's `passed` already includes its runtime limit.
CriterionResult run_criterion(int id, const BenchOptions& options = {});
std::vector<CriterionResult> run_all_criteria(const BenchOptions& options = {});

inline constexpr int kCriterionCount = 9;

}  // namespace skewpath
