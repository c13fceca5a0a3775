#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace skewpath {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

/// Smallest k with 2^k >= n. ceil_log2(1) == 0.
inline std::uint32_t ceil_log2(std::uint64_t n) noexcept {
    std::uint32_t k = 0;
    while (k < 64 && (std::uint64_t{1} << k) < n) ++k;
    return k;
}

}  // namespace skewpath
