#include "skewpath/sampling.hpp"

#include "skewpath/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace skewpath {

SparseVector sample_vector(const Distribution& dist, SeededRng& rng) {
    std::vector<ItemId> items;
    const std::uint32_t d = dist.dimension();
    for (ItemId i = 0; i < d; ++i) {
        if (rng.uniform01() < dist.p(i)) items.push_back(i);
    }
    return SparseVector(std::move(items), d);
}

SparseVector sample_vector_uniform_skip(std::uint32_t d, double p, SeededRng& rng) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("sample_vector_uniform_skip: p outside (0, 1]");
    std::vector<ItemId> items;
    if (p >= 1.0) {
        items.resize(d);
        for (ItemId i = 0; i < d; ++i) items[i] = i;
        return SparseVector(std::move(items), d);
    }
    // Gap before the next set bit is Geometric(p) on {0, 1, ...}.
    const double log_q = std::log1p(-p);
    std::uint64_t pos = 0;
    while (true) {
        const double u = 1.0 - rng.uniform01();  // (0, 1]
        const double gap = std::floor(std::log(u) / log_q);
        if (gap >= static_cast<double>(d - pos)) break;
        pos += static_cast<std::uint64_t>(gap);
        items.push_back(static_cast<ItemId>(pos));
        if (++pos >= d) break;
    }
    return SparseVector(std::move(items), d);
}

std::vector<SparseVector> sample_dataset(const Distribution& dist, std::size_t n, std::uint64_t seed) {
    std::vector<SparseVector> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        SeededRng rng(seed, k);
        out.push_back(sample_vector(dist, rng));
    }
    return out;
}

double JointBitProbs::pearson() const noexcept {
    const double wx = p10 + p11;
    const double wy = p01 + p11;
    const double var = wx * (1.0 - wx) * wy * (1.0 - wy);
    if (var <= 0.0) return 0.0;
    return (p11 - wx * wy) / std::sqrt(var);
}

JointBitProbs joint_bit_probs(double w, double alpha) {
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("joint_bit_probs: w outside [0, 1]");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("joint_bit_probs: alpha outside [0, 1]");
    const double shared = alpha * w * (1.0 - w);
    JointBitProbs j;
    j.p11 = shared + w * w;
    j.p00 = shared + (1.0 - w) * (1.0 - w);
    j.p01 = w - j.p11;
    j.p10 = w - j.p11;
    return j;
}

namespace {

void check_query_inputs(const Distribution& dist, const SparseVector& x, double alpha) {
    if (x.dimension() != dist.dimension()) throw std::invalid_argument("correlated query: dimension mismatch");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("correlated query: alpha outside [0, 1]");
}

}  // namespace

SparseVector sample_correlated_query(const Distribution& dist, const SparseVector& x, double alpha,
                                     SeededRng& rng) {
    check_query_inputs(dist, x, alpha);
    const std::uint32_t d = dist.dimension();
    auto xs = x.items();
    std::size_t cursor = 0;
    std::vector<ItemId> items;
    for (ItemId i = 0; i < d; ++i) {
        const bool xi = cursor < xs.size() && xs[cursor] == i;
        if (xi) ++cursor;
        const double u_copy = rng.uniform01();
        const double u_noise = rng.uniform01();
        const bool qi = u_copy < alpha ? xi : (u_noise < dist.p(i));
        if (qi) items.push_back(i);
    }
    return SparseVector(std::move(items), d);
}

SparseVector sample_correlated_query_conditional(const Distribution& dist, const SparseVector& x, double alpha,
                                                 SeededRng& rng) {
    check_query_inputs(dist, x, alpha);
    const std::uint32_t d = dist.dimension();
    auto xs = x.items();
    std::size_t cursor = 0;
    std::vector<ItemId> items;
    for (ItemId i = 0; i < d; ++i) {
        const bool xi = cursor < xs.size() && xs[cursor] == i;
        if (xi) ++cursor;
        const double w = dist.p(i);
        const double pr_one = xi ? alpha * (1.0 - w) + w : w * (1.0 - alpha);
        if (rng.uniform01() < pr_one) items.push_back(i);
    }
    return SparseVector(std::move(items), d);
}

void write_dataset(std::ostream& out, std::span<const SparseVector> vectors, const std::optional<std::string>& header) {
    if (header) out << "# " << *header << '\n';
    for (const auto& v : vectors) {
        bool first = true;
        for (ItemId i : v.items()) {
            if (!first) out << ' ';
            out << i;
            first = false;
        }
        out << '\n';
    }
}

std::vector<SparseVector> read_dataset(std::istream& in, std::uint32_t d) {
    std::vector<SparseVector> out;
    std::string line;
    std::size_t line_no = 0;
    std::vector<ItemId> items;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first != std::string::npos && line[first] == '#') continue;
        items.clear();
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t')) ++p;
            if (p == end) break;
            std::uint64_t value = 0;
            auto [next, ec] = std::from_chars(p, end, value);
            if (ec != std::errc{} || (next < end && *next != ' ' && *next != '\t')) {
                throw ParseError("invalid item id", line_no);
            }
            if (value >= d) {
                throw ParseError("item id " + std::to_string(value) + " >= d=" + std::to_string(d), line_no);
            }
            items.push_back(static_cast<ItemId>(value));
            p = next;
        }
        out.push_back(SparseVector::from_unsorted(items, d));
    }
    return out;
}

std::vector<SparseVector> read_dataset(const std::filesystem::path& path, std::uint32_t d) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file " + path.string());
    return read_dataset(in, d);
}

}  // namespace skewpath
