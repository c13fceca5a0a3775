#include "skewpath/model.hpp"

#include "skewpath/error.hpp"
#include "skewpath/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace skewpath {

SparseVector::SparseVector(std::vector<ItemId> items, std::uint32_t d) : items_(std::move(items)), d_(d) {
    for (std::size_t k = 0; k < items_.size(); ++k) {
        if (items_[k] >= d_) {
            throw std::invalid_argument("item " + std::to_string(items_[k]) + " out of range for d=" +
                                        std::to_string(d_));
        }
        if (k > 0 && items_[k - 1] >= items_[k]) {
            throw std::invalid_argument("items must be strictly increasing");
        }
    }
}

SparseVector SparseVector::from_unsorted(std::vector<ItemId> items, std::uint32_t d) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    return SparseVector(std::move(items), d);
}

bool SparseVector::contains(ItemId i) const noexcept {
    return std::binary_search(items_.begin(), items_.end(), i);
}

std::size_t intersection_size(const SparseVector& x, const SparseVector& q) noexcept {
    auto a = x.items();
    auto b = q.items();
    std::size_t i = 0, j = 0, count = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

double braun_blanquet(const SparseVector& x, const SparseVector& q) {
    if (x.dimension() != q.dimension()) {
        throw std::invalid_argument("braun_blanquet: dimension mismatch");
    }
    const std::size_t denom = std::max(x.size(), q.size());
    if (denom == 0) {
        throw std::invalid_argument("braun_blanquet: similarity of two empty vectors is undefined");
    }
    return static_cast<double>(intersection_size(x, q)) / static_cast<double>(denom);
}

Distribution::Distribution(std::vector<double> p) : p_(std::move(p)) {
    neg_log2_.reserve(p_.size());
    CompensatedSum sum;
    for (std::size_t i = 0; i < p_.size(); ++i) {
        const double pi = p_[i];
        if (!(pi > 0.0 && pi <= 1.0)) {
            throw std::invalid_argument("probability p_" + std::to_string(i) + " = " + std::to_string(pi) +
                                        " outside (0, 1]");
        }
        sum.add(pi);
        neg_log2_.push_back(-std::log2(pi));
    }
    sum_p_ = sum.value();
}

Distribution Distribution::uniform(std::uint32_t d, double p) {
    return Distribution(std::vector<double>(d, p));
}

Distribution read_distribution(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> d;
    std::vector<double> p;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream tok(line);
        if (!d) {
            long long value = 0;
            if (!(tok >> value) || value <= 0) throw ParseError("expected positive dimension d", line_no);
            d = static_cast<std::size_t>(value);
            p.reserve(*d);
            continue;
        }
        double value = 0.0;
        if (!(tok >> value)) throw ParseError("expected a probability", line_no);
        if (!(value > 0.0 && value <= 1.0)) {
            throw ParseError("probability " + std::to_string(value) + " outside (0, 1]", line_no);
        }
        if (p.size() == *d) throw ParseError("more than d probabilities", line_no);
        p.push_back(value);
    }
    if (!d) throw ParseError("empty distribution file", 0);
    if (p.size() != *d) {
        throw ParseError("expected " + std::to_string(*d) + " probabilities, found " + std::to_string(p.size()), 0);
    }
    return Distribution(std::move(p));
}

Distribution read_distribution(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open distribution file " + path.string());
    return read_distribution(in);
}

void write_distribution(std::ostream& out, const Distribution& dist) {
    char buf[32];
    out << dist.dimension() << '\n';
    for (double pi : dist.probs()) {
        auto res = std::to_chars(buf, buf + sizeof buf, pi);
        out.write(buf, res.ptr - buf);
        out << '\n';
    }
}

ModelParams ModelParams::derive(const Distribution& dist, std::uint64_t n, std::optional<double> alpha,
                                std::optional<double> b1) {
    if (n < 2) throw std::invalid_argument("model requires n >= 2");
    if (alpha && !(*alpha > 0.0 && *alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    ModelParams params;
    params.n = n;
    params.log_n = std::max<std::uint32_t>(1, ceil_log2(n));
    params.big_c = dist.sum_p() / params.log_n;
    params.alpha = alpha;
    if (b1) {
        params.b1 = *b1;
    } else if (alpha) {
        params.b1 = correlated_default_b1(*alpha);
    } else {
        throw std::invalid_argument("either b1 or alpha must be given");
    }
    if (!(params.b1 > 0.0 && params.b1 < 1.0)) throw std::invalid_argument("b1 must lie in (0, 1)");
    return params;
}

std::vector<Violation> validate_model(const Distribution& dist, const ModelParams& params) {
    std::vector<Violation> out;
    std::size_t above_half = 0;
    std::size_t above_alpha = 0;
    for (double pi : dist.probs()) {
        if (pi > 0.5) ++above_half;
        if (params.alpha && pi > *params.alpha / 2.0) ++above_alpha;
    }
    if (above_half > 0) {
        out.push_back({ViolationKind::probability_above_half,
                       "p exceeds 1/2 for " + std::to_string(above_half) + " item(s)"});
    }
    if (above_alpha > 0) {
        out.push_back({ViolationKind::probability_above_half_alpha,
                       "p exceeds alpha/2 for " + std::to_string(above_alpha) + " item(s)"});
    }
    if (params.alpha && params.big_c * *params.alpha < 15.0) {
        out.push_back({ViolationKind::c_alpha_below_15,
                       "Calpha < 15 (C=" + std::to_string(params.big_c) + ", alpha=" + std::to_string(*params.alpha) +
                           ")"});
    }
    const double required = params.big_c * params.log_n;
    if (dist.sum_p() < required * (1.0 - 1e-12)) {
        out.push_back({ViolationKind::sum_below_c_log_n,
                       "sum p = " + std::to_string(dist.sum_p()) + " < C log n = " + std::to_string(required)});
    }
    return out;
}

double chernoff_tail(double expected, double epsilon, double a_max, TailSide side) {
    if (!(expected > 0.0)) throw std::domain_error("chernoff_tail: expected must be positive");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::domain_error("chernoff_tail: epsilon must lie in [0, 1]");
    if (!(a_max > 0.0 && a_max <= 1.0)) throw std::domain_error("chernoff_tail: a_max must lie in (0, 1]");
    const double denom = (side == TailSide::upper ? 3.0 : 2.0) * a_max;
    return std::exp(-epsilon * epsilon * expected / denom);
}

}  // namespace skewpath
