#include "skewpath/path_engine.hpp"

#include "skewpath/numeric.hpp"
#include "skewpath/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace skewpath {

namespace {

constexpr double kStopSlack = 1e-9;

std::uint64_t mulmod61(std::uint64_t a, std::uint64_t b) noexcept {
    const unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
    std::uint64_t r = (static_cast<std::uint64_t>(prod) & kMersenne61) + static_cast<std::uint64_t>(prod >> 61);
    r = (r & kMersenne61) + (r >> 61);
    return r >= kMersenne61 ? r - kMersenne61 : r;
}

std::uint64_t addmod61(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t r = a + b;  // both < 2^61, no overflow
    return r >= kMersenne61 ? r - kMersenne61 : r;
}

std::uint64_t draw_field_element(SeededRng& rng, bool nonzero) {
    while (true) {
        const std::uint64_t v = rng.next_u64() >> 3;
        if (v < kMersenne61 && (!nonzero || v != 0)) return v;
    }
}

}  // namespace

Path make_path(std::vector<ItemId> nodes, const Distribution& dist) {
    Path path;
    for (ItemId i : nodes) {
        if (i >= dist.dimension()) throw std::invalid_argument("make_path: item out of range");
        path.log_prod += dist.neg_log2(i);
    }
    path.nodes = std::move(nodes);
    return path;
}

ThresholdScheme ThresholdScheme::adversarial(double b1) {
    if (!(b1 > 0.0 && b1 < 1.0)) throw std::invalid_argument("adversarial scheme: b1 must lie in (0, 1)");
    ThresholdScheme s;
    s.kind_ = SchemeKind::adversarial;
    s.b1_ = b1;
    return s;
}

ThresholdScheme ThresholdScheme::correlated(const Distribution& dist, double alpha, double big_c, double c_log_n,
                                            std::optional<double> b1) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("correlated scheme: alpha must lie in (0, 1]");
    if (!(big_c > 0.0)) throw std::invalid_argument("correlated scheme: C must be positive");
    if (!(c_log_n > 0.0)) throw std::invalid_argument("correlated scheme: C log n must be positive");
    ThresholdScheme s;
    s.kind_ = SchemeKind::correlated;
    s.alpha_ = alpha;
    s.b1_ = b1.value_or(correlated_default_b1(alpha));
    if (!(s.b1_ > 0.0 && s.b1_ <= 1.0)) throw std::invalid_argument("correlated scheme: b1 must lie in (0, 1]");
    s.big_c_ = big_c;
    s.c_log_n_ = c_log_n;
    s.delta_ = 3.0 / std::sqrt(alpha * big_c);
    s.p_hat_.reserve(dist.dimension());
    for (double pi : dist.probs()) s.p_hat_.push_back(pi * (1.0 - alpha) + alpha);
    return s;
}

ThresholdScheme ThresholdScheme::correlated(const Distribution& dist, const ModelParams& params) {
    if (!params.alpha) throw std::invalid_argument("correlated scheme requires alpha");
    return correlated(dist, *params.alpha, params.big_c, dist.sum_p(), params.b1);
}

ThresholdScheme ThresholdScheme::with_b1(double b1) const {
    if (kind_ != SchemeKind::adversarial) throw std::logic_error("with_b1: adversarial scheme only");
    return adversarial(b1);
}

double ThresholdScheme::raw(std::size_t x_size, std::uint32_t j, ItemId i) const noexcept {
    double num = 1.0;
    double denom = 0.0;
    if (kind_ == SchemeKind::adversarial) {
        denom = b1_ * static_cast<double>(x_size) - j;
    } else {
        num = 1.0 + delta_;
        denom = p_hat_[i] * c_log_n_ - j;
    }
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return num / denom;
}

double ThresholdScheme::operator()(std::size_t x_size, std::uint32_t j, ItemId i) const noexcept {
    const double s = raw(x_size, j, i);
    return s >= 1.0 ? 1.0 : s;
}

double threshold(const ThresholdScheme& scheme, const Distribution& dist, std::size_t x_size, std::uint32_t j,
                 ItemId i) {
    if (i >= dist.dimension()) throw std::invalid_argument("threshold: item out of range");
    return scheme(x_size, j, i);
}

std::uint64_t fingerprint_extend(std::uint64_t prefix, ItemId item) noexcept {
    // mix64 is a bijection, so two paths that share a prefix never collide.
    return mix64(prefix + mix64(static_cast<std::uint64_t>(item) + 0x9E3779B97F4A7C15ULL));
}

std::uint64_t path_fingerprint(std::span<const ItemId> nodes) noexcept {
    std::uint64_t fp = kEmptyPathFingerprint;
    for (ItemId i : nodes) fp = fingerprint_extend(fp, i);
    return fp;
}

std::uint32_t hash_levels_for(std::uint64_t n) noexcept { return ceil_log2(n) + 1; }

HashFamily::HashFamily(std::uint64_t master_seed, std::uint32_t repetition, std::uint32_t levels)
    : master_seed_(master_seed), repetition_(repetition) {
    SeededRng rng(master_seed ^ 0xC2B2AE3D27D4EB4FULL, repetition);
    keys_.reserve(levels);
    for (std::uint32_t l = 0; l < levels; ++l) {
        LevelKey key;
        key.a_hi = draw_field_element(rng, true);
        key.a_lo = draw_field_element(rng, true);
        key.b = draw_field_element(rng, false);
        keys_.push_back(key);
    }
}

std::uint64_t HashFamily::hash_raw(std::uint32_t level, std::uint64_t fingerprint) const noexcept {
    const LevelKey& k = keys_[level - 1];
    const std::uint64_t hi = fingerprint >> 32;
    const std::uint64_t lo = fingerprint & 0xFFFFFFFFULL;
    return addmod61(addmod61(mulmod61(k.a_hi, hi), mulmod61(k.a_lo, lo)), k.b);
}

double HashFamily::hash(std::uint32_t level, std::uint64_t fingerprint) const noexcept {
    // Top 53 of the 61 bits; (2^61 - 2) >> 8 < 2^53 keeps the result below 1.
    return static_cast<double>(hash_raw(level, fingerprint) >> 8) * 0x1.0p-53;
}

double path_hash(const HashFamily& family, std::uint32_t level, const Path& path) {
    if (level == 0 || level != path.size() || level > family.levels()) {
        throw std::invalid_argument("path_hash: level must equal the path length and be within the family");
    }
    return family.hash(level, path_fingerprint(path));
}

bool path_stops(double log_prod, std::uint64_t n) noexcept {
    return log_prod >= std::log2(static_cast<double>(n)) - kStopSlack;
}

namespace {

template <class Emit>
class FilterWalker {
public:
    FilterWalker(const SparseVector& x, const ThresholdScheme& scheme, const Distribution& dist,
                 const HashFamily& family, std::uint64_t n, Emit& emit)
        : x_(x), scheme_(scheme), dist_(dist), family_(family), emit_(emit),
          stop_bits_(std::log2(static_cast<double>(n)) - kStopSlack) {
        if (n < 2) throw std::invalid_argument("enumerate_filters: n must be at least 2");
        if (x.dimension() != dist.dimension()) throw std::invalid_argument("enumerate_filters: dimension mismatch");
        if (scheme.kind() == SchemeKind::correlated && scheme.dimension() != dist.dimension()) {
            throw std::invalid_argument("enumerate_filters: scheme built for a different dimension");
        }
    }

    void run() {
        if (x_.empty()) return;
        visit(kEmptyPathFingerprint, 0.0);
    }

private:
    void visit(std::uint64_t fp, double log_prod) {
        const auto j = static_cast<std::uint32_t>(prefix_.size());
        if (j > 0 && log_prod >= stop_bits_) {
            emit_(prefix_, fp, log_prod);
            return;
        }
        if (j >= family_.levels()) {
            throw std::domain_error("enumerate_filters: path length exceeds " + std::to_string(family_.levels()) +
                                    " hash levels; distribution violates p_i <= 1/2");
        }
        for (ItemId i : x_.items()) {
            if (std::find(prefix_.begin(), prefix_.end(), i) != prefix_.end()) continue;
            const double s = scheme_(x_.size(), j, i);
            if (s <= 0.0) continue;
            const std::uint64_t child = fingerprint_extend(fp, i);
            if (family_.hash(j + 1, child) < s) {
                prefix_.push_back(i);
                visit(child, log_prod + dist_.neg_log2(i));
                prefix_.pop_back();
            }
        }
    }

    const SparseVector& x_;
    const ThresholdScheme& scheme_;
    const Distribution& dist_;
    const HashFamily& family_;
    Emit& emit_;
    double stop_bits_;
    std::vector<ItemId> prefix_;
};

}  // namespace

std::vector<Path> enumerate_filters(const SparseVector& x, const ThresholdScheme& scheme, const Distribution& dist,
                                    const HashFamily& family, std::uint64_t n) {
    std::vector<Path> out;
    auto emit = [&](const std::vector<ItemId>& nodes, std::uint64_t, double log_prod) {
        out.push_back(Path{nodes, log_prod});
    };
    FilterWalker walker(x, scheme, dist, family, n, emit);
    walker.run();
    return out;
}

std::vector<std::uint64_t> enumerate_filter_fingerprints(const SparseVector& x, const ThresholdScheme& scheme,
                                                         const Distribution& dist, const HashFamily& family,
                                                         std::uint64_t n) {
    std::vector<std::uint64_t> out;
    auto emit = [&](const std::vector<ItemId>&, std::uint64_t fp, double) { out.push_back(fp); };
    FilterWalker walker(x, scheme, dist, family, n, emit);
    walker.run();
    return out;
}

}  // namespace skewpath
