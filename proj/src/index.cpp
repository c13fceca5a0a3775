#include "skewpath/index.hpp"

#include "byte_io.hpp"
#include "skewpath/error.hpp"
#include "skewpath/numeric.hpp"
#include "skewpath/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>

namespace skewpath {

namespace {

constexpr char kMagic[7] = {'S', 'K', 'P', 'I', 'D', 'X', '1'};
constexpr std::uint8_t kFormatVersion = 1;

void verify_against(const SparseVector& x, const SparseVector& q, VectorId id, double b1,
                    std::optional<Match>& best) {
    // B(∅, ∅) is undefined; an empty query never matches.
    if (x.empty() && q.empty()) return;
    const double sim = braun_blanquet(x, q);
    if (sim < b1) return;
    if (!best || sim > best->similarity || (sim == best->similarity && id < best->id)) {
        best = Match{id, sim};
    }
}

}  // namespace

std::span<const VectorId> InvertedTable::lookup(std::uint64_t fingerprint) const noexcept {
    const auto it = std::lower_bound(keys_.begin(), keys_.end(), fingerprint);
    if (it == keys_.end() || *it != fingerprint) return {};
    return run(static_cast<std::size_t>(it - keys_.begin()));
}

InvertedTable InvertedTable::from_pairs(std::vector<std::pair<std::uint64_t, VectorId>> pairs) {
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    InvertedTable table;
    table.ids_.reserve(pairs.size());
    for (const auto& [fp, id] : pairs) {
        if (table.keys_.empty() || table.keys_.back() != fp) {
            if (!table.keys_.empty()) table.offsets_.push_back(table.ids_.size());
            table.keys_.push_back(fp);
        }
        table.ids_.push_back(id);
    }
    if (!table.keys_.empty()) table.offsets_.push_back(table.ids_.size());
    return table;
}

std::uint32_t default_repetitions(std::uint64_t n, double fail_prob) {
    if (!(fail_prob > 0.0 && fail_prob < 1.0)) throw std::invalid_argument("default_repetitions: fail_prob outside (0, 1)");
    const auto log_n = std::max<std::uint32_t>(1, ceil_log2(n));
    const auto boost = static_cast<std::uint32_t>(std::ceil(std::log(1.0 / fail_prob)));
    return std::max<std::uint32_t>(1, log_n * boost);
}

bool routes_to_smallside(const ThresholdScheme& scheme, const Distribution& dist, std::size_t x_size) noexcept {
    if (x_size == 0) return true;
    const double size = static_cast<double>(x_size);
    if (scheme.kind() == SchemeKind::adversarial) return scheme.b1() * size <= 1.0;
    return size < dist.sum_p() * std::sqrt(3.0) / 2.0;
}

FilterIndex FilterIndex::build(std::vector<SparseVector> dataset, ThresholdScheme scheme, Distribution dist,
                               std::uint32_t repetitions, std::uint64_t master_seed) {
    if (dataset.size() < 2) throw std::invalid_argument("build: need at least 2 vectors");
    if (dataset.size() > std::numeric_limits<VectorId>::max()) {
        throw std::invalid_argument("build: more than 2^32 - 1 vectors");
    }
    if (repetitions == 0) throw std::invalid_argument("build: repetitions must be positive");
    for (const auto& x : dataset) {
        if (x.dimension() != dist.dimension()) throw std::invalid_argument("build: vector dimension mismatch");
    }
    if (scheme.kind() == SchemeKind::correlated && scheme.dimension() != dist.dimension()) {
        throw std::invalid_argument("build: scheme dimension mismatch");
    }

    FilterIndex index;
    index.dataset_ = std::move(dataset);
    index.scheme_ = std::move(scheme);
    index.dist_ = std::move(dist);
    index.master_seed_ = master_seed;

    const std::uint64_t n = index.dataset_.size();
    std::vector<VectorId> posted;
    for (VectorId id = 0; id < n; ++id) {
        if (routes_to_smallside(index.scheme_, index.dist_, index.dataset_[id].size())) {
            index.smallside_.push_back(id);
        } else {
            posted.push_back(id);
        }
    }

    const std::uint32_t levels = hash_levels_for(n);
    index.families_.reserve(repetitions);
    for (std::uint32_t r = 0; r < repetitions; ++r) index.families_.emplace_back(master_seed, r, levels);
    index.tables_.resize(repetitions);

    // Each repetition fills its own slot, so the result does not depend on scheduling.
    parallel_for(repetitions, [&](std::size_t r) {
        std::vector<std::pair<std::uint64_t, VectorId>> pairs;
        for (VectorId id : posted) {
            for (std::uint64_t fp : enumerate_filter_fingerprints(index.dataset_[id], index.scheme_, index.dist_,
                                                                  index.families_[r], n)) {
                pairs.emplace_back(fp, id);
            }
        }
        index.tables_[r] = InvertedTable::from_pairs(std::move(pairs));
    });
    return index;
}

QueryReport FilterIndex::query(const SparseVector& q, double b1, QueryMode mode) const {
    if (q.dimension() != dist_.dimension()) throw std::invalid_argument("query: dimension mismatch");
    QueryReport report;
    std::optional<Match> best;
    std::vector<bool> checked(dataset_.size(), false);

    auto consider = [&](VectorId id) {
        ++report.candidates_examined;
        if (checked[id]) return false;
        checked[id] = true;
        verify_against(dataset_[id], q, id, b1, best);
        return mode == QueryMode::first && best.has_value();
    };

    for (VectorId id : smallside_) {
        if (consider(id)) {
            report.match = best;
            return report;
        }
    }

    for (std::uint32_t r = 0; r < tables_.size(); ++r) {
        ++report.repetitions_touched;
        auto fps = enumerate_filter_fingerprints(q, scheme_, dist_, families_[r], dataset_.size());
        std::sort(fps.begin(), fps.end());
        fps.erase(std::unique(fps.begin(), fps.end()), fps.end());
        report.filters_enumerated += fps.size();
        for (std::uint64_t fp : fps) {
            for (VectorId id : tables_[r].lookup(fp)) {
                if (consider(id)) {
                    report.match = best;
                    return report;
                }
            }
        }
    }
    report.match = best;
    return report;
}

std::uint64_t FilterIndex::total_postings() const noexcept {
    std::uint64_t total = 0;
    for (const auto& t : tables_) total += t.posting_count();
    return total;
}

std::vector<std::uint8_t> FilterIndex::serialize() const {
    detail::ByteWriter w;
    for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
    w.u8(kFormatVersion);
    w.u32(dist_.dimension());
    w.u32(static_cast<std::uint32_t>(dataset_.size()));
    w.u32(repetitions());
    w.u32(hash_levels_for(dataset_.size()));
    w.u8(static_cast<std::uint8_t>(scheme_.kind()));
    w.f64(scheme_.b1());
    w.f64(scheme_.alpha());
    w.f64(scheme_.big_c());
    w.f64(scheme_.c_log_n());
    w.u64(master_seed_);
    for (double p : dist_.probs()) w.f64(p);

    for (const auto& table : tables_) {
        w.u64(table.filter_count());
        for (std::size_t k = 0; k < table.filter_count(); ++k) {
            const auto ids = table.run(k);
            w.u64(table.keys_[k]);
            w.u32(static_cast<std::uint32_t>(ids.size()));
            for (VectorId id : ids) w.u32(id);
        }
    }

    for (const auto& x : dataset_) {
        w.u32(static_cast<std::uint32_t>(x.size()));
        for (ItemId i : x.items()) w.u32(i);
    }

    w.u32(static_cast<std::uint32_t>(smallside_.size()));
    for (VectorId id : smallside_) w.u32(id);
    return w.take();
}

void FilterIndex::save(const std::filesystem::path& path) const {
    const auto bytes = serialize();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

FilterIndex FilterIndex::deserialize(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    const auto magic = r.bytes(sizeof(kMagic));
    if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic), std::end(kMagic),
                    [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); })) {
        throw FormatError("not an index file (bad magic)");
    }
    const std::uint8_t version = r.u8();
    if (version != kFormatVersion) {
        throw FormatError("unsupported index format version " + std::to_string(version));
    }

    const std::uint32_t d = r.u32();
    const std::uint32_t n = r.u32();
    const std::uint32_t reps = r.u32();
    const std::uint32_t levels = r.u32();
    const std::uint8_t kind = r.u8();
    const double b1 = r.f64();
    const double alpha = r.f64();
    const double big_c = r.f64();
    const double c_log_n = r.f64();
    const std::uint64_t master_seed = r.u64();

    if (d == 0) throw FormatError("index header: dimension is 0");
    if (n < 2) throw FormatError("index header: fewer than 2 vectors");
    if (reps == 0) throw FormatError("index header: no repetitions");
    if (levels != hash_levels_for(n)) throw FormatError("index header: hash level count does not match n");
    if (kind > static_cast<std::uint8_t>(SchemeKind::correlated)) throw FormatError("index header: unknown scheme");

    r.require_items(d, 8);
    std::vector<double> probs(d);
    for (auto& p : probs) p = r.f64();

    FilterIndex index;
    index.master_seed_ = master_seed;
    try {
        index.dist_ = Distribution(std::move(probs));
        index.scheme_ = kind == static_cast<std::uint8_t>(SchemeKind::adversarial)
                            ? ThresholdScheme::adversarial(b1)
                            : ThresholdScheme::correlated(index.dist_, alpha, big_c, c_log_n, b1);
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("index header: ") + e.what());
    }

    r.require_items(reps, 8);
    index.tables_.resize(reps);
    for (auto& table : index.tables_) {
        const std::uint64_t runs = r.u64();
        r.require_items(runs, 12);
        table.keys_.reserve(runs);
        for (std::uint64_t k = 0; k < runs; ++k) {
            const std::uint64_t fp = r.u64();
            const std::uint32_t count = r.u32();
            if (!table.keys_.empty() && fp <= table.keys_.back()) {
                throw FormatError("index table: fingerprints not strictly increasing");
            }
            if (count == 0) throw FormatError("index table: empty posting run");
            r.require_items(count, 4);
            table.keys_.push_back(fp);
            const std::size_t start = table.ids_.size();
            for (std::uint32_t c = 0; c < count; ++c) {
                const VectorId id = r.u32();
                if (id >= n) throw FormatError("index table: vector id out of range");
                if (table.ids_.size() > start && id <= table.ids_.back()) {
                    throw FormatError("index table: posting ids not strictly increasing");
                }
                table.ids_.push_back(id);
            }
            table.offsets_.push_back(table.ids_.size());
        }
    }

    r.require_items(n, 4);
    index.dataset_.reserve(n);
    for (std::uint32_t k = 0; k < n; ++k) {
        const std::uint32_t len = r.u32();
        r.require_items(len, 4);
        std::vector<ItemId> items(len);
        for (auto& i : items) i = r.u32();
        try {
            index.dataset_.emplace_back(std::move(items), d);
        } catch (const std::invalid_argument& e) {
            throw FormatError(std::string("index dataset: ") + e.what());
        }
    }

    const std::uint32_t small = r.u32();
    r.require_items(small, 4);
    index.smallside_.reserve(small);
    for (std::uint32_t k = 0; k < small; ++k) {
        const VectorId id = r.u32();
        if (id >= n) throw FormatError("index smallside: vector id out of range");
        if (!index.smallside_.empty() && id <= index.smallside_.back()) {
            throw FormatError("index smallside: ids not strictly increasing");
        }
        index.smallside_.push_back(id);
    }
    if (r.remaining() != 0) throw FormatError("index file has trailing bytes");

    index.families_.reserve(reps);
    for (std::uint32_t rep = 0; rep < reps; ++rep) index.families_.emplace_back(master_seed, rep, levels);
    return index;
}

FilterIndex FilterIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace skewpath
