#include "skewpath/skew_analysis.hpp"

#include "skewpath/error.hpp"
#include "skewpath/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace skewpath {

namespace {

class DenseIndexer {
public:
    ItemId id_for(std::uint64_t original) {
        const auto [it, inserted] = ids_.try_emplace(original, static_cast<ItemId>(originals_.size()));
        if (inserted) originals_.push_back(original);
        return it->second;
    }

    TransactionDataset finish(std::vector<std::vector<ItemId>> rows) {
        TransactionDataset ds;
        ds.d = static_cast<std::uint32_t>(originals_.size());
        ds.original_ids = std::move(originals_);
        ds.counts.assign(ds.d, 0);
        ds.transactions.reserve(rows.size());
        for (auto& row : rows) {
            ds.transactions.push_back(SparseVector::from_unsorted(std::move(row), ds.d));
            for (ItemId i : ds.transactions.back().items()) ++ds.counts[i];
        }
        return ds;
    }

private:
    std::unordered_map<std::uint64_t, ItemId> ids_;
    std::vector<std::uint64_t> originals_;
};

double binomial(std::uint64_t m, std::uint32_t k) {
    if (m < k) return 0.0;
    const double x = static_cast<double>(m);
    return k == 2 ? x * (x - 1) / 2.0 : x * (x - 1) * (x - 2) / 6.0;
}

}  // namespace

TransactionDataset load_transactions(std::istream& in) {
    DenseIndexer indexer;
    std::vector<std::vector<ItemId>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::vector<ItemId> row;
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
            row.push_back(indexer.id_for(value));
            p = next;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("empty dataset", 0);
    return indexer.finish(std::move(rows));
}

TransactionDataset load_transactions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open transaction file " + path.string());
    return load_transactions(in);
}

TransactionDataset make_transactions(const std::vector<SparseVector>& vectors) {
    DenseIndexer indexer;
    std::vector<std::vector<ItemId>> rows;
    rows.reserve(vectors.size());
    for (const auto& v : vectors) {
        std::vector<ItemId> row;
        row.reserve(v.size());
        for (ItemId i : v.items()) row.push_back(indexer.id_for(i));
        rows.push_back(std::move(row));
    }
    return indexer.finish(std::move(rows));
}

std::vector<ProfileRow> frequency_profile(const TransactionDataset& ds) {
    if (ds.n() < 2) throw std::invalid_argument("frequency_profile: needs n >= 2");
    if (ds.d < 2) throw std::invalid_argument("frequency_profile: needs d >= 2");
    std::vector<std::uint64_t> sorted = ds.counts;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double n = static_cast<double>(ds.n());
    const double d = static_cast<double>(ds.d);
    std::vector<ProfileRow> rows;
    rows.reserve(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        ProfileRow row;
        row.rank = static_cast<std::uint32_t>(k + 1);
        row.p = static_cast<double>(sorted[k]) / n;
        row.rank_fraction = static_cast<double>(row.rank) / d;
        row.log_d_rank = std::log(static_cast<double>(row.rank)) / std::log(d);
        row.y = 1.0 + std::log(row.p) / std::log(n);
        rows.push_back(row);
    }
    return rows;
}

IndependenceRatio independence_ratio(const TransactionDataset& ds, std::uint32_t k) {
    if (k != 2 && k != 3) throw std::invalid_argument("independence_ratio: k must be 2 or 3");
    if (ds.n() == 0) throw std::invalid_argument("independence_ratio: empty dataset");
    if (ds.d < k) throw std::invalid_argument("independence_ratio: needs d >= k");

    IndependenceRatio out;
    out.k = k;
    CompensatedSum observed;
    for (const auto& t : ds.transactions) observed.add(binomial(t.size(), k));
    out.observed = observed.value();

    // Newton's identities: e_k from the power sums P_1..P_3 of the frequencies.
    const double n = static_cast<double>(ds.n());
    CompensatedSum p1;
    CompensatedSum p2;
    CompensatedSum p3;
    for (std::uint64_t c : ds.counts) {
        const double p = static_cast<double>(c) / n;
        p1.add(p);
        p2.add(p * p);
        p3.add(p * p * p);
    }
    const double e1 = p1.value();
    const double e2 = (e1 * p1.value() - p2.value()) / 2.0;
    const double ek = k == 2 ? e2 : (e2 * p1.value() - e1 * p2.value() + p3.value()) / 3.0;
    out.estimated = n * ek;
    if (!(out.estimated > 0.0)) throw std::domain_error("independence_ratio: estimated count is 0");
    out.ratio = out.observed / out.estimated;
    return out;
}

FittedDistribution fit_distribution(const TransactionDataset& ds, bool clamp) {
    if (ds.n() == 0) throw std::invalid_argument("fit_distribution: empty dataset");
    FittedDistribution fit;
    std::vector<double> probs;
    probs.reserve(ds.d);
    const double n = static_cast<double>(ds.n());
    for (std::uint64_t c : ds.counts) {
        double p = static_cast<double>(c) / n;
        if (clamp && p > 0.5) {
            p = 0.5;
            ++fit.clamped;
        }
        probs.push_back(p);
    }
    fit.dist = Distribution(std::move(probs));
    return fit;
}

}  // namespace skewpath
