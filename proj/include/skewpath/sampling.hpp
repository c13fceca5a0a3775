#pragma once

#include "skewpath/model.hpp"
#include "skewpath/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace skewpath {

/// Draws x ~ D[p_1..p_d]: bit i set independently with probability p_i (one uniform per bit).
SparseVector sample_vector(const Distribution& dist, SeededRng& rng);

/// Same law as sample_vector on a uniform distribution, drawn by geometric gap skipping.
/// Consumes O(|x|) uniforms instead of d, so streams differ from sample_vector.
SparseVector sample_vector_uniform_skip(std::uint32_t d, double p, SeededRng& rng);

/// n independent vectors; vector k uses stream k of `seed`.
std::vector<SparseVector> sample_dataset(const Distribution& dist, std::size_t n, std::uint64_t seed);

/// Joint law of (x_i, q_i) for two bits with common marginal w and Pearson correlation alpha.
/// p01 is Pr[x_i = 0, q_i = 1], p10 is Pr[x_i = 1, q_i = 0].
struct JointBitProbs {
    double p00 = 0.0;
    double p01 = 0.0;
    double p10 = 0.0;
    double p11 = 0.0;

    /// Pearson coefficient recomputed from the four cells.
    double pearson() const noexcept;
};

/// Throws std::invalid_argument unless w and alpha lie in [0, 1].
JointBitProbs joint_bit_probs(double w, double alpha);

/// q ~ D_alpha(x): per bit, with probability alpha copy x_i, otherwise draw Bernoulli(p_i).
/// Always consumes two uniforms per bit.
SparseVector sample_correlated_query(const Distribution& dist, const SparseVector& x, double alpha,
                                     SeededRng& rng);

/// Equivalent conditional form: if x_i = 1 then q_i = 1 w.p. alpha(1-p_i)+p_i, else w.p. p_i(1-alpha).
/// Kept as a cross-check of sample_correlated_query.
SparseVector sample_correlated_query_conditional(const Distribution& dist, const SparseVector& x, double alpha,
                                                 SeededRng& rng);

/// One vector per line as space-separated sorted item ids. `header`, if given, is written
/// as a leading "# ..." comment line.
void write_dataset(std::ostream& out, std::span<const SparseVector> vectors,
                   const std::optional<std::string>& header = std::nullopt);

/// Reads the format written by write_dataset. Comment lines ('#') are skipped; blank lines are
/// empty vectors. Every id must be < d. Throws ParseError with the offending line number.
std::vector<SparseVector> read_dataset(std::istream& in, std::uint32_t d);
std::vector<SparseVector> read_dataset(const std::filesystem::path& path, std::uint32_t d);

}  // namespace skewpath
