#pragma once

#include "skewpath/model.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace skewpath {

/// The equation sum_j w_j p_j^rho = T on rho in [0, 1]; plain form has every w_j = 1.
///
/// f(rho) = log(sum_j w_j p_j^rho) - log(T) is convex and nonincreasing, so a root exists
/// iff f(0) >= 0 >= f(1).
class RhoProblem {
public:
    static RhoProblem plain(std::vector<double> probs, double target);
    static RhoProblem weighted(std::vector<double> probs, std::vector<double> weights, double target);

    const std::vector<double>& probs() const noexcept { return probs_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double target() const noexcept { return target_; }
    bool is_weighted() const noexcept { return weighted_; }

    /// sum_j w_j p_j^rho with compensated summation; terms below 1e-300 count as 0.
    double weighted_sum(double rho) const;
    double f(double rho) const;
    double f_prime(double rho) const;

private:
    RhoProblem(std::vector<double> probs, std::vector<double> weights, double target, bool weighted);

    std::vector<double> probs_;
    std::vector<double> weights_;
    std::vector<double> log_probs_;
    double target_ = 0.0;
    bool weighted_ = false;
};

struct RhoSolution {
    double rho = 0.0;
    double lower = 0.0;   // Taylor bound, clamped to [0, 1]
    double upper = 1.0;   // last secant iterate
    std::uint32_t iterations = 0;  // bisection steps
    double residual = 0.0;         // |f(rho)|
};

inline constexpr double kDefaultRhoTolerance = 1e-10;

/// Unique root of f on [0, 1]: bisection on [lower, upper], each step keeping
/// f(lo) >= 0 >= f(hi). Throws InfeasibleError if no bracket exists.
RhoSolution solve_rho(const RhoProblem& problem, double tol = kDefaultRhoTolerance);

/// One secant step from an upper bound c: the zero of the chord through (0, f(0)) and (c, f(c)),
/// -c f(0) / (f(c) - f(0)). Throws std::domain_error when f(c) == f(0) or c outside (0, 1].
double rho_upper_secant(const RhoProblem& problem, double c);

/// Iterates rho_upper_secant from c = 1 until successive iterates differ by < `step_tol` or
/// `max_steps` iterates have been produced. The first element is the c = 1 step.
std::vector<double> rho_secant_sequence(const RhoProblem& problem, double step_tol = 1e-9,
                                        std::uint32_t max_steps = 50);

/// -f(0) / f'(0); for the plain form log(b1) / mean(log p_j).
double rho_lower_taylor(const RhoProblem& problem);

/// log(b1) / log(mean p): the exponent of the skew-oblivious baseline on the same items.
double rho_chosen_path(const std::vector<double>& probs, double b1);

/// Closed form for items in {p_a, p_b = p_a^2} with counts q_a, q_b:
/// p_a^rho = (sqrt(4 q_b b1 q + q_a^2) - q_a) / (2 q_b), q = q_a + q_b.
/// Throws InfeasibleError when the root lies outside [p_a, 1] (rho outside [0, 1]).
double rho_quadratic_exact(std::uint64_t q_a, std::uint64_t q_b, double p_a, double b1);

struct AdversarialQueryRho {
    /// sum_{i in q} p_i^rho = b1 |q|; drives the query cost prediction.
    RhoSolution per_item;
    /// sum_{i in q} p_i^rho = b1 sum_{i in q} p_i, when it has a root in [0, 1].
    std::optional<RhoSolution> sum_p;
    /// log(b1) / log(mean_{i in q} p_i).
    double rho_cp = 0.0;
};

AdversarialQueryRho rho_adversarial_query(const Distribution& dist, const SparseVector& q, double b1);

/// sum_i p_i^{1 + rho} = b1 sum_i p_i.
RhoSolution rho_adversarial_preprocess(const Distribution& dist, double b1);

/// sum_i p_i^{1 + rho} / (p_i (1 - alpha) + alpha) = sum_i p_i.
RhoSolution rho_correlated(const Distribution& dist, double alpha);

}  // namespace skewpath
