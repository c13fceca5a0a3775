#include "skewpath/rho_solver.hpp"

#include "skewpath/error.hpp"
#include "skewpath/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace skewpath {

namespace {

constexpr double kFlushBelow = 1e-300;
constexpr std::uint32_t kMaxBisection = 200;

}  // namespace

RhoProblem::RhoProblem(std::vector<double> probs, std::vector<double> weights, double target, bool weighted)
    : probs_(std::move(probs)), weights_(std::move(weights)), target_(target), weighted_(weighted) {
    if (probs_.empty()) throw std::invalid_argument("rho problem needs at least one probability");
    if (weights_.size() != probs_.size()) throw std::invalid_argument("rho problem: weights/probs size mismatch");
    if (!(target_ > 0.0) || !std::isfinite(target_)) throw std::invalid_argument("rho problem: target must be positive");
    log_probs_.reserve(probs_.size());
    for (std::size_t k = 0; k < probs_.size(); ++k) {
        if (!(probs_[k] > 0.0 && probs_[k] <= 1.0)) throw std::invalid_argument("rho problem: p outside (0, 1]");
        if (!(weights_[k] > 0.0)) throw std::invalid_argument("rho problem: weights must be positive");
        log_probs_.push_back(std::log(probs_[k]));
    }
}

RhoProblem RhoProblem::plain(std::vector<double> probs, double target) {
    std::vector<double> ones(probs.size(), 1.0);
    return RhoProblem(std::move(probs), std::move(ones), target, false);
}

RhoProblem RhoProblem::weighted(std::vector<double> probs, std::vector<double> weights, double target) {
    return RhoProblem(std::move(probs), std::move(weights), target, true);
}

double RhoProblem::weighted_sum(double rho) const {
    CompensatedSum sum;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
        const double term = weights_[k] * std::exp(rho * log_probs_[k]);
        if (term >= kFlushBelow) sum.add(term);
    }
    return sum.value();
}

double RhoProblem::f(double rho) const { return std::log(weighted_sum(rho)) - std::log(target_); }

double RhoProblem::f_prime(double rho) const {
    CompensatedSum num;
    CompensatedSum den;
    for (std::size_t k = 0; k < probs_.size(); ++k) {
        const double term = weights_[k] * std::exp(rho * log_probs_[k]);
        if (term < kFlushBelow) continue;
        num.add(term * log_probs_[k]);
        den.add(term);
    }
    return num.value() / den.value();
}

double rho_lower_taylor(const RhoProblem& problem) {
    const double f0 = problem.f(0.0);
    if (f0 == 0.0) return 0.0;
    const double slope = problem.f_prime(0.0);
    if (slope == 0.0) return std::numeric_limits<double>::infinity();
    return -f0 / slope;
}

double rho_upper_secant(const RhoProblem& problem, double c) {
    if (!(c > 0.0 && c <= 1.0)) throw std::domain_error("rho_upper_secant: c must lie in (0, 1]");
    const double f0 = problem.f(0.0);
    const double fc = problem.f(c);
    if (fc == f0) throw std::domain_error("rho_upper_secant: degenerate chord, f(c) == f(0)");
    return -c * f0 / (fc - f0);
}

std::vector<double> rho_secant_sequence(const RhoProblem& problem, double step_tol, std::uint32_t max_steps) {
    std::vector<double> seq;
    double c = 1.0;
    for (std::uint32_t step = 0; step < max_steps; ++step) {
        const double next = rho_upper_secant(problem, c);
        seq.push_back(next);
        if (std::abs(c - next) < step_tol || next <= 0.0) break;
        c = next;
    }
    return seq;
}

double rho_chosen_path(const std::vector<double>& probs, double b1) {
    if (probs.empty()) throw std::invalid_argument("rho_chosen_path: no probabilities");
    const double mean = compensated_sum(probs) / static_cast<double>(probs.size());
    return std::log(b1) / std::log(mean);
}

RhoSolution solve_rho(const RhoProblem& problem, double tol) {
    const double f0 = problem.f(0.0);
    const double f1 = problem.f(1.0);
    RhoSolution sol;

    if (f1 > tol) {
        throw InfeasibleError("rho equation infeasible: weighted sum at rho=1 exceeds the target");
    }
    if (f0 < -tol) {
        throw InfeasibleError("rho equation infeasible: weighted sum at rho=0 is below the target");
    }
    if (std::abs(f0) <= tol) {
        sol.rho = 0.0;
        sol.lower = 0.0;
        sol.upper = 0.0;
        sol.residual = std::abs(f0);
        return sol;
    }
    if (std::abs(f1) <= tol) {
        sol.rho = 1.0;
        sol.lower = std::clamp(rho_lower_taylor(problem), 0.0, 1.0);
        sol.upper = 1.0;
        sol.residual = std::abs(f1);
        return sol;
    }

    sol.lower = std::clamp(rho_lower_taylor(problem), 0.0, 1.0);
    const auto secant = rho_secant_sequence(problem);
    sol.upper = std::clamp(secant.back(), 0.0, 1.0);

    double lo = sol.lower;
    double hi = sol.upper;
    double f_lo = problem.f(lo);
    double f_hi = problem.f(hi);
    // Rounding can push a tight bound a hair across the root; fall back to the full interval.
    if (f_lo < -tol) {
        lo = 0.0;
        f_lo = f0;
    }
    if (f_hi > tol) {
        hi = 1.0;
        f_hi = f1;
    }
    if (std::abs(f_lo) <= tol) {
        sol.rho = lo;
        sol.residual = std::abs(f_lo);
        return sol;
    }
    if (std::abs(f_hi) <= tol) {
        sol.rho = hi;
        sol.residual = std::abs(f_hi);
        return sol;
    }

    double mid = 0.5 * (lo + hi);
    double f_mid = problem.f(mid);
    while (sol.iterations < kMaxBisection) {
        if (f_lo < 0.0 || f_hi > 0.0) throw std::logic_error("solve_rho: bisection lost its bracket");
        mid = 0.5 * (lo + hi);
        f_mid = problem.f(mid);
        ++sol.iterations;
        if (std::abs(f_mid) <= tol || hi - lo <= 4 * std::numeric_limits<double>::epsilon()) break;
        if (f_mid > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }

    // One Newton polish, kept only if it stays inside the bracket and lowers the residual.
    const double slope = problem.f_prime(mid);
    if (slope < 0.0) {
        const double polished = mid - f_mid / slope;
        if (polished >= lo && polished <= hi) {
            const double f_pol = problem.f(polished);
            if (std::abs(f_pol) < std::abs(f_mid)) {
                mid = polished;
                f_mid = f_pol;
            }
        }
    }
    sol.rho = mid;
    sol.residual = std::abs(f_mid);
    return sol;
}

double rho_quadratic_exact(std::uint64_t q_a, std::uint64_t q_b, double p_a, double b1) {
    if (!(p_a > 0.0 && p_a < 1.0)) throw std::invalid_argument("rho_quadratic_exact: p_a must lie in (0, 1)");
    if (!(b1 > 0.0)) throw std::invalid_argument("rho_quadratic_exact: b1 must be positive");
    if (q_a + q_b == 0) throw std::invalid_argument("rho_quadratic_exact: empty item set");
    const double qa = static_cast<double>(q_a);
    const double qb = static_cast<double>(q_b);
    const double rhs = b1 * (qa + qb);
    // Rationalized root of qb x^2 + qa x - rhs = 0; avoids cancellation when qb is small.
    const double x = qb == 0.0 ? rhs / qa : 2.0 * rhs / (std::sqrt(4.0 * qb * rhs + qa * qa) + qa);
    if (!(x > 0.0 && x <= 1.0)) throw InfeasibleError("rho_quadratic_exact: p_a^rho outside (0, 1]");
    if (x < p_a * (1.0 - 1e-12)) throw InfeasibleError("rho_quadratic_exact: root above 1 (sum of p exceeds b1 q)");
    return std::min(1.0, std::log(x) / std::log(p_a));
}

AdversarialQueryRho rho_adversarial_query(const Distribution& dist, const SparseVector& q, double b1) {
    if (q.empty()) throw std::invalid_argument("rho_adversarial_query: empty query");
    if (q.dimension() != dist.dimension()) throw std::invalid_argument("rho_adversarial_query: dimension mismatch");
    std::vector<double> probs;
    probs.reserve(q.size());
    for (ItemId i : q.items()) probs.push_back(dist.p(i));

    AdversarialQueryRho out;
    out.rho_cp = rho_chosen_path(probs, b1);
    const double sum_q = compensated_sum(probs);
    out.per_item = solve_rho(RhoProblem::plain(probs, b1 * static_cast<double>(q.size())));
    try {
        out.sum_p = solve_rho(RhoProblem::plain(probs, b1 * sum_q));
    } catch (const InfeasibleError&) {
        out.sum_p.reset();
    }
    return out;
}

RhoSolution rho_adversarial_preprocess(const Distribution& dist, double b1) {
    std::vector<double> probs(dist.probs().begin(), dist.probs().end());
    return solve_rho(RhoProblem::weighted(probs, probs, b1 * dist.sum_p()));
}

RhoSolution rho_correlated(const Distribution& dist, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("rho_correlated: alpha must lie in (0, 1]");
    std::vector<double> probs(dist.probs().begin(), dist.probs().end());
    std::vector<double> weights;
    weights.reserve(probs.size());
    for (double p : probs) weights.push_back(p / (p * (1.0 - alpha) + alpha));
    return solve_rho(RhoProblem::weighted(std::move(probs), std::move(weights), dist.sum_p()));
}

}  // namespace skewpath
