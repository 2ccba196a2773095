#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "solver.hpp"

namespace swamp {

/// Relaxed belief propagation messages, all stored row-major M x N.
///   A[mu,i], B[mu,i]   factor -> variable (Gaussian precision / linear term)
///   a[mu,i], v[mu,i]   variable -> factor (mean / variance)
/// This is a reference path: memory and time per step are O(MN).
struct RbpState {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vector A, B, a, v;
    std::size_t t = 0;

    std::size_t at(std::size_t mu, std::size_t i) const { return mu * cols + i; }
};

inline constexpr std::size_t kRbpMaxMessages = 40'000'000;

inline RbpState rbp_init(const ProblemInstance& inst)
{
    if (inst.matrix.is_sparse())
        throw std::invalid_argument("r-BP needs a dense matrix");
    detail::require_awgn(inst, "r-BP");
    const std::size_t rows = inst.rows(), cols = inst.cols();
    if (4 * rows * cols > kRbpMaxMessages)
        throw std::invalid_argument("r-BP: instance exceeds the message budget");
    const auto m0 = prior_mean_variance(inst.prior);
    RbpState s;
    s.rows = rows;
    s.cols = cols;
    s.A.assign(rows * cols, 0.0);
    s.B.assign(rows * cols, 0.0);
    s.a.assign(rows * cols, m0.mean);
    s.v.assign(rows * cols, m0.var);
    return s;
}

namespace detail {

inline double rbp_delta(const ProblemInstance& inst)
{
    return std::max(std::get<AwgnChannel>(inst.channel).delta, kVarianceFloor);
}

/// Factor-side sums over all variables: S_mu = sum_j Phi a_{j->mu}, T_mu = sum_j Phi^2 v_{j->mu}.
inline void rbp_row_sums(const RbpState& s, const ProblemInstance& inst, Vector& S, Vector& T)
{
    S.assign(s.rows, 0.0);
    T.assign(s.rows, 0.0);
    for (std::size_t mu = 0; mu < s.rows; ++mu)
        for (std::size_t j = 0; j < s.cols; ++j) {
            const double f = inst.matrix(mu, j);
            S[mu] += f * s.a[s.at(mu, j)];
            T[mu] += f * f * s.v[s.at(mu, j)];
        }
}

/// Recomputes A_{mu->i}, B_{mu->i} for all mu from the cavity sums excluding i.
inline void rbp_factor_messages(RbpState& s, const ProblemInstance& inst, std::size_t i, const Vector& S,
                                const Vector& T, double delta)
{
    for (std::size_t mu = 0; mu < s.rows; ++mu) {
        const std::size_t k = s.at(mu, i);
        const double f = inst.matrix(mu, i);
        const double den = std::max(delta + T[mu] - f * f * s.v[k], delta);
        s.A[k] = f * f / den;
        s.B[k] = f * (inst.y[mu] - (S[mu] - f * s.a[k])) / den;
    }
}

inline Moments rbp_belief(double sum_a, double sum_b, const PriorParams& prior)
{
    if (!(sum_a > 0.0))
        return posterior_moments(std::numeric_limits<double>::infinity(), 0.0, prior);
    return posterior_moments(1.0 / sum_a, sum_b / sum_a, prior);
}

/// Recomputes a_{i->mu}, v_{i->mu} for all mu from the cavity sums excluding mu.
inline void rbp_variable_messages(RbpState& s, const PriorParams& prior, std::size_t i)
{
    double sum_a = 0.0, sum_b = 0.0;
    for (std::size_t mu = 0; mu < s.rows; ++mu) {
        sum_a += s.A[s.at(mu, i)];
        sum_b += s.B[s.at(mu, i)];
    }
    for (std::size_t mu = 0; mu < s.rows; ++mu) {
        const std::size_t k = s.at(mu, i);
        const auto m = rbp_belief(sum_a - s.A[k], sum_b - s.B[k], prior);
        s.a[k] = m.mean;
        s.v[k] = m.var;
    }
}

} // namespace detail

/// Posterior marginals from the full (non-cavity) message sums.
inline std::pair<Vector, Vector> rbp_marginals(const RbpState& s, const PriorParams& prior)
{
    Vector a(s.cols), v(s.cols);
    for (std::size_t i = 0; i < s.cols; ++i) {
        double sum_a = 0.0, sum_b = 0.0;
        for (std::size_t mu = 0; mu < s.rows; ++mu) {
            sum_a += s.A[s.at(mu, i)];
            sum_b += s.B[s.at(mu, i)];
        }
        const auto m = detail::rbp_belief(sum_a, sum_b, prior);
        a[i] = m.mean;
        v[i] = m.var;
    }
    return {std::move(a), std::move(v)};
}

/// One r-BP time step: every message updated once.
///
/// parallel: all A, B from the old a, v; then all a, v from the new A, B.
/// random_sequential: visit variables in a random order; for each, refresh
/// its incoming A, B against the current state, then its outgoing a, v.
inline StepResult rbp_step(RbpState& s, const ProblemInstance& inst, Schedule schedule, Rng& rng)
{
    if (s.rows != inst.rows() || s.cols != inst.cols())
        throw std::invalid_argument("r-BP state dimensions do not match the instance");
    const double delta = detail::rbp_delta(inst);
    Vector S, T;
    detail::rbp_row_sums(s, inst, S, T);

    if (schedule == Schedule::parallel) {
        for (std::size_t i = 0; i < s.cols; ++i)
            detail::rbp_factor_messages(s, inst, i, S, T, delta);
        for (std::size_t i = 0; i < s.cols; ++i)
            detail::rbp_variable_messages(s, inst.prior, i);
    } else {
        std::vector<std::size_t> order(s.cols);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        Vector old_a(s.rows), old_v(s.rows);
        for (const std::size_t i : order) {
            detail::rbp_factor_messages(s, inst, i, S, T, delta);
            for (std::size_t mu = 0; mu < s.rows; ++mu) {
                old_a[mu] = s.a[s.at(mu, i)];
                old_v[mu] = s.v[s.at(mu, i)];
            }
            detail::rbp_variable_messages(s, inst.prior, i);
            for (std::size_t mu = 0; mu < s.rows; ++mu) {
                const double f = inst.matrix(mu, i);
                S[mu] += f * (s.a[s.at(mu, i)] - old_a[mu]);
                T[mu] += f * f * (s.v[s.at(mu, i)] - old_v[mu]);
            }
        }
    }
    ++s.t;

    for (std::size_t k = 0; k < s.A.size(); ++k)
        if (!std::isfinite(s.A[k]) || !std::isfinite(s.B[k]) || !std::isfinite(s.a[k]) || !std::isfinite(s.v[k]))
            return StepResult::diverged;
    return StepResult::ok;
}

} // namespace swamp
