#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "channel.hpp"
#include "model.hpp"
#include "prior.hpp"
#include "rng.hpp"

namespace swamp {

/// Per-run estimator state shared by AMP, GAMP, SwAMP and G-SwAMP.
struct SolverState {
    Vector a;     ///< posterior means, length N
    Vector v;     ///< posterior variances, length N
    Vector omega; ///< cavity means of z, length M
    Vector V;     ///< cavity variances of z, length M
    Vector g;     ///< channel terms held over the last step or sweep, length M
    std::size_t t = 0;
    /// Matrix entries touched so far; one unit per stored entry per pass.
    std::uint64_t element_visits = 0;
};

enum class Algorithm { rbp, amp, gamp, swamp, gswamp };
enum class Schedule { parallel, random_sequential };
enum class Status { converged, max_iters, diverged };
enum class StepResult { ok, diverged };

inline std::string_view to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::rbp: return "rbp";
    case Algorithm::amp: return "amp";
    case Algorithm::gamp: return "gamp";
    case Algorithm::swamp: return "swamp";
    case Algorithm::gswamp: return "gswamp";
    }
    return "?";
}

inline std::string_view to_string(Schedule s)
{
    return s == Schedule::parallel ? "parallel" : "random_sequential";
}

inline std::string_view to_string(Status s)
{
    switch (s) {
    case Status::converged: return "converged";
    case Status::max_iters: return "max_iters";
    case Status::diverged: return "diverged";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view s)
{
    for (auto a : {Algorithm::rbp, Algorithm::amp, Algorithm::gamp, Algorithm::swamp, Algorithm::gswamp})
        if (s == to_string(a))
            return a;
    throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

inline Schedule parse_schedule(std::string_view s)
{
    if (s == "parallel")
        return Schedule::parallel;
    if (s == "random_sequential" || s == "sequential")
        return Schedule::random_sequential;
    throw std::invalid_argument("unknown schedule '" + std::string(s) + "'");
}

struct SolveConfig {
    std::size_t t_max = 1000;
    double epsilon = 1e-8; ///< stop once mean |a_new - a_old| < epsilon
    std::uint64_t seed = 0;
    Schedule schedule = Schedule::random_sequential; ///< used by r-BP only
    Algorithm algorithm = Algorithm::swamp;
    /// Bail out when mean(a^2) exceeds this; unset means 1e6 * (E_prior[x^2] + 1).
    std::optional<double> divergence_threshold;

    void validate() const
    {
        if (t_max < 1)
            throw std::invalid_argument("t_max must be >= 1");
        if (!(epsilon > 0.0))
            throw std::invalid_argument("epsilon must be > 0");
        if (divergence_threshold && !(*divergence_threshold > 0.0))
            throw std::invalid_argument("divergence_threshold must be > 0");
    }
};

struct TraceRow {
    std::size_t iter = 0;
    double mean_abs_delta_a = 0.0;
    double mse = std::numeric_limits<double>::quiet_NaN(); ///< NaN without ground truth
    double elapsed_seconds = 0.0;
};

struct SolveReport {
    Status status = Status::max_iters;
    std::size_t iterations = 0;
    std::vector<TraceRow> trace;
    Vector a;
    Vector v;
    std::uint64_t seed = 0;

    double final_mse() const
    {
        return trace.empty() ? std::numeric_limits<double>::quiet_NaN() : trace.back().mse;
    }
};

inline double default_divergence_threshold(const PriorParams& prior)
{
    return 1e6 * (prior.second_moment() + 1.0);
}

/// (1/N) sum (a_i - x_i)^2
inline double mse(std::span<const double> a, std::span<const double> x)
{
    if (a.size() != x.size())
        throw std::invalid_argument("mse: length mismatch");
    if (a.empty())
        return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - x[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

inline double mean_abs_difference(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::abs(a[i] - b[i]);
    return a.empty() ? 0.0 : acc / static_cast<double>(a.size());
}

/// Finite state with mean(a^2) below the threshold.
inline bool state_is_sane(const SolverState& s, double threshold)
{
    double energy = 0.0;
    for (std::size_t i = 0; i < s.a.size(); ++i) {
        if (!std::isfinite(s.a[i]) || !std::isfinite(s.v[i]) || s.v[i] < 0.0)
            return false;
        energy += s.a[i] * s.a[i];
    }
    for (std::size_t m = 0; m < s.omega.size(); ++m)
        if (!std::isfinite(s.omega[m]) || !std::isfinite(s.V[m]))
            return false;
    return s.a.empty() || energy / static_cast<double>(s.a.size()) <= threshold;
}

/// a = prior mean, v = prior variance, V = Phi^2 v, omega = Phi a, g = 0.
inline SolverState init_state(const ProblemInstance& inst)
{
    const auto& phi = inst.matrix;
    const auto m0 = prior_mean_variance(inst.prior);
    SolverState s;
    s.a.assign(phi.cols(), m0.mean);
    s.v.assign(phi.cols(), m0.var);
    s.omega.assign(phi.rows(), 0.0);
    s.V.assign(phi.rows(), 0.0);
    s.g.assign(phi.rows(), 0.0);
    for (std::size_t mu = 0; mu < phi.rows(); ++mu) {
        double w = 0.0, var = 0.0;
        phi.for_each_in_row(mu, [&](std::size_t i, double f) {
            w += f * s.a[i];
            var += f * f * s.v[i];
        });
        s.omega[mu] = w;
        s.V[mu] = var;
    }
    return s;
}

namespace detail {

/// Posterior moments of coefficient i from its accumulated precision
/// sum_mu Phi^2 dg and score sum_mu Phi g. A zero precision means the column
/// carries no information and the prior is returned.
inline Moments coefficient_update(double a_old, double precision, double score, const PriorParams& prior)
{
    if (!(precision > 0.0))
        return posterior_moments(std::numeric_limits<double>::infinity(), 0.0, prior);
    const double sigma2 = 1.0 / precision;
    return posterior_moments(sigma2, a_old + sigma2 * score, prior);
}

/// Recomputes V = Phi^2 v and omega = Phi a - V g for every row.
inline void refresh_factors(SolverState& s, const MeasurementMatrix& phi)
{
    for (std::size_t mu = 0; mu < phi.rows(); ++mu) {
        double w = 0.0, var = 0.0;
        phi.for_each_in_row(mu, [&](std::size_t i, double f) {
            w += f * s.a[i];
            var += f * f * s.v[i];
        });
        s.V[mu] = var;
        s.omega[mu] = w - var * s.g[mu];
    }
    s.element_visits += phi.nonzeros();
}

/// One parallel (G)AMP iteration: all R, Sigma^2 from the old state, then all
/// a, v, then V and the Onsager-corrected omega with the old channel term.
template <class Channel>
void parallel_step(SolverState& s, const ProblemInstance& inst, const Channel& ch)
{
    const auto& phi = inst.matrix;
    const std::size_t rows = phi.rows();
    Vector dg(rows);
    for (std::size_t mu = 0; mu < rows; ++mu) {
        const auto terms = ch.eval(inst.y[mu], s.omega[mu], std::max(s.V[mu], kVarianceFloor));
        s.g[mu] = terms.g;
        dg[mu] = terms.dg;
    }
    Vector a_new(phi.cols()), v_new(phi.cols());
    for (std::size_t i = 0; i < phi.cols(); ++i) {
        double precision = 0.0, score = 0.0;
        phi.for_each_in_col(i, [&](std::size_t mu, double f) {
            precision += f * f * dg[mu];
            score += f * s.g[mu];
        });
        const auto post = coefficient_update(s.a[i], precision, score, inst.prior);
        a_new[i] = post.mean;
        v_new[i] = post.var;
    }
    s.element_visits += phi.nonzeros();
    s.a = std::move(a_new);
    s.v = std::move(v_new);
    refresh_factors(s, phi);
    ++s.t;
}

/// One Swept AMP sweep. The channel terms g are computed once from the state
/// left by the previous sweep and held; each coefficient, visited in a fresh
/// random order, reads the current omega and V and pushes its change back
/// into them incrementally.
template <class Channel>
void swept_sweep(SolverState& s, const ProblemInstance& inst, const Channel& ch, Rng& rng)
{
    const auto& phi = inst.matrix;
    for (std::size_t mu = 0; mu < phi.rows(); ++mu)
        s.g[mu] = ch.eval(inst.y[mu], s.omega[mu], std::max(s.V[mu], kVarianceFloor)).g;
    refresh_factors(s, phi);

    std::vector<std::size_t> order(phi.cols());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);

    for (const std::size_t i : order) {
        double precision = 0.0, score = 0.0;
        phi.for_each_in_col(i, [&](std::size_t mu, double f) {
            const auto terms = ch.eval(inst.y[mu], s.omega[mu], std::max(s.V[mu], kVarianceFloor));
            precision += f * f * terms.dg;
            score += f * terms.g;
        });
        const auto post = coefficient_update(s.a[i], precision, score, inst.prior);
        const double da = post.mean - s.a[i];
        const double dv = post.var - s.v[i];
        s.a[i] = post.mean;
        s.v[i] = post.var;
        phi.for_each_in_col(i, [&](std::size_t mu, double f) {
            const double dV = f * f * dv;
            s.V[mu] += dV;
            s.omega[mu] += f * da - s.g[mu] * dV;
        });
        s.element_visits += 2 * phi.col_size(i);
    }
    ++s.t;
}

inline const AwgnChannel& require_awgn(const ProblemInstance& inst, const char* who)
{
    const auto* awgn = std::get_if<AwgnChannel>(&inst.channel);
    if (!awgn)
        throw std::invalid_argument(std::string(who) + " requires an AWGN channel; use the generalized variant");
    return *awgn;
}

inline void check_dims(const SolverState& s, const ProblemInstance& inst)
{
    if (s.a.size() != inst.cols() || s.v.size() != inst.cols() || s.omega.size() != inst.rows()
        || s.V.size() != inst.rows() || s.g.size() != inst.rows())
        throw std::invalid_argument("solver state dimensions do not match the instance");
}

inline StepResult verdict(const SolverState& s, const ProblemInstance& inst, std::optional<double> threshold)
{
    return state_is_sane(s, threshold.value_or(default_divergence_threshold(inst.prior))) ? StepResult::ok
                                                                                          : StepResult::diverged;
}

} // namespace detail

/// Parallel AMP iteration (AWGN channel).
inline StepResult amp_step(SolverState& s, const ProblemInstance& inst, std::optional<double> threshold = {})
{
    detail::check_dims(s, inst);
    detail::parallel_step(s, inst, detail::require_awgn(inst, "amp_step"));
    return detail::verdict(s, inst, threshold);
}

/// Parallel GAMP iteration for any output channel.
inline StepResult gamp_step(SolverState& s, const ProblemInstance& inst, std::optional<double> threshold = {})
{
    detail::check_dims(s, inst);
    std::visit([&](const auto& ch) { detail::parallel_step(s, inst, ch); }, inst.channel);
    return detail::verdict(s, inst, threshold);
}

/// Swept AMP sweep (AWGN channel).
inline StepResult swamp_sweep(SolverState& s, const ProblemInstance& inst, Rng& rng,
                              std::optional<double> threshold = {})
{
    detail::check_dims(s, inst);
    detail::swept_sweep(s, inst, detail::require_awgn(inst, "swamp_sweep"), rng);
    return detail::verdict(s, inst, threshold);
}

/// Swept AMP sweep for any output channel.
inline StepResult gswamp_sweep(SolverState& s, const ProblemInstance& inst, Rng& rng,
                               std::optional<double> threshold = {})
{
    detail::check_dims(s, inst);
    std::visit([&](const auto& ch) { detail::swept_sweep(s, inst, ch, rng); }, inst.channel);
    return detail::verdict(s, inst, threshold);
}

} // namespace swamp
