#pragma once

#include <chrono>

#include "rbp.hpp"
#include "solver.hpp"

namespace swamp {

/// Runs the configured algorithm until mean |a_new - a_old| < epsilon, the
/// state diverges, or t_max steps have been taken. Divergence and the
/// iteration cap are reported through `status`, not thrown.
inline SolveReport solve(const ProblemInstance& inst, const SolveConfig& config)
{
    config.validate();
    inst.validate();
    const double threshold = config.divergence_threshold.value_or(default_divergence_threshold(inst.prior));

    SolveReport report;
    report.seed = config.seed;
    Rng rng(config.seed);
    const auto start = std::chrono::steady_clock::now();

    auto record = [&](const Vector& a_old, const Vector& a_new) {
        TraceRow row;
        row.iter = report.trace.size() + 1;
        row.mean_abs_delta_a = mean_abs_difference(a_old, a_new);
        if (inst.x_true)
            row.mse = mse(a_new, *inst.x_true);
        row.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.trace.push_back(row);
        return row.mean_abs_delta_a;
    };

    report.status = Status::max_iters;
    if (config.algorithm == Algorithm::rbp) {
        auto state = rbp_init(inst);
        auto [a, v] = rbp_marginals(state, inst.prior);
        for (std::size_t t = 0; t < config.t_max; ++t) {
            const auto result = rbp_step(state, inst, config.schedule, rng);
            auto [a_new, v_new] = rbp_marginals(state, inst.prior);
            const double change = record(a, a_new);
            a = std::move(a_new);
            v = std::move(v_new);
            SolverState probe;
            probe.a = a;
            probe.v = v;
            if (result == StepResult::diverged || !state_is_sane(probe, threshold)) {
                report.status = Status::diverged;
                break;
            }
            if (change < config.epsilon) {
                report.status = Status::converged;
                break;
            }
        }
        report.a = std::move(a);
        report.v = std::move(v);
    } else {
        auto state = init_state(inst);
        for (std::size_t t = 0; t < config.t_max; ++t) {
            const Vector a_old = state.a;
            StepResult result = StepResult::ok;
            switch (config.algorithm) {
            case Algorithm::amp: result = amp_step(state, inst, threshold); break;
            case Algorithm::gamp: result = gamp_step(state, inst, threshold); break;
            case Algorithm::swamp: result = swamp_sweep(state, inst, rng, threshold); break;
            case Algorithm::gswamp: result = gswamp_sweep(state, inst, rng, threshold); break;
            case Algorithm::rbp: break;
            }
            const double change = record(a_old, state.a);
            if (result == StepResult::diverged) {
                report.status = Status::diverged;
                break;
            }
            if (change < config.epsilon) {
                report.status = Status::converged;
                break;
            }
        }
        report.a = std::move(state.a);
        report.v = std::move(state.v);
    }
    report.iterations = report.trace.size();
    return report;
}

} // namespace swamp
