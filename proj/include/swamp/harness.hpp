#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "model.hpp"
#include "solve.hpp"

namespace swamp {

enum class Family { gamma_sweep, eta_sweep, pooling_phase, onebit_alpha_sweep, timing };

inline std::string_view to_string(Family f)
{
    switch (f) {
    case Family::gamma_sweep: return "gamma_sweep";
    case Family::eta_sweep: return "eta_sweep";
    case Family::pooling_phase: return "pooling_phase";
    case Family::onebit_alpha_sweep: return "onebit_alpha_sweep";
    case Family::timing: return "timing";
    }
    return "?";
}

inline Family parse_family(std::string_view s)
{
    for (auto f : {Family::gamma_sweep, Family::eta_sweep, Family::pooling_phase, Family::onebit_alpha_sweep,
                   Family::timing})
        if (s == to_string(f))
            return f;
    throw std::invalid_argument("unknown experiment family '" + std::string(s) + "'");
}

/// Grid and solver parameters for one experiment family. Only the grid that
/// belongs to `family` is read; the other lists are ignored.
struct ExperimentSpec {
    Family family = Family::gamma_sweep;
    std::vector<Algorithm> algorithms{Algorithm::amp, Algorithm::swamp};
    std::size_t trials = 5;
    std::uint64_t base_seed = 1;
    std::size_t t_max = 1000;
    double epsilon = 1e-8;

    std::size_t n = 2000;   ///< signal dimension (non-timing families)
    double alpha = 0.5;     ///< M / N where M is not on the grid
    double rho = 0.2;
    double prior_mean = 0.0;
    double prior_var = 1.0;
    double delta = 1e-8;
    double gamma = 0.0;     ///< projector mean for families without a gamma grid
    double success_mse = 1e-6;

    std::vector<double> gammas{0.0, 5.0, 20.0, 50.0};
    std::vector<double> etas{1.0, 0.8, 0.65, 0.55, 0.5};
    std::vector<std::size_t> pool_rows{50, 100, 150, 200, 300, 400, 500};
    std::vector<std::size_t> pool_positives{5, 10, 20, 30};
    std::size_t row_weight = 7;
    bool balanced_columns = false;
    std::vector<double> alphas{1.0, 2.0, 3.0};
    std::vector<std::size_t> sizes{250, 500, 1000, 2000};
    double density = 0.25;
    std::size_t iterations = 500;

    std::size_t workers = 1;

    void validate() const
    {
        if (algorithms.empty())
            throw std::invalid_argument("experiment: no algorithms configured");
        if (trials < 1)
            throw std::invalid_argument("experiment: trials must be >= 1");
        if (t_max < 1 || !(epsilon > 0.0))
            throw std::invalid_argument("experiment: need t_max >= 1 and epsilon > 0");
        auto nonempty = [](bool empty, const char* what) {
            if (empty)
                throw std::invalid_argument(std::string("experiment: empty grid ") + what);
        };
        switch (family) {
        case Family::gamma_sweep: nonempty(gammas.empty(), "gammas"); break;
        case Family::eta_sweep: nonempty(etas.empty(), "etas"); break;
        case Family::pooling_phase:
            nonempty(pool_rows.empty(), "M");
            nonempty(pool_positives.empty(), "K");
            for (auto k : pool_positives)
                if (k > n)
                    throw std::invalid_argument("experiment: K exceeds N");
            break;
        case Family::onebit_alpha_sweep: nonempty(alphas.empty(), "alphas"); break;
        case Family::timing:
            nonempty(sizes.empty(), "N");
            if (iterations < 1)
                throw std::invalid_argument("experiment: iterations must be >= 1");
            break;
        }
        PriorParams{rho, prior_mean, prior_var}.validate();
    }
};

/// Desk-scale defaults for each family.
inline ExperimentSpec default_spec(Family family)
{
    ExperimentSpec s;
    s.family = family;
    switch (family) {
    case Family::gamma_sweep: break;
    case Family::eta_sweep:
        s.alpha = 0.6;
        break;
    case Family::pooling_phase:
        s.n = 500;
        s.trials = 20;
        s.prior_mean = 1.0;
        s.prior_var = 1.0;
        s.t_max = 300;
        break;
    case Family::onebit_alpha_sweep:
        s.algorithms = {Algorithm::gamp, Algorithm::gswamp};
        s.n = 512;
        s.rho = 1.0 / 8.0;
        s.gamma = 20.0;
        s.trials = 20;
        s.epsilon = 1e-5;
        break;
    case Family::timing:
        s.alpha = 0.75;
        s.rho = 0.25;
        s.trials = 1;
        break;
    }
    return s;
}

/// Reads an experiment spec from a key-value config; unknown keys are rejected.
inline ExperimentSpec spec_from_config(const KeyValueConfig& cfg)
{
    static const std::set<std::string> known{
        "family", "algorithms", "trials", "seed", "t_max", "epsilon", "N", "alpha", "rho", "prior_mean",
        "prior_var", "delta", "gamma", "success_mse", "gammas", "etas", "M", "K", "row_weight",
        "balanced_columns", "alphas", "sizes", "density", "iterations", "workers"};
    cfg.require_known(known);
    ExperimentSpec s = default_spec(parse_family(cfg.get_string("family", "gamma_sweep")));
    if (cfg.has("algorithms")) {
        s.algorithms.clear();
        for (const auto& name : cfg.get_strings("algorithms", {}))
            s.algorithms.push_back(parse_algorithm(name));
    }
    s.trials = cfg.get_size("trials", s.trials);
    s.base_seed = cfg.get_u64("seed", s.base_seed);
    s.t_max = cfg.get_size("t_max", s.t_max);
    s.epsilon = cfg.get_double("epsilon", s.epsilon);
    s.n = cfg.get_size("N", s.n);
    s.alpha = cfg.get_double("alpha", s.alpha);
    s.rho = cfg.get_double("rho", s.rho);
    s.prior_mean = cfg.get_double("prior_mean", s.prior_mean);
    s.prior_var = cfg.get_double("prior_var", s.prior_var);
    s.delta = cfg.get_double("delta", s.delta);
    s.gamma = cfg.get_double("gamma", s.gamma);
    s.success_mse = cfg.get_double("success_mse", s.success_mse);
    s.gammas = cfg.get_doubles("gammas", s.gammas);
    s.etas = cfg.get_doubles("etas", s.etas);
    s.pool_rows = cfg.get_sizes("M", s.pool_rows);
    s.pool_positives = cfg.get_sizes("K", s.pool_positives);
    s.row_weight = cfg.get_size("row_weight", s.row_weight);
    s.balanced_columns = cfg.get_bool("balanced_columns", s.balanced_columns);
    s.alphas = cfg.get_doubles("alphas", s.alphas);
    s.sizes = cfg.get_sizes("sizes", s.sizes);
    s.density = cfg.get_double("density", s.density);
    s.iterations = cfg.get_size("iterations", s.iterations);
    s.workers = cfg.get_size("workers", s.workers);
    s.validate();
    return s;
}

/// Resolved spec as ordered key/value pairs, in config syntax.
inline std::vector<std::pair<std::string, std::string>> describe(const ExperimentSpec& s)
{
    auto num = [](double v) {
        std::ostringstream o;
        o << std::setprecision(17) << v;
        return o.str();
    };
    auto list = [&](const auto& xs) {
        std::string out;
        for (const auto& x : xs) {
            if (!out.empty())
                out += ',';
            out += num(static_cast<double>(x));
        }
        return out;
    };
    std::string algos;
    for (auto a : s.algorithms)
        algos += (algos.empty() ? "" : ",") + std::string(to_string(a));
    return {
        {"family", std::string(to_string(s.family))},
        {"algorithms", algos},
        {"trials", std::to_string(s.trials)},
        {"seed", std::to_string(s.base_seed)},
        {"t_max", std::to_string(s.t_max)},
        {"epsilon", num(s.epsilon)},
        {"N", std::to_string(s.n)},
        {"alpha", num(s.alpha)},
        {"rho", num(s.rho)},
        {"prior_mean", num(s.prior_mean)},
        {"prior_var", num(s.prior_var)},
        {"delta", num(s.delta)},
        {"gamma", num(s.gamma)},
        {"success_mse", num(s.success_mse)},
        {"gammas", list(s.gammas)},
        {"etas", list(s.etas)},
        {"M", list(s.pool_rows)},
        {"K", list(s.pool_positives)},
        {"row_weight", std::to_string(s.row_weight)},
        {"balanced_columns", s.balanced_columns ? "true" : "false"},
        {"alphas", list(s.alphas)},
        {"sizes", list(s.sizes)},
        {"density", num(s.density)},
        {"iterations", std::to_string(s.iterations)},
        {"workers", std::to_string(s.workers)},
    };
}

// ---------------------------------------------------------------------------

/// One grid point. `x` is the swept parameter (gamma, eta, alpha, or M for
/// pooling); `y` is K for pooling and unused otherwise.
struct Cell {
    std::size_t index = 0;
    double x = 0.0;
    double y = 0.0;
};

struct AlgorithmOutcome {
    Algorithm algorithm = Algorithm::swamp;
    Status status = Status::max_iters;
    std::size_t iterations = 0;
    double mse = 0.0;
    double nmse = 0.0; ///< || a/|a| - x/|x| ||^2
    double seconds = 0.0;
    bool success = false;
};

struct TrialResult {
    Cell cell;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::vector<AlgorithmOutcome> outcomes; ///< one per configured algorithm, in spec order
};

/// Squared distance between the unit-normalized estimate and signal; a zero
/// vector normalizes to zero.
inline double normalized_mse(std::span<const double> a, std::span<const double> x)
{
    if (a.size() != x.size())
        throw std::invalid_argument("normalized_mse: length mismatch");
    double na = 0.0, nx = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a[i] * a[i];
        nx += x[i] * x[i];
    }
    na = std::sqrt(na);
    nx = std::sqrt(nx);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = (na > 0.0 ? a[i] / na : 0.0) - (nx > 0.0 ? x[i] / nx : 0.0);
        acc += d * d;
    }
    return acc;
}

/// Exact support recovery after thresholding the estimate at 1/2.
inline bool support_recovered(std::span<const double> a, std::span<const double> x)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] > 0.5) != !(x[i] > 0.5))
            return false;
    return true;
}

inline std::vector<Cell> cells_of(const ExperimentSpec& s)
{
    std::vector<Cell> cells;
    auto add = [&](double x, double y) { cells.push_back({cells.size(), x, y}); };
    switch (s.family) {
    case Family::gamma_sweep:
        for (double g : s.gammas)
            add(g, 0.0);
        break;
    case Family::eta_sweep:
        for (double e : s.etas)
            add(e, 0.0);
        break;
    case Family::pooling_phase:
        for (auto m : s.pool_rows)
            for (auto k : s.pool_positives)
                add(static_cast<double>(m), static_cast<double>(k));
        break;
    case Family::onebit_alpha_sweep:
        for (double a : s.alphas)
            add(a, 0.0);
        break;
    case Family::timing:
        for (auto n : s.sizes)
            add(static_cast<double>(n), 0.0);
        break;
    }
    return cells;
}

/// Seed of trial k in a cell; depends on the cell coordinates, not on its
/// position in the grid, so a cell re-run on its own reproduces its rows.
inline std::uint64_t trial_seed(const ExperimentSpec& s, const Cell& cell, std::size_t trial)
{
    return derive_seed(s.base_seed, {static_cast<std::uint64_t>(s.family), std::bit_cast<std::uint64_t>(cell.x),
                                     std::bit_cast<std::uint64_t>(cell.y), trial});
}

inline std::size_t rows_for(std::size_t n, double alpha)
{
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n))));
}

/// Builds the problem instance for one trial of one cell.
inline ProblemInstance make_trial_instance(const ExperimentSpec& s, const Cell& cell, std::uint64_t seed)
{
    Rng matrix_rng(derive_seed(seed, {1}));
    Rng signal_rng(derive_seed(seed, {2}));
    const PriorParams prior{s.rho, s.prior_mean, s.prior_var};
    switch (s.family) {
    case Family::gamma_sweep: {
        auto phi = gen_gaussian_iid(rows_for(s.n, s.alpha), s.n, cell.x, matrix_rng);
        return make_instance(std::move(phi), gen_signal(s.n, prior, signal_rng), AwgnChannel{s.delta}, prior, seed);
    }
    case Family::eta_sweep: {
        auto phi = gen_lowrank(rows_for(s.n, s.alpha), s.n, cell.x, matrix_rng);
        return make_instance(std::move(phi), gen_signal(s.n, prior, signal_rng), AwgnChannel{s.delta}, prior, seed);
    }
    case Family::pooling_phase: {
        const auto rows = static_cast<std::size_t>(cell.x);
        const auto k = static_cast<std::size_t>(cell.y);
        auto phi = gen_pooling(rows, s.n, s.row_weight, matrix_rng, s.balanced_columns);
        const PriorParams pool_prior{static_cast<double>(k) / static_cast<double>(s.n), s.prior_mean, s.prior_var};
        return make_instance(std::move(phi), gen_binary_signal(s.n, k, signal_rng), AwgnChannel{s.delta}, pool_prior,
                             seed);
    }
    case Family::onebit_alpha_sweep: {
        auto phi = gen_gaussian_iid(rows_for(s.n, cell.x), s.n, s.gamma, matrix_rng);
        return make_instance(std::move(phi), gen_signal(s.n, prior, signal_rng), SignChannel{}, prior, seed);
    }
    case Family::timing: {
        const auto n = static_cast<std::size_t>(cell.x);
        auto phi = gen_sparse_gaussian(rows_for(n, s.alpha), n, s.density, matrix_rng);
        return make_instance(std::move(phi), gen_signal(n, prior, signal_rng), AwgnChannel{s.delta}, prior, seed);
    }
    }
    throw std::logic_error("unreachable");
}

inline bool trial_success(const ExperimentSpec& s, const SolveReport& r, std::span<const double> x)
{
    switch (s.family) {
    case Family::pooling_phase: return support_recovered(r.a, x);
    case Family::onebit_alpha_sweep: return r.status == Status::converged;
    default: return r.status == Status::converged && r.final_mse() < s.success_mse;
    }
}

inline TrialResult run_trial(const ExperimentSpec& s, const Cell& cell, std::size_t trial)
{
    TrialResult result;
    result.cell = cell;
    result.trial = trial;
    result.seed = trial_seed(s, cell, trial);
    const auto inst = make_trial_instance(s, cell, result.seed);
    for (auto algorithm : s.algorithms) {
        SolveConfig cfg;
        cfg.algorithm = algorithm;
        cfg.t_max = s.t_max;
        cfg.epsilon = s.epsilon;
        cfg.seed = derive_seed(result.seed, {3});
        const auto report = solve(inst, cfg);
        AlgorithmOutcome out;
        out.algorithm = algorithm;
        out.status = report.status;
        out.iterations = report.iterations;
        out.mse = report.final_mse();
        out.nmse = normalized_mse(report.a, *inst.x_true);
        out.seconds = report.trace.empty() ? 0.0 : report.trace.back().elapsed_seconds;
        out.success = trial_success(s, report, *inst.x_true);
        result.outcomes.push_back(out);
    }
    return result;
}

/// All trials of one cell, in trial order.
inline std::vector<TrialResult> run_cell(const ExperimentSpec& s, const Cell& cell)
{
    std::vector<TrialResult> out;
    for (std::size_t k = 0; k < s.trials; ++k)
        out.push_back(run_trial(s, cell, k));
    return out;
}

/// Runs every (cell, trial) work item, optionally on `spec.workers` threads.
/// Results are ordered by (cell, trial) regardless of execution order.
/// `progress` (if set) is called after each finished item from the worker
/// that ran it, serialized by a mutex.
inline std::vector<TrialResult> run_experiment(const ExperimentSpec& s,
                                               const std::function<void(const TrialResult&)>& progress = {})
{
    s.validate();
    const auto cells = cells_of(s);
    const std::size_t total = cells.size() * s.trials;
    std::vector<TrialResult> results(total);
    std::atomic<std::size_t> next{0};
    std::mutex report_mutex;
    std::exception_ptr failure;

    auto work = [&] {
        for (std::size_t item = next++; item < total; item = next++) {
            try {
                results[item] = run_trial(s, cells[item / s.trials], item % s.trials);
                if (progress) {
                    std::lock_guard lock(report_mutex);
                    progress(results[item]);
                }
            } catch (...) {
                std::lock_guard lock(report_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = total;
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min(s.workers, total));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return results;
}

// ---------------------------------------------------------------------------
// Phase diagram

struct ContourPoint {
    double k = 0.0;
    double m = std::numeric_limits<double>::quiet_NaN(); ///< NaN where the column never crosses 1/2
};

struct PhaseDiagram {
    std::vector<std::size_t> rows;      ///< M grid
    std::vector<std::size_t> positives; ///< K grid
    /// fraction[a][i][j]: success rate of algorithm a at M = rows[i], K = positives[j]
    std::vector<std::vector<std::vector<double>>> fraction;
    std::vector<std::vector<ContourPoint>> contour; ///< per algorithm, one point per K
};

/// 50% crossing along each K column, linear in M between adjacent grid rows.
/// Rows are visited in increasing M; the first crossing from below is used.
/// A column that succeeds at every M gets the smallest M.
inline std::vector<ContourPoint> half_contour(const std::vector<std::size_t>& rows,
                                              const std::vector<std::size_t>& positives,
                                              const std::vector<std::vector<double>>& fraction)
{
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return rows[a] < rows[b]; });

    std::vector<ContourPoint> out;
    for (std::size_t j = 0; j < positives.size(); ++j) {
        ContourPoint p;
        p.k = static_cast<double>(positives[j]);
        if (!order.empty() && fraction[order[0]][j] >= 0.5) {
            p.m = static_cast<double>(rows[order[0]]);
        } else {
            for (std::size_t q = 0; q + 1 < order.size(); ++q) {
                const double f0 = fraction[order[q]][j], f1 = fraction[order[q + 1]][j];
                if (f0 < 0.5 && f1 >= 0.5) {
                    const double m0 = static_cast<double>(rows[order[q]]);
                    const double m1 = static_cast<double>(rows[order[q + 1]]);
                    p.m = m0 + (0.5 - f0) * (m1 - m0) / (f1 - f0);
                    break;
                }
            }
        }
        out.push_back(p);
    }
    return out;
}

inline PhaseDiagram phase_diagram(const ExperimentSpec& s, const std::vector<TrialResult>& results)
{
    if (s.family != Family::pooling_phase)
        throw std::invalid_argument("phase_diagram needs a pooling_phase experiment");
    PhaseDiagram d;
    d.rows = s.pool_rows;
    d.positives = s.pool_positives;
    const std::size_t na = s.algorithms.size();
    std::vector<std::vector<std::vector<std::size_t>>> hits(
        na, std::vector<std::vector<std::size_t>>(d.rows.size(), std::vector<std::size_t>(d.positives.size(), 0)));
    std::vector<std::vector<std::size_t>> counts(d.rows.size(), std::vector<std::size_t>(d.positives.size(), 0));
    for (const auto& r : results) {
        const std::size_t i = r.cell.index / d.positives.size();
        const std::size_t j = r.cell.index % d.positives.size();
        ++counts[i][j];
        for (std::size_t a = 0; a < na; ++a)
            hits[a][i][j] += r.outcomes[a].success ? 1 : 0;
    }
    d.fraction.assign(na, std::vector<std::vector<double>>(d.rows.size(), std::vector<double>(d.positives.size(), 0.0)));
    for (std::size_t a = 0; a < na; ++a) {
        for (std::size_t i = 0; i < d.rows.size(); ++i)
            for (std::size_t j = 0; j < d.positives.size(); ++j)
                d.fraction[a][i][j] =
                    counts[i][j] ? static_cast<double>(hits[a][i][j]) / static_cast<double>(counts[i][j]) : 0.0;
        d.contour.push_back(half_contour(d.rows, d.positives, d.fraction[a]));
    }
    return d;
}

inline PhaseDiagram phase_diagram(const ExperimentSpec& s)
{
    return phase_diagram(s, run_experiment(s));
}

// ---------------------------------------------------------------------------
// Timing

struct TimingRow {
    std::size_t n = 0;
    Algorithm algorithm = Algorithm::swamp;
    std::size_t iterations = 0;
    double seconds = 0.0;          ///< wall time of the measured iterations
    double seconds_per_500 = 0.0;  ///< scaled to 500 iterations
    std::uint64_t element_visits = 0;
};

struct TimingTable {
    std::vector<TimingRow> rows;
    std::vector<std::pair<Algorithm, double>> slopes; ///< least-squares slope of log time vs log N
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n)
        return std::numeric_limits<double>::quiet_NaN();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

/// Fixed-count iterations of each configured algorithm on sparse instances.
/// Iterations are not stopped on convergence or divergence.
inline TimingTable timing_benchmark(const ExperimentSpec& s)
{
    if (s.family != Family::timing)
        throw std::invalid_argument("timing_benchmark needs a timing experiment");
    s.validate();
    TimingTable table;
    for (const auto& cell : cells_of(s)) {
        const auto seed = trial_seed(s, cell, 0);
        const auto inst = make_trial_instance(s, cell, seed);
        for (auto algorithm : s.algorithms) {
            if (algorithm == Algorithm::rbp)
                throw std::invalid_argument("timing_benchmark does not support r-BP");
            auto state = init_state(inst);
            Rng rng(derive_seed(seed, {3}));
            const double no_bail = std::numeric_limits<double>::infinity();
            const auto start = std::chrono::steady_clock::now();
            for (std::size_t t = 0; t < s.iterations; ++t) {
                switch (algorithm) {
                case Algorithm::amp: amp_step(state, inst, no_bail); break;
                case Algorithm::gamp: gamp_step(state, inst, no_bail); break;
                case Algorithm::swamp: swamp_sweep(state, inst, rng, no_bail); break;
                case Algorithm::gswamp: gswamp_sweep(state, inst, rng, no_bail); break;
                case Algorithm::rbp: break;
                }
            }
            TimingRow row;
            row.n = inst.cols();
            row.algorithm = algorithm;
            row.iterations = s.iterations;
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            row.seconds_per_500 = row.seconds * 500.0 / static_cast<double>(s.iterations);
            row.element_visits = state.element_visits;
            table.rows.push_back(row);
        }
    }
    for (auto algorithm : s.algorithms) {
        std::vector<double> ns, ts;
        for (const auto& r : table.rows)
            if (r.algorithm == algorithm) {
                ns.push_back(static_cast<double>(r.n));
                ts.push_back(r.seconds_per_500);
            }
        table.slopes.emplace_back(algorithm, loglog_slope(ns, ts));
    }
    return table;
}

// ---------------------------------------------------------------------------
// CSV output

namespace detail {

inline std::string csv_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    std::ostringstream o;
    o << std::setprecision(17) << v;
    return o.str();
}

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    out.flush();
    if (!out)
        throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace detail

/// Name of the swept coordinates for a family: (x, y).
inline std::pair<std::string, std::string> cell_columns(Family f)
{
    switch (f) {
    case Family::gamma_sweep: return {"gamma", ""};
    case Family::eta_sweep: return {"eta", ""};
    case Family::pooling_phase: return {"M", "K"};
    case Family::onebit_alpha_sweep: return {"alpha", ""};
    case Family::timing: return {"N", ""};
    }
    return {"x", ""};
}

/// One row per trial with per-algorithm column groups in spec order. The
/// `seconds` columns are wall-clock and therefore excluded when
/// `include_timing` is false, which makes the output reproducible byte for byte.
inline std::string results_csv(const ExperimentSpec& s, const std::vector<TrialResult>& results,
                               bool include_timing = true)
{
    const auto [xname, yname] = cell_columns(s.family);
    std::ostringstream out;
    out << "cell," << xname;
    if (!yname.empty())
        out << ',' << yname;
    out << ",trial,seed";
    for (auto a : s.algorithms) {
        const std::string p(to_string(a));
        out << ',' << p << "_status," << p << "_iterations," << p << "_mse," << p << "_nmse";
        if (include_timing)
            out << ',' << p << "_seconds";
        out << ',' << p << "_success";
    }
    out << '\n';
    for (const auto& r : results) {
        out << r.cell.index << ',' << detail::csv_number(r.cell.x);
        if (!yname.empty())
            out << ',' << detail::csv_number(r.cell.y);
        out << ',' << r.trial << ',' << r.seed;
        for (const auto& o : r.outcomes) {
            out << ',' << to_string(o.status) << ',' << o.iterations << ',' << detail::csv_number(o.mse) << ','
                << detail::csv_number(o.nmse);
            if (include_timing)
                out << ',' << detail::csv_number(o.seconds);
            out << ',' << (o.success ? 1 : 0);
        }
        out << '\n';
    }
    return out.str();
}

inline void emit_csv(const ExperimentSpec& s, const std::vector<TrialResult>& results, const std::string& path,
                     bool include_timing = true)
{
    detail::write_file(path, results_csv(s, results, include_timing));
}

inline std::string trace_csv(const SolveReport& r)
{
    std::ostringstream out;
    out << "iter,mean_abs_delta_a,mse,elapsed_seconds\n";
    for (const auto& row : r.trace)
        out << row.iter << ',' << detail::csv_number(row.mean_abs_delta_a) << ',' << detail::csv_number(row.mse)
            << ',' << detail::csv_number(row.elapsed_seconds) << '\n';
    return out.str();
}

inline std::string phase_csv(const PhaseDiagram& d, const std::vector<Algorithm>& algorithms)
{
    std::ostringstream out;
    out << "algorithm,M,K,success_fraction\n";
    for (std::size_t a = 0; a < d.fraction.size(); ++a)
        for (std::size_t i = 0; i < d.rows.size(); ++i)
            for (std::size_t j = 0; j < d.positives.size(); ++j)
                out << to_string(algorithms[a]) << ',' << d.rows[i] << ',' << d.positives[j] << ','
                    << detail::csv_number(d.fraction[a][i][j]) << '\n';
    return out.str();
}

inline std::string contour_csv(const PhaseDiagram& d, const std::vector<Algorithm>& algorithms)
{
    std::ostringstream out;
    out << "algorithm,K,M_half\n";
    for (std::size_t a = 0; a < d.contour.size(); ++a)
        for (const auto& p : d.contour[a])
            out << to_string(algorithms[a]) << ',' << detail::csv_number(p.k) << ',' << detail::csv_number(p.m)
                << '\n';
    return out.str();
}

inline std::string timing_csv(const TimingTable& t)
{
    std::ostringstream out;
    out << "N,algorithm,iterations,seconds,seconds_per_500,element_visits\n";
    for (const auto& r : t.rows)
        out << r.n << ',' << to_string(r.algorithm) << ',' << r.iterations << ',' << detail::csv_number(r.seconds)
            << ',' << detail::csv_number(r.seconds_per_500) << ',' << r.element_visits << '\n';
    return out.str();
}

} // namespace swamp
