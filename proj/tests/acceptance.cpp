// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Pass criterion ids (A1 ... A11) as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "swamp/swamp.hpp"

using namespace swamp;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string id;
    std::string title;
    double budget_seconds;
    std::function<Verdict()> run;
};

std::string fmt(double v, int digits = 3)
{
    std::ostringstream o;
    o << std::setprecision(digits) << v;
    return o.str();
}

double median(std::vector<double> xs)
{
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

ProblemInstance gaussian_instance(std::size_t n, double alpha, double gamma, double rho, double delta,
                                  std::uint64_t seed)
{
    Rng rng(seed);
    const auto rows = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n)));
    auto phi = gen_gaussian_iid(rows, n, gamma, rng);
    const PriorParams prior{rho, 0.0, 1.0};
    auto x = gen_signal(n, prior, rng);
    return make_instance(std::move(phi), std::move(x), AwgnChannel{delta}, prior, seed);
}

template <class Step>
void iterate_to_fixed_point(SolverState& s, double tol, std::size_t t_max, Step step)
{
    for (std::size_t t = 0; t < t_max; ++t) {
        const auto a_old = s.a;
        step(s);
        if (mean_abs_difference(a_old, s.a) < tol)
            return;
    }
}

std::size_t count_outcomes(const std::vector<TrialResult>& results, std::size_t cell, std::size_t algorithm,
                           const std::function<bool(const AlgorithmOutcome&)>& pred)
{
    std::size_t n = 0;
    for (const auto& r : results)
        if (r.cell.index == cell && pred(r.outcomes[algorithm]))
            ++n;
    return n;
}

// ---------------------------------------------------------------------------

Verdict fixed_point_coincidence()
{
    const auto inst = gaussian_instance(1000, 0.5, 0.0, 0.2, 1e-8, 101);
    Rng rng(1);

    auto s = init_state(inst);
    iterate_to_fixed_point(s, 1e-13, 2000, [&](SolverState& st) { swamp_sweep(st, inst, rng); });
    auto probe = s;
    amp_step(probe, inst);
    const double amp_move = mean_abs_difference(s.a, probe.a);

    auto p = init_state(inst);
    iterate_to_fixed_point(p, 1e-13, 2000, [&](SolverState& st) { amp_step(st, inst); });
    auto probe2 = p;
    swamp_sweep(probe2, inst, rng);
    const double swamp_move = mean_abs_difference(p.a, probe2.a);

    return {amp_move < 1e-9 && swamp_move < 1e-9,
            "AMP step from SwAMP fixed point moves " + fmt(amp_move) + "; SwAMP sweep from AMP fixed point moves " +
                fmt(swamp_move)};
}

Verdict nonzero_mean_robustness()
{
    auto spec = default_spec(Family::gamma_sweep);
    spec.gammas = {0.0, 5.0, 20.0, 50.0};
    spec.trials = 5;
    spec.algorithms = {Algorithm::amp, Algorithm::swamp};
    const auto results = run_experiment(spec);
    bool pass = true;
    std::string detail;
    for (std::size_t c = 0; c < spec.gammas.size(); ++c) {
        const auto ok = count_outcomes(results, c, 1, [](const auto& o) { return o.success; });
        const auto amp_div =
            count_outcomes(results, c, 0, [](const auto& o) { return o.status == Status::diverged; });
        pass = pass && ok >= 4;
        if (spec.gammas[c] >= 5.0)
            pass = pass && amp_div >= 4;
        detail += "gamma=" + fmt(spec.gammas[c]) + ": swamp " + std::to_string(ok) + "/5, amp diverged " +
                  std::to_string(amp_div) + "/5; ";
    }
    return {pass, detail};
}

Verdict low_rank_robustness()
{
    auto spec = default_spec(Family::eta_sweep);
    spec.etas = {0.55, 0.5};
    spec.trials = 5;
    spec.algorithms = {Algorithm::amp, Algorithm::swamp};
    const auto results = run_experiment(spec);
    bool pass = true;
    std::string detail;
    for (std::size_t c = 0; c < spec.etas.size(); ++c) {
        const auto ok = count_outcomes(results, c, 1, [](const auto& o) { return o.success; });
        const auto amp_div =
            count_outcomes(results, c, 0, [](const auto& o) { return o.status == Status::diverged; });
        std::vector<double> mses;
        for (const auto& r : results)
            if (r.cell.index == c)
                mses.push_back(r.outcomes[1].mse);
        pass = pass && ok >= 4 && amp_div >= 4;
        detail += "eta=" + fmt(spec.etas[c]) + ": swamp " + std::to_string(ok) + "/5 (median mse " +
                  fmt(median(mses)) + "), amp diverged " + std::to_string(amp_div) + "/5; ";
    }
    return {pass, detail};
}

Verdict prior_derivative_identity()
{
    double worst_fd = 0.0, worst_quad = 0.0;
    for (double rho : {0.05, 0.2, 0.7}) {
        const PriorParams p{rho, 0.0, 1.0};
        for (int a = 0; a < 10; ++a) {
            const double sigma2 = std::pow(10.0, -3.0 + 4.0 * a / 9.0);
            for (int b = 0; b < 10; ++b) {
                const double r = -3.0 + 6.0 * b / 9.0;
                const auto m = prior_fa_fc(sigma2, r, p);
                const double slope = oracle::derivative(
                    [&](double x) { return prior_fa_fc(sigma2, x, p).mean; }, r, 1e-3 * std::sqrt(sigma2));
                worst_fd = std::max(worst_fd, std::abs(sigma2 * slope - m.var) / std::max(m.var, 1e-12));
                const auto q = oracle::spike_slab_posterior(sigma2, r, rho, 0.0, 1.0);
                worst_quad = std::max({worst_quad, std::abs(q.mean - m.mean), std::abs(q.var - m.var)});
            }
        }
    }
    return {worst_fd < 1e-5 && worst_quad < 1e-8,
            "max relative derivative error " + fmt(worst_fd) + ", max quadrature error " + fmt(worst_quad)};
}

Verdict channel_oracle()
{
    const OutputChannel ch = SignChannel{};
    double worst_g = 0.0, worst_dg = 0.0;
    bool finite = true;
    for (double V : {0.01, 1.0, 7.0})
        for (double y : {-1.0, 1.0}) {
            for (int k = 0; k <= 80; ++k) {
                const double w = (-10.0 + 0.25 * k) * std::sqrt(V);
                const double ref = oracle::sign_g(y, w, V);
                const double g = gout(ch, y, w, V);
                worst_g = std::max(worst_g, std::abs(g - ref) / std::max(1.0, std::abs(ref)));
                const double fd = -oracle::derivative([&](double x) { return gout(ch, y, x, V); }, w,
                                                      1e-3 * std::sqrt(V));
                const double dg = dgout(ch, y, w, V);
                worst_dg = std::max(worst_dg, std::abs(fd - dg) / std::max(1.0 / V, std::abs(dg)));
            }
            for (int k = 0; k <= 320; ++k) {
                const double w = (-40.0 + 0.25 * k) * std::sqrt(V);
                finite = finite && std::isfinite(gout(ch, y, w, V)) && std::isfinite(dgout(ch, y, w, V));
            }
        }
    return {worst_g < 1e-8 && worst_dg < 1e-5 && finite,
            "gout error " + fmt(worst_g) + ", dgout error " + fmt(worst_dg) +
                (finite ? ", finite to |t|=40" : ", NON-FINITE value")};
}

Verdict awgn_reduction()
{
    const auto inst = gaussian_instance(600, 0.5, 10.0, 0.2, 1e-8, 606);
    auto s1 = init_state(inst), s2 = init_state(inst);
    Rng r1(6), r2(6);
    double worst = 0.0;
    auto diff = [](const Vector& a, const Vector& b) {
        double m = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k)
            m = std::max(m, std::abs(a[k] - b[k]));
        return m;
    };
    for (int t = 0; t < 30; ++t) {
        swamp_sweep(s1, inst, r1);
        gswamp_sweep(s2, inst, r2);
        worst = std::max({worst, diff(s1.a, s2.a), diff(s1.v, s2.v), diff(s1.omega, s2.omega), diff(s1.V, s2.V)});
    }
    SolveConfig cfg;
    cfg.seed = 9;
    const auto a = solve(inst, cfg);
    cfg.algorithm = Algorithm::gswamp;
    const auto b = solve(inst, cfg);
    const bool same_run = a.iterations == b.iterations && a.status == b.status && diff(a.a, b.a) <= 1e-15;
    return {worst <= 1e-15 && same_run, "max state difference over 30 sweeps " + fmt(worst) +
                                            (same_run ? ", solve() runs identical" : ", solve() runs differ")};
}

Verdict bookkeeping()
{
    const auto inst = gaussian_instance(800, 0.5, 20.0, 0.2, 1e-8, 707);
    auto s = init_state(inst);
    Rng rng(7);
    double worst = 0.0;
    const auto& phi = inst.matrix;
    for (int sweep = 0; sweep < 10; ++sweep) {
        swamp_sweep(s, inst, rng);
        for (std::size_t mu = 0; mu < phi.rows(); ++mu) {
            double w = 0.0, var = 0.0;
            for (std::size_t i = 0; i < phi.cols(); ++i) {
                const double f = phi(mu, i);
                w += f * s.a[i];
                var += f * f * s.v[i];
            }
            const double omega = w - var * s.g[mu];
            worst = std::max({worst, std::abs(s.V[mu] - var) / std::max(1.0, std::abs(var)),
                              std::abs(s.omega[mu] - omega) / std::max(1.0, std::abs(omega))});
        }
    }
    return {worst <= 1e-9, "max relative drift " + fmt(worst)};
}

Verdict group_testing()
{
    auto spec = default_spec(Family::pooling_phase);
    spec.pool_rows = {50, 75, 100, 125, 150};
    spec.pool_positives = {5, 10, 15, 20};
    spec.trials = 20;
    spec.algorithms = {Algorithm::amp, Algorithm::swamp};
    const auto d = phase_diagram(spec);
    const std::size_t k10 = 1;
    bool found = false;
    std::string detail = "K=10 success swamp/amp by M:";
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
        const double sw = d.fraction[1][i][k10], amp = d.fraction[0][i][k10];
        detail += " " + std::to_string(d.rows[i]) + ":" + fmt(sw, 2) + "/" + fmt(amp, 2);
        if (d.rows[i] <= 150 && sw >= 0.9 && amp < 0.5)
            found = true;
    }
    std::size_t worst_inversions = 0;
    for (std::size_t a = 0; a < d.fraction.size(); ++a)
        for (std::size_t i = 0; i < d.rows.size(); ++i) {
            std::size_t inv = 0;
            for (std::size_t j = 0; j + 1 < d.positives.size(); ++j)
                inv += d.fraction[a][i][j + 1] > d.fraction[a][i][j] ? 1 : 0;
            worst_inversions = std::max(worst_inversions, inv);
        }
    detail += "; max K-inversions per row " + std::to_string(worst_inversions);
    return {found && worst_inversions <= 1, detail};
}

Verdict one_bit()
{
    auto spec = default_spec(Family::onebit_alpha_sweep);
    spec.alphas = {1.0, 2.0, 3.0};
    spec.trials = 20;
    spec.algorithms = {Algorithm::gamp, Algorithm::gswamp};
    const auto results = run_experiment(spec);
    std::vector<double> med_gs, med_gamp;
    std::size_t converged_at_3 = 0, gamp_div_at_3 = 0;
    for (std::size_t c = 0; c < spec.alphas.size(); ++c) {
        std::vector<double> gs, gp;
        for (const auto& r : results)
            if (r.cell.index == c) {
                gp.push_back(r.outcomes[0].status == Status::diverged ? INFINITY : r.outcomes[0].nmse);
                gs.push_back(r.outcomes[1].nmse);
                if (c == 2) {
                    converged_at_3 += r.outcomes[1].status == Status::converged ? 1 : 0;
                    gamp_div_at_3 += r.outcomes[0].status == Status::diverged ? 1 : 0;
                }
            }
        med_gs.push_back(median(gs));
        med_gamp.push_back(median(gp));
    }
    const bool decreasing = med_gs[0] > med_gs[1] && med_gs[1] > med_gs[2];
    const bool gamp_fails = gamp_div_at_3 * 2 > spec.trials || med_gamp[2] > 10.0 * med_gs[2];
    const bool converges = converged_at_3 == spec.trials;
    return {decreasing && gamp_fails && converges,
            "G-SwAMP median nmse " + fmt(med_gs[0]) + " / " + fmt(med_gs[1]) + " / " + fmt(med_gs[2]) +
                "; converged at alpha=3: " + std::to_string(converged_at_3) + "/20; GAMP at alpha=3 diverged " +
                std::to_string(gamp_div_at_3) + "/20, median nmse " + fmt(med_gamp[2])};
}

Verdict timing()
{
    auto spec = default_spec(Family::timing);
    spec.algorithms = {Algorithm::amp, Algorithm::swamp};
    const auto table = timing_benchmark(spec);
    std::map<Algorithm, double> slope(table.slopes.begin(), table.slopes.end());
    double worst_ratio = 0.0;
    for (const auto& r : table.rows)
        if (r.algorithm == Algorithm::swamp)
            for (const auto& q : table.rows)
                if (q.algorithm == Algorithm::amp && q.n == r.n)
                    worst_ratio = std::max(worst_ratio, r.seconds / q.seconds);
    const auto in_band = [](double s) { return s >= 1.7 && s <= 2.3; };
    std::string detail = "slope amp " + fmt(slope[Algorithm::amp]) + ", swamp " + fmt(slope[Algorithm::swamp]) +
                         "; max swamp/amp time ratio " + fmt(worst_ratio) + "; s/500 at N=2000:";
    for (const auto& r : table.rows)
        if (r.n == spec.sizes.back())
            detail += " " + std::string(to_string(r.algorithm)) + " " + fmt(r.seconds_per_500);
    return {in_band(slope[Algorithm::amp]) && in_band(slope[Algorithm::swamp]) && worst_ratio < 5.0, detail};
}

Verdict rbp_oracle()
{
    const auto inst = gaussian_instance(50, 0.5, 0.0, 0.2, 1e-8, 1111);
    SolveConfig cfg;
    cfg.algorithm = Algorithm::rbp;
    cfg.schedule = Schedule::random_sequential;
    cfg.seed = 3;
    const auto bp = solve(inst, cfg);
    cfg.algorithm = Algorithm::swamp;
    const auto sw = solve(inst, cfg);
    double diff = 0.0;
    for (std::size_t i = 0; i < bp.a.size(); ++i)
        diff = std::max(diff, std::abs(bp.a[i] - sw.a[i]));
    const bool ok = bp.status == Status::converged && bp.final_mse() < 1e-4 && sw.status == Status::converged &&
                    diff < 1e-2;
    return {ok, "r-BP " + std::string(to_string(bp.status)) + " in " + std::to_string(bp.iterations) +
                    " steps, mse " + fmt(bp.final_mse()) + "; max |a_rbp - a_swamp| " + fmt(diff)};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria{
        {"A1", "fixed-point coincidence", 30, fixed_point_coincidence},
        {"A2", "nonzero-mean robustness", 300, nonzero_mean_robustness},
        {"A3", "low-rank robustness", 300, low_rank_robustness},
        {"A4", "prior derivative identity", 10, prior_derivative_identity},
        {"A5", "sign channel oracle", 10, channel_oracle},
        {"A6", "AWGN reduction", 30, awgn_reduction},
        {"A7", "incremental bookkeeping", 30, bookkeeping},
        {"A8", "group testing", 600, group_testing},
        {"A9", "1-bit recovery", 600, one_bit},
        {"A10", "timing scaling", 600, timing},
        {"A11", "r-BP oracle", 30, rbp_oracle},
    };
    const std::set<std::string> wanted(argv + 1, argv + argc);

    int failures = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() && !wanted.count(c.id))
            continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool on_time = secs < c.budget_seconds;
        const bool pass = v.pass && on_time;
        failures += pass ? 0 : 1;
        std::cout << c.id << ' ' << (pass ? "PASS" : "FAIL") << " [" << c.title << "] " << v.detail << " ("
                  << fmt(secs) << " s" << (on_time ? "" : ", over budget of " + fmt(c.budget_seconds) + " s")
                  << ")" << std::endl;
    }
    return failures ? 1 : 0;
}
