#include <cmath>

#include <gtest/gtest.h>

#include "swamp/solve.hpp"

using namespace swamp;

TEST(Rbp, SingleVariableIsExactPosterior)
{
    const PriorParams prior{0.4, 0.5, 2.0};
    const double f = 1.7, delta = 0.3;
    ProblemInstance inst;
    inst.matrix = MeasurementMatrix::dense(1, 1, {f});
    inst.y = {0.9};
    inst.channel = AwgnChannel{delta};
    inst.prior = prior;

    auto s = rbp_init(inst);
    Rng rng(1);
    for (auto schedule : {Schedule::parallel, Schedule::random_sequential}) {
        rbp_step(s, inst, schedule, rng);
        const auto [a, v] = rbp_marginals(s, prior);
        // One observation y = f x + noise gives the likelihood N(x; y/f, delta/f^2).
        const auto exact = prior_fa_fc(delta / (f * f), inst.y[0] / f, prior);
        EXPECT_NEAR(a[0], exact.mean, 1e-12);
        EXPECT_NEAR(v[0], exact.var, 1e-12);
    }
}

TEST(Rbp, SequentialAgreesWithSwamp)
{
    Rng rng(4);
    const std::size_t n = 50;
    const PriorParams prior{0.2, 0.0, 1.0};
    auto phi = gen_gaussian_iid(25, n, 0.0, rng);
    auto x = gen_signal(n, prior, rng);
    const auto inst = make_instance(std::move(phi), std::move(x), AwgnChannel{1e-8}, prior, 4);

    SolveConfig cfg;
    cfg.algorithm = Algorithm::rbp;
    cfg.schedule = Schedule::random_sequential;
    const auto bp = solve(inst, cfg);
    ASSERT_EQ(bp.status, Status::converged);
    EXPECT_LT(bp.final_mse(), 1e-4);

    cfg.algorithm = Algorithm::swamp;
    const auto sw = solve(inst, cfg);
    ASSERT_EQ(sw.status, Status::converged);
    for (std::size_t i = 0; i < n; ++i)
        EXPECT_NEAR(bp.a[i], sw.a[i], 1e-2);
}

TEST(Rbp, RequiresDenseAwgn)
{
    ProblemInstance inst;
    inst.matrix = MeasurementMatrix::sparse(1, 2, {{0, 0, 1.0}});
    inst.y = {1.0};
    inst.prior = PriorParams{0.5, 0.0, 1.0};
    EXPECT_THROW(rbp_init(inst), std::invalid_argument);
    inst.matrix = MeasurementMatrix::dense(1, 2, {1.0, 1.0});
    inst.channel = SignChannel{};
    EXPECT_THROW(rbp_init(inst), std::invalid_argument);
}
