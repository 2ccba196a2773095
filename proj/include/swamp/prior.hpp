#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swamp {

/// Bernoulli-Gaussian (spike and slab) prior:
///   P0(x) = rho * N(x; mean, var) + (1 - rho) * delta(x).
struct PriorParams {
    double rho = 1.0;
    double mean = 0.0;
    double var = 1.0;

    void validate() const
    {
        if (!std::isfinite(rho) || !std::isfinite(mean) || !std::isfinite(var))
            throw std::invalid_argument("prior parameters must be finite");
        if (rho < 0.0 || rho > 1.0)
            throw std::invalid_argument("prior rho must lie in [0, 1]");
        if (var <= 0.0)
            throw std::invalid_argument("prior variance must be positive");
    }

    /// E[x^2] under the prior.
    double second_moment() const { return rho * (var + mean * mean); }
};

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

/// Mean and variance of the prior itself.
inline Moments prior_mean_variance(const PriorParams& p)
{
    const double m = p.rho * p.mean;
    return {m, p.rho * (p.var + p.mean * p.mean) - m * m};
}

namespace detail {

inline double log_normal_pdf(double x, double mean, double var)
{
    const double d = x - mean;
    return -0.5 * (d * d / var + std::log(2.0 * std::numbers::pi * var));
}

inline double logistic(double t)
{
    if (t >= 0.0)
        return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

/// Posterior moments for a pseudo-observation R ~ N(x, sigma2). No argument
/// checks; sigma2 may be +inf (no information), which returns the prior.
inline Moments posterior_moments(double sigma2, double r, const PriorParams& p)
{
    if (p.rho <= 0.0)
        return {0.0, 0.0};
    if (!std::isfinite(sigma2))
        return prior_mean_variance(p);

    const double total = p.var + sigma2;
    const double slab_mean = (p.mean * sigma2 + r * p.var) / total;
    const double slab_var = p.var * sigma2 / total;
    if (p.rho >= 1.0)
        return {slab_mean, slab_var};

    // Weight of the slab component, as a logistic of its log-odds.
    const double log_odds = std::log(p.rho) - std::log1p(-p.rho)
        + log_normal_pdf(r, p.mean, total) - log_normal_pdf(r, 0.0, sigma2);
    const double w = logistic(log_odds);
    const double fa = w * slab_mean;
    double fc = w * slab_var + w * (1.0 - w) * slab_mean * slab_mean;
    if (fc < 0.0)
        fc = 0.0;
    return {fa, fc};
}

} // namespace detail

/// Thresholding functions (f_a, f_c): posterior mean and variance of a scalar
/// with prior `p`, observed through a Gaussian with mean `r` and variance
/// `sigma2`.
inline Moments prior_fa_fc(double sigma2, double r, const PriorParams& p)
{
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2) || !std::isfinite(r))
        throw std::invalid_argument("prior_fa_fc: need finite sigma2 > 0 and finite r");
    p.validate();
    return detail::posterior_moments(sigma2, r, p);
}

} // namespace swamp
