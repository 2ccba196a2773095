#pragma once

// Independent reference computations used by the unit tests and the
// acceptance binary. None of these call into the library's closed forms.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

inline double integrate(const std::function<double(double)>& f, double lo, double hi)
{
    using boost::math::quadrature::gauss_kronrod;
    return gauss_kronrod<double, 61>::integrate(f, lo, hi, 8, 1e-14);
}

inline double log_gauss(double x, double mean, double var)
{
    const double d = x - mean;
    return -0.5 * d * d / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
}

struct PosteriorMoments {
    double mean;
    double var;
};

/// Posterior mean and variance of x under
///   rho N(x; mean, var) + (1 - rho) delta(x)
/// times the likelihood N(x; r, sigma2). The slab integrals are done by
/// adaptive quadrature over a window around the slab posterior; the spike
/// contributes its point mass at zero.
inline PosteriorMoments spike_slab_posterior(double sigma2, double r, double rho, double mean, double var)
{
    const double post_var = var * sigma2 / (var + sigma2);
    const double post_mean = (mean * sigma2 + r * var) / (var + sigma2);
    const double half = 14.0 * std::sqrt(post_var);
    const double lo = post_mean - half, hi = post_mean + half;

    auto log_slab = [&](double x) { return log_gauss(x, mean, var) + log_gauss(x, r, sigma2); };
    const double log_spike = rho < 1.0 ? std::log1p(-rho) + log_gauss(0.0, r, sigma2) : -INFINITY;
    const double log_rho = rho > 0.0 ? std::log(rho) : -INFINITY;
    const double shift = std::max(log_spike, log_rho + log_slab(post_mean));

    auto w = [&](double x) { return std::exp(log_rho + log_slab(x) - shift); };
    const double z_slab = rho > 0.0 ? integrate(w, lo, hi) : 0.0;
    const double m1 = rho > 0.0 ? integrate([&](double x) { return x * w(x); }, lo, hi) : 0.0;
    const double m2 = rho > 0.0 ? integrate([&](double x) { return x * x * w(x); }, lo, hi) : 0.0;
    const double z = z_slab + std::exp(log_spike - shift);
    const double m = m1 / z;
    return {m, m2 / z - m * m};
}

/// Sign channel terms by quadrature. With s = (z - omega)/sqrt(V) and
/// c = -y omega / sqrt(V), the observation keeps s > c (y = +1) or the
/// mirror image. Shifting s = c + u and dividing by phi(c) keeps the
/// integrand O(1) even deep in the tails:
///   g  = y / sqrt(V) * int_0^inf (c + u) e^{-cu - u^2/2} du / int_0^inf e^{-cu - u^2/2} du
/// dg is returned by central differences of g in omega.
inline double sign_g(double y, double omega, double V)
{
    const double c = -y * omega / std::sqrt(V);
    const double top = std::max(0.0, -c) + 40.0;
    auto kernel = [c](double u) { return std::exp(-c * u - 0.5 * u * u); };
    const double z = integrate(kernel, 0.0, top);
    const double m = integrate([&](double u) { return (c + u) * kernel(u); }, 0.0, top);
    return y / std::sqrt(V) * (m / z);
}

/// Five-point central difference of f at x with step h.
inline double derivative(const std::function<double(double)>& f, double x, double h)
{
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

} // namespace oracle
