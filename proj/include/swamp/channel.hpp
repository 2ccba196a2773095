#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <variant>

namespace swamp {

/// Lower bound applied to the noise variance and to V inside denominators.
inline constexpr double kVarianceFloor = 1e-12;

namespace detail {

/// Scaled complementary error function exp(u^2) * erfc(u).
inline double erfcx(double u)
{
    if (u < 4.0)
        return std::exp(u * u) * std::erfc(u);
    // Laplace continued fraction, evaluated bottom-up; converges fast for u >= 4.
    double tail = 0.0;
    for (int k = 60; k >= 1; --k)
        tail = (0.5 * k) / (u + tail);
    return std::numbers::inv_sqrtpi / (u + tail);
}

/// Gaussian hazard ratio phi(t) / Phi(t).
inline double gaussian_hazard(double t)
{
    constexpr double inv_sqrt_2pi = 0.5 * std::numbers::sqrt2 * std::numbers::inv_sqrtpi;
    if (t > -5.0) {
        const double pdf = inv_sqrt_2pi * std::exp(-0.5 * t * t);
        const double cdf = 0.5 * std::erfc(-t / std::numbers::sqrt2);
        return pdf / cdf;
    }
    // phi(t)/Phi(t) = sqrt(2/pi) / erfcx(-t/sqrt2)
    return std::numbers::sqrt2 * std::numbers::inv_sqrtpi / erfcx(-t / std::numbers::sqrt2);
}

} // namespace detail

/// g_out and -dg_out/domega evaluated together.
struct ChannelTerms {
    double g = 0.0;
    double dg = 0.0;
};

/// Additive white Gaussian noise, y = z + N(0, delta).
struct AwgnChannel {
    double delta = 0.0;

    ChannelTerms eval(double y, double w, double v) const
    {
        const double inv = 1.0 / (std::max(delta, kVarianceFloor) + v);
        return {(y - w) * inv, inv};
    }
};

/// Noiseless 1-bit channel, y = sign(z) with y in {-1, +1}.
struct SignChannel {
    ChannelTerms eval(double y, double w, double v) const
    {
        const double sd = std::sqrt(v);
        const double t = y * w / sd;
        const double lambda = detail::gaussian_hazard(t);
        // E[z | sign(z) = y] = w + y * sd * lambda
        return {y * lambda / sd, lambda * (t + lambda) / v};
    }
};

using OutputChannel = std::variant<AwgnChannel, SignChannel>;

inline bool is_sign(const OutputChannel& ch) { return std::holds_alternative<SignChannel>(ch); }

namespace detail {

inline void check_channel_args(double y, double w, double v)
{
    if (!std::isfinite(y) || !std::isfinite(w) || !std::isfinite(v))
        throw std::invalid_argument("channel: non-finite input");
    if (!(v > 0.0))
        throw std::invalid_argument("channel: V must be positive");
}

} // namespace detail

/// Channel score (E[z | y] - w) / V for z ~ N(w, V).
inline double gout(const OutputChannel& ch, double y, double w, double v)
{
    detail::check_channel_args(y, w, v);
    return std::visit([&](const auto& c) { return c.eval(y, w, v).g; }, ch);
}

/// -d gout / d w; nonnegative for both channels.
inline double dgout(const OutputChannel& ch, double y, double w, double v)
{
    detail::check_channel_args(y, w, v);
    return std::visit([&](const auto& c) { return c.eval(y, w, v).dg; }, ch);
}

} // namespace swamp
