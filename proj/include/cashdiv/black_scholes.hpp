#pragma once

/**
 * @file black_scholes.hpp
 * @brief Black-Scholes forward pricing and implied volatility inversion.
 */

#include "cashdiv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace cashdiv {

inline double cdf_normal(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double pdf_normal(double x) noexcept {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Undiscounted-forward description of a European vanilla.
struct VanillaQuote {
    double forward = 0.0;
    double strike = 0.0;
    double sqrt_total_variance = 0.0;  ///< sigma * sqrt(T)
    double discount = 1.0;
    bool is_call = true;

    void validate() const {
        if (!(forward > 0.0) || !std::isfinite(forward)) {
            throw DomainError("VanillaQuote: forward must be > 0");
        }
        if (!(strike >= 0.0) || !std::isfinite(strike)) {
            throw DomainError("VanillaQuote: strike must be >= 0");
        }
        if (!(sqrt_total_variance >= 0.0)) {
            throw DomainError("VanillaQuote: sqrt_total_variance must be >= 0");
        }
        if (!(discount > 0.0 && discount <= 1.0)) {
            throw DomainError("VanillaQuote: discount must lie in (0, 1]");
        }
    }
};

namespace detail {

// Undiscounted price without validation.
inline double black_undiscounted(double forward, double strike, double s, bool is_call) noexcept {
    if (strike == 0.0) return is_call ? forward : 0.0;
    if (s == 0.0) return std::max(is_call ? forward - strike : strike - forward, 0.0);
    const double d1 = std::log(forward / strike) / s + 0.5 * s;
    const double d2 = d1 - s;
    if (is_call) return forward * cdf_normal(d1) - strike * cdf_normal(d2);
    return strike * cdf_normal(-d2) - forward * cdf_normal(-d1);
}

inline double black_vega_undiscounted(double forward, double strike, double s) noexcept {
    if (strike == 0.0 || s == 0.0) return 0.0;
    const double d1 = std::log(forward / strike) / s + 0.5 * s;
    return forward * pdf_normal(d1);
}

}  // namespace detail

inline double bs_price(const VanillaQuote& q) {
    q.validate();
    return q.discount * detail::black_undiscounted(q.forward, q.strike, q.sqrt_total_variance,
                                                   q.is_call);
}

/// Black-Scholes volatility reproducing `price` for expiry T.
///
/// Solves on the out-of-the-money side (parity-converted) with a safeguarded
/// Newton iteration inside a bisection bracket; at most 100 iterations.
inline double implied_vol(double price, double forward, double strike, double T, double discount,
                          bool is_call) {
    VanillaQuote{forward, strike, 0.0, discount, is_call}.validate();
    if (!(T > 0.0)) throw DomainError("implied_vol: requires T > 0");
    if (!std::isfinite(price)) throw DomainError("implied_vol: price is not finite");

    const double target = price / discount;
    const double intrinsic = std::max(is_call ? forward - strike : strike - forward, 0.0);
    const double upper = is_call ? forward : strike;
    const double slack = 1e-14 * forward;
    if (target < intrinsic - slack) {
        throw DomainError("implied_vol: price " + std::to_string(price) +
                          " is below the intrinsic lower bound " +
                          std::to_string(discount * intrinsic));
    }
    if (target >= upper) {
        throw DomainError("implied_vol: price " + std::to_string(price) +
                          " is at or above the upper bound " + std::to_string(discount * upper));
    }
    // time value of the out-of-the-money equivalent
    const bool otm_is_call = strike >= forward;
    const double otm_target = target - intrinsic;
    if (otm_target <= 0.0 || strike == 0.0) return 0.0;

    auto f = [&](double s) {
        return detail::black_undiscounted(forward, strike, s, otm_is_call) - otm_target;
    };

    double lo = 0.0;
    double hi = 1.0;
    while (f(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e3) break;
    }
    // initial guess from the at-the-money approximation, kept inside the bracket
    double s = std::sqrt(2.0 * std::numbers::pi) * otm_target / forward;
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);

    for (int iter = 0; iter < 100; ++iter) {
        const double fs = f(s);
        if (fs == 0.0) break;
        if (fs < 0.0) lo = s; else hi = s;
        const double vega = detail::black_vega_undiscounted(forward, strike, s);
        double next = (vega > 0.0) ? s - fs / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - s);
        s = next;
        if (step <= 1e-15 * s || hi - lo <= 1e-16 * hi) break;
    }
    return s / std::sqrt(T);
}

}  // namespace cashdiv
