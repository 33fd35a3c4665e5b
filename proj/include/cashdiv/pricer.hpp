#pragma once

/**
 * @file pricer.hpp
 * @brief European options and forwards on stocks paying discrete dividends.
 *
 * Calls are priced as C(0,T) times a basket put of strike S(0) (see
 * basket.hpp). Flooring the spot at zero when a dividend exceeds it does not
 * change any call, but it does change puts; puts are therefore priced by
 * parity against the strike-zero call, which makes them liquidator-policy
 * puts. Implied volatilities are quoted against the plain forward.
 */

#include "cashdiv/basket.hpp"
#include "cashdiv/basket_approx.hpp"
#include "cashdiv/black_scholes.hpp"
#include "cashdiv/errors.hpp"
#include "cashdiv/fdm.hpp"
#include "cashdiv/market.hpp"
#include "cashdiv/monte_carlo.hpp"

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

namespace cashdiv {

struct PricingConfig {
    QuadratureSettings quadrature;
    McSettings mc;
    FdmSettings fdm;
};

struct PriceDiagnostics {
    std::size_t quadrature_evaluations = 0;
    double quadrature_error = 0.0;
    double lower_bound = 0.0;  ///< BB only: the closed-form lower bound, as an option price
    double std_error = 0.0;    ///< MC only
    std::size_t space_steps = 0;
    std::size_t time_steps = 0;
    std::size_t basket_size = 0;
    double seconds = 0.0;
};

struct PriceReport {
    double price = 0.0;
    double implied_vol = std::numeric_limits<double>::quiet_NaN();  ///< NaN outside the arbitrage band
    Method method = Method::BB;
    PriceDiagnostics diagnostics;
};

/// F(0,T) without dividend policy: S(0) C(0,T) - sum_{t_i <= T} alpha_i C(t_i,T).
inline double forward(const MarketData& m, double T) {
    m.validate();
    if (!(T > 0.0)) throw DomainError("forward: requires T > 0");
    return forward_from(m, m.spot, 0.0, T);
}

namespace detail {

inline double report_implied_vol(const MarketData& m, const OptionSpec& o, double price) {
    const double fwd = forward(m, o.expiry);
    if (!(fwd > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    try {
        return implied_vol(price, fwd, o.strike, o.expiry, discount_factor(m, o.payment_time()),
                           o.kind == OptionKind::call);
    } catch (const DomainError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

// Undiscounted call via the basket put.
inline double basket_call(const MarketData& m, double K, double T, Method method,
                          const QuadratureSettings& quad, PriceDiagnostics& diag) {
    bool has_cash = false;
    for (std::size_t i = 0; i < m.dividends.count_until(T); ++i) {
        has_cash = has_cash || m.dividends.entries()[i].cash > 0.0;
    }
    if (K == 0.0 && !has_cash) return m.spot * growth_factor(m.repo_curve, m.dividends, T);

    const auto basket = build_basket(m.spot, m.repo_curve, m.vol_curve, m.dividends, K, T);
    const auto plan = make_conditioning_plan(basket);
    diag.basket_size = basket.size();
    double put = 0.0;
    if (method == Method::BB_LB) {
        put = lower_bound_put(basket, plan);
    } else {
        const auto res = conditioned_put_detailed(basket, plan, quad);
        put = res.price;
        diag.quadrature_evaluations = res.evaluations;
        diag.quadrature_error = res.error_estimate;
        diag.lower_bound = res.lower_bound;
    }
    return undiscounted_call_from_basket(put, basket.numeraire_growth);
}

}  // namespace detail

inline PriceReport price_call(const MarketData& m, const OptionSpec& o, const PricingConfig& cfg = {}) {
    m.validate();
    o.validate();
    if (o.kind != OptionKind::call) throw DomainError("price_call: option kind must be call");
    const auto start = std::chrono::steady_clock::now();
    PriceReport rep;
    rep.method = o.method;
    const double discount = discount_factor(m, o.payment_time());
    switch (o.method) {
        case Method::BB:
        case Method::BB_LB: {
            const double undiscounted =
                detail::basket_call(m, o.strike, o.expiry, o.method, cfg.quadrature, rep.diagnostics);
            rep.price = discount * undiscounted;
            rep.diagnostics.lower_bound *= discount * growth_factor(m.repo_curve, m.dividends, o.expiry);
            break;
        }
        case Method::MC: {
            const auto res = mc_price(m, o, cfg.mc);
            rep.price = res.price;
            rep.diagnostics.std_error = res.std_error;
            break;
        }
        case Method::FDM: {
            const auto sol = fdm_solve(m, o, cfg.fdm);
            rep.price = sol.price();
            rep.diagnostics.space_steps = sol.values.size() - 1;
            rep.diagnostics.time_steps = sol.time_steps;
            break;
        }
    }
    rep.implied_vol = detail::report_implied_vol(m, o, rep.price);
    rep.diagnostics.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

/// Undiscounted call of strike zero, i.e. the forward of the stock floored at
/// zero. Equals forward() unless cash dividends can exceed the spot.
inline double strike_zero_forward(const MarketData& m, double T, Method method,
                                  const PricingConfig& cfg = {}) {
    m.validate();
    if (!(T > 0.0)) throw DomainError("strike_zero_forward: requires T > 0");
    const OptionSpec zero{0.0, T, T, OptionKind::call, method};
    switch (method) {
        case Method::BB:
        case Method::BB_LB: {
            PriceDiagnostics unused;
            return detail::basket_call(m, 0.0, T, method, cfg.quadrature, unused);
        }
        case Method::MC: return mc_price(m, zero, cfg.mc).price / discount_factor(m, T);
        case Method::FDM: return fdm_price(m, zero, cfg.fdm) / discount_factor(m, T);
    }
    return forward(m, T);
}

/// Put by parity: V_C - B(0,T_p) (F(0,T) - K) with F the strike-zero call
/// from the same method (same seed for MC, so the parity holds pathwise).
inline PriceReport price_put(const MarketData& m, const OptionSpec& o, const PricingConfig& cfg = {}) {
    o.validate();
    if (o.kind != OptionKind::put) throw DomainError("price_put: option kind must be put");
    const auto start = std::chrono::steady_clock::now();
    auto call_spec = o;
    call_spec.kind = OptionKind::call;
    auto rep = price_call(m, call_spec, cfg);
    const double fwd = strike_zero_forward(m, o.expiry, o.method, cfg);
    rep.price -= discount_factor(m, o.payment_time()) * (fwd - o.strike);
    rep.implied_vol = detail::report_implied_vol(m, o, rep.price);
    rep.diagnostics.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

inline PriceReport price(const MarketData& m, const OptionSpec& o, const PricingConfig& cfg = {}) {
    return o.kind == OptionKind::call ? price_call(m, o, cfg) : price_put(m, o, cfg);
}

/// implied_vol(price) - implied_vol(reference) at the no-policy forward.
inline double implied_vol_difference(const MarketData& m, const OptionSpec& o, double price,
                                     double reference_price) {
    const double fwd = forward(m, o.expiry);
    if (!(fwd > 0.0)) throw DomainError("implied_vol_error: the forward is not positive");
    const double discount = discount_factor(m, o.payment_time());
    const bool is_call = o.kind == OptionKind::call;
    return implied_vol(price, fwd, o.strike, o.expiry, discount, is_call) -
           implied_vol(reference_price, fwd, o.strike, o.expiry, discount, is_call);
}

/// Prices with `o.method` and compares against `reference_price`.
inline double implied_vol_error(const MarketData& m, const OptionSpec& o, double reference_price,
                                const PricingConfig& cfg = {}) {
    return implied_vol_difference(m, o, price(m, o, cfg).price, reference_price);
}

}  // namespace cashdiv
