#pragma once

#include "cashdiv/errors.hpp"
#include "cashdiv/term_structures.hpp"

#include <cmath>
#include <string>
#include <string_view>

namespace cashdiv {

enum class OptionKind { call, put };

enum class Method { BB, BB_LB, MC, FDM };

/// Floor applied to the spot when a cash dividend detaches.
enum class DividendPolicy {
    none,        ///< S - alpha, possibly negative
    liquidator,  ///< max(0, S - alpha)
    survivor,    ///< dividend skipped when it exceeds the spot
};

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::BB: return "BB";
        case Method::BB_LB: return "BB-LB";
        case Method::MC: return "MC";
        case Method::FDM: return "FDM";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    if (s == "BB") return Method::BB;
    if (s == "BB-LB") return Method::BB_LB;
    if (s == "MC") return Method::MC;
    if (s == "FDM") return Method::FDM;
    throw DomainError("unknown method '" + std::string(s) + "' (expected BB, BB-LB, MC or FDM)");
}

inline std::string_view to_string(DividendPolicy p) {
    switch (p) {
        case DividendPolicy::none: return "none";
        case DividendPolicy::liquidator: return "liquidator";
        case DividendPolicy::survivor: return "survivor";
    }
    return "?";
}

inline DividendPolicy parse_policy(std::string_view s) {
    if (s == "none") return DividendPolicy::none;
    if (s == "liquidator") return DividendPolicy::liquidator;
    if (s == "survivor") return DividendPolicy::survivor;
    throw DomainError("unknown dividend policy '" + std::string(s) + "'");
}

/// Spot after the dividend at one ex-date: proportional part first, then cash.
inline double apply_dividend(double s, const Dividend& d, DividendPolicy policy) noexcept {
    const double after_prop = s * (1.0 - d.proportional);
    switch (policy) {
        case DividendPolicy::none: return after_prop - d.cash;
        case DividendPolicy::liquidator: return std::max(after_prop - d.cash, 0.0);
        case DividendPolicy::survivor: return after_prop > d.cash ? after_prop - d.cash : after_prop;
    }
    return after_prop - d.cash;
}

struct MarketData {
    double spot = 0.0;
    Curve repo_curve = Curve::flat(0.0);
    Curve discount_curve = Curve::flat(0.0);
    Curve vol_curve = Curve::flat_vol(0.0);
    DividendSchedule dividends;

    void validate() const {
        if (!(spot > 0.0) || !std::isfinite(spot)) throw DomainError("MarketData: spot must be > 0");
        if (vol_curve.kind() != CurveKind::volatility) {
            throw DomainError("MarketData: vol_curve must be a volatility curve");
        }
    }

    /// Same rate for repo growth and discounting.
    static MarketData flat(double spot, double rate, double vol, DividendSchedule divs = {}) {
        return MarketData{spot, Curve::flat(rate), Curve::flat(rate), Curve::flat_vol(vol),
                          std::move(divs)};
    }
};

struct OptionSpec {
    double strike = 0.0;
    double expiry = 0.0;
    double pay_date = 0.0;  ///< defaults to expiry when left at 0
    OptionKind kind = OptionKind::call;
    Method method = Method::BB;

    double payment_time() const noexcept { return pay_date > 0.0 ? pay_date : expiry; }

    void validate() const {
        if (!(strike >= 0.0) || !std::isfinite(strike)) throw DomainError("OptionSpec: strike must be >= 0");
        if (!(expiry > 0.0)) throw DomainError("OptionSpec: expiry must be > 0");
        if (!(payment_time() >= expiry)) throw DomainError("OptionSpec: pay_date must be >= expiry");
    }
};

/// B(0, t) from the discount curve.
inline double discount_factor(const MarketData& m, double t) {
    return std::exp(-integrate_rate(m.discount_curve, 0.0, t));
}

/// Forward to T of a position worth `s` at time t, just after any dividend at t,
/// without dividend policy: s C(t,T) - sum_{t < t_i <= T} alpha_i C(t_i,T).
inline double forward_from(const MarketData& m, double s, double t, double T) {
    double f = s * growth_factor(m.repo_curve, m.dividends, t, T);
    for (const auto& d : m.dividends.entries()) {
        if (d.ex_date > t && d.ex_date <= T) {
            f -= d.cash * growth_factor(m.repo_curve, m.dividends, d.ex_date, T);
        }
    }
    return f;
}

}  // namespace cashdiv
