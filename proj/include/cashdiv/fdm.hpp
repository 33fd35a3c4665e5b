#pragma once

/**
 * @file fdm.hpp
 * @brief TR-BDF2 finite-difference reference for calls and puts under the
 *        piecewise-lognormal model.
 *
 * Solves u_t + r(t) S u_S + sigma(t)^2 S^2 u_SS / 2 = 0 backward on a
 * uniform spot grid for the undiscounted value u, then discounts to the pay
 * date. Ex-dates and curve knots are time-grid points; across an ex-date the
 * solution is re-read at the post-dividend spot with monotone cubic Hermite
 * interpolation.
 */

#include "cashdiv/errors.hpp"
#include "cashdiv/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace cashdiv {

struct FdmSettings {
    std::size_t space_steps = 2000;
    std::size_t time_steps = 500;
    double s_max_multiplier = 5.0;
    DividendPolicy policy = DividendPolicy::none;

    void validate() const {
        if (space_steps < 100) throw ConfigError("FdmSettings: space_steps must be >= 100");
        if (time_steps < 10) throw ConfigError("FdmSettings: time_steps must be >= 10");
        if (!(s_max_multiplier > 0.0)) throw ConfigError("FdmSettings: s_max_multiplier must be > 0");
        if (policy == DividendPolicy::survivor) {
            throw ConfigError("FdmSettings: the survivor policy is only available in Monte Carlo");
        }
    }
};

/// Undiscounted values on the spot grid S_j = j * step at time 0.
struct FdmSolution {
    double step = 0.0;
    std::size_t spot_index = 0;
    std::vector<double> values;
    double discount = 1.0;
    std::size_t time_steps = 0;

    double price() const { return discount * values[spot_index]; }
};

namespace detail {

inline double cell_average_call(double lo, double hi, double K) noexcept {
    if (K >= hi) return 0.0;
    if (K <= lo) return 0.5 * (lo + hi) - K;
    return (hi - K) * (hi - K) / (2.0 * (hi - lo));
}

// Fritsch-Carlson limited slopes for a uniform grid.
inline std::vector<double> monotone_slopes(const std::vector<double>& u, double h) {
    const std::size_t n = u.size();
    std::vector<double> delta(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) delta[k] = (u[k + 1] - u[k]) / h;
    std::vector<double> m(n);
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k) {
        m[k] = (delta[k - 1] * delta[k] <= 0.0) ? 0.0 : 0.5 * (delta[k - 1] + delta[k]);
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (delta[k] == 0.0) {
            m[k] = m[k + 1] = 0.0;
            continue;
        }
        const double a = m[k] / delta[k];
        const double b = m[k + 1] / delta[k];
        const double r2 = a * a + b * b;
        if (r2 > 9.0) {
            const double tau = 3.0 / std::sqrt(r2);
            m[k] = tau * a * delta[k];
            m[k + 1] = tau * b * delta[k];
        }
    }
    return m;
}

inline double hermite(const std::vector<double>& u, const std::vector<double>& m, double h,
                      double x) noexcept {
    const std::size_t last = u.size() - 1;
    std::size_t k = static_cast<std::size_t>(x / h);
    if (k >= last) return u[last];
    const double t = x / h - static_cast<double>(k);
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * u[k] + (t3 - 2 * t2 + t) * h * m[k] +
           (-2 * t3 + 3 * t2) * u[k + 1] + (t3 - t2) * h * m[k + 1];
}

inline void solve_tridiagonal(const std::vector<double>& sub, std::vector<double> diag,
                              const std::vector<double>& sup, std::vector<double>& x) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        x[i] -= w * x[i - 1];
    }
    x[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - sup[i] * x[i + 1]) / diag[i];
}

}  // namespace detail

inline FdmSolution fdm_solve(const MarketData& m, const OptionSpec& o, const FdmSettings& s) {
    m.validate();
    o.validate();
    s.validate();
    const double T = o.expiry;
    const double K = o.strike;
    const bool is_call = o.kind == OptionKind::call;

    const double mean_growth = integrate_rate(m.repo_curve, 0.0, T) + integrate_variance(m.vol_curve, 0.0, T);
    const double s_upper = m.spot * std::exp(std::max(mean_growth, 0.0)) * s.s_max_multiplier;
    const std::size_t N = s.space_steps;
    const std::size_t j0 = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(N) * m.spot / s_upper)));
    if (j0 >= N) throw ConfigError("fdm: upper spot bound does not exceed the spot");
    const double h = m.spot / static_cast<double>(j0);
    const double s_max = h * static_cast<double>(N);
    if (s_max < 1.5 * std::max(m.spot, K)) {
        throw ConfigError("fdm: upper spot bound " + std::to_string(s_max) +
                          " truncates the payoff; increase s_max_multiplier");
    }

    // time grid: ex-dates and curve knots inside (0, T]
    std::vector<double> cuts{0.0, T};
    const std::size_t n_div = m.dividends.count_until(T);
    for (std::size_t i = 0; i < n_div; ++i) cuts.push_back(m.dividends.entries()[i].ex_date);
    for (const Curve* c : {&m.repo_curve, &m.vol_curve}) {
        for (double k : c->knots()) {
            if (k > 0.0 && k < T) cuts.push_back(k);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto dividend_at = [&](double t) -> const Dividend* {
        for (std::size_t i = 0; i < n_div; ++i) {
            if (m.dividends.entries()[i].ex_date == t) return &m.dividends.entries()[i];
        }
        return nullptr;
    };

    std::vector<double> u(N + 1);
    for (std::size_t j = 0; j <= N; ++j) {
        const double lo = std::max(0.0, (static_cast<double>(j) - 0.5) * h);
        const double hi = (static_cast<double>(j) + 0.5) * h;
        const double c = detail::cell_average_call(lo, hi, K);
        u[j] = is_call ? c : c - (0.5 * (lo + hi) - K);
    }

    auto apply_jump = [&](const Dividend& d, double t) {
        const auto slopes = detail::monotone_slopes(u, h);
        std::vector<double> next(N + 1);
        for (std::size_t j = 0; j <= N; ++j) {
            double x = static_cast<double>(j) * h * (1.0 - d.proportional) - d.cash;
            if (x < 0.0 && s.policy == DividendPolicy::liquidator) x = 0.0;
            if (x < 0.0) {
                // a negative spot stays negative: the call expires worthless
                next[j] = is_call ? 0.0 : K - forward_from(m, x, t, T);
            } else {
                next[j] = detail::hermite(u, slopes, h, x);
            }
        }
        u.swap(next);
    };

    auto top_value = [&](double t) {
        return is_call ? forward_from(m, s_max, t, T) - K : 0.0;
    };

    constexpr double gamma = 2.0 - std::numbers::sqrt2;
    const double omega = (1.0 - gamma) / (2.0 - gamma);
    const double c1 = 1.0 / (gamma * (2.0 - gamma));
    const double c2 = (1.0 - gamma) * (1.0 - gamma) / (gamma * (2.0 - gamma));

    std::vector<double> lower(N + 1), centre(N + 1), upper(N + 1);
    std::vector<double> sub(N + 1), diag(N + 1), sup(N + 1), rhs(N + 1), stage(N + 1);
    std::size_t steps_taken = 0;

    for (std::size_t seg = cuts.size() - 1; seg > 0; --seg) {
        const double a = cuts[seg - 1];
        const double b = cuts[seg];
        if (const Dividend* d = dividend_at(b)) apply_jump(*d, b);

        const double mid = 0.5 * (a + b);
        const double r = m.repo_curve.level(mid);
        const double sig = m.vol_curve.level(mid);
        for (std::size_t j = 0; j <= N; ++j) {
            const double jd = static_cast<double>(j);
            const double diff = 0.5 * sig * sig * jd * jd;
            const double conv = 0.5 * r * jd;
            lower[j] = diff - conv;
            centre[j] = -2.0 * diff;
            upper[j] = diff + conv;
        }
        const std::size_t k = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(static_cast<double>(s.time_steps) * (b - a) / T)));
        const double dt = (b - a) / static_cast<double>(k);

        auto build = [&](double theta) {
            sub[0] = 0.0;
            diag[0] = 1.0;
            sup[0] = 0.0;
            for (std::size_t j = 1; j < N; ++j) {
                sub[j] = -theta * lower[j];
                diag[j] = 1.0 - theta * centre[j];
                sup[j] = -theta * upper[j];
            }
            sub[N] = 0.0;
            diag[N] = 1.0;
            sup[N] = 0.0;
        };

        for (std::size_t step = 0; step < k; ++step) {
            const double t_now = b - static_cast<double>(step) * dt;
            const double t_next = (step + 1 == k) ? a : t_now - dt;

            // trapezoidal stage to t_now - gamma dt
            const double th1 = 0.5 * gamma * dt;
            rhs[0] = u[0];
            for (std::size_t j = 1; j < N; ++j) {
                rhs[j] = u[j] + th1 * (lower[j] * u[j - 1] + centre[j] * u[j] + upper[j] * u[j + 1]);
            }
            rhs[N] = top_value(t_now - gamma * dt);
            build(th1);
            detail::solve_tridiagonal(sub, diag, sup, rhs);
            stage.swap(rhs);

            // BDF2 stage to t_next
            for (std::size_t j = 0; j < N; ++j) rhs[j] = c1 * stage[j] - c2 * u[j];
            rhs[N] = top_value(t_next);
            build(omega * dt);
            detail::solve_tridiagonal(sub, diag, sup, rhs);
            u.swap(rhs);
            ++steps_taken;
        }
    }

    FdmSolution out;
    out.step = h;
    out.spot_index = j0;
    out.values = std::move(u);
    out.discount = discount_factor(m, o.payment_time());
    out.time_steps = steps_taken;
    return out;
}

inline double fdm_price(const MarketData& m, const OptionSpec& o, const FdmSettings& s) {
    return fdm_solve(m, o, s).price();
}

}  // namespace cashdiv
