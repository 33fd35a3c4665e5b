#pragma once

/**
 * @file basket.hpp
 * @brief Reduction of a call on a stock with discrete dividends to a
 *        Black-Scholes basket put.
 *
 * Under the measure whose numeraire is the stock without cash dividends, the
 * undiscounted call of strike K reads
 *
 *   C(0,T) * E[ ( S(0) - sum_i alpha_i / C(0,t_i) * e^{X_i - v_i/2}
 *                      - K / C(0,T) * e^{X_T - v_T/2} )^+ ]
 *
 * with X_i = int_0^{t_i} sigma dW and v_i = int_0^{t_i} sigma^2. Each term
 * is a lognormal asset driven by the same Brownian path, which makes the
 * expectation a basket put of strike S(0).
 */

#include "cashdiv/errors.hpp"
#include "cashdiv/term_structures.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace cashdiv {

/// Lognormal basket put: payoff (strike - sum_i S_i(T))^+ with
/// S_i(T) = spot_i * exp(drift_i T - vol_i^2 T / 2 + vol_i W_i(T)).
struct BasketPutSpec {
    std::vector<double> spots;
    std::vector<double> drifts;
    std::vector<double> vols;
    std::vector<double> correlation;  ///< row-major n x n
    double maturity = 0.0;
    double strike = 0.0;
    double numeraire_growth = 1.0;  ///< C(0,T); multiplies the put into the undiscounted call
    /// Set when all assets load on one Brownian path, so the correlation is
    /// PSD by construction and the Cholesky check can be skipped.
    bool single_factor = false;

    std::size_t size() const noexcept { return spots.size(); }

    double rho(std::size_t i, std::size_t j) const { return correlation[i * size() + j]; }

    double asset_forward(std::size_t i) const { return spots[i] * std::exp(drifts[i] * maturity); }

    /// Covariance of the log-drivers over [0, T].
    double covariance(std::size_t i, std::size_t j) const {
        return rho(i, j) * vols[i] * vols[j] * maturity;
    }

    void validate() const {
        const std::size_t n = size();
        if (n == 0) throw DomainError("BasketPutSpec: empty basket");
        if (drifts.size() != n || vols.size() != n || correlation.size() != n * n) {
            throw DomainError("BasketPutSpec: inconsistent dimensions");
        }
        if (!(maturity > 0.0)) throw DomainError("BasketPutSpec: maturity must be > 0");
        if (!(strike >= 0.0)) throw DomainError("BasketPutSpec: strike must be >= 0");
        for (std::size_t i = 0; i < n; ++i) {
            if (!(spots[i] > 0.0)) throw DomainError("BasketPutSpec: spots must be > 0");
            if (!(vols[i] >= 0.0)) throw DomainError("BasketPutSpec: vols must be >= 0");
            if (rho(i, i) != 1.0) throw DomainError("BasketPutSpec: correlation diagonal must be 1");
            for (std::size_t j = 0; j < i; ++j) {
                if (rho(i, j) != rho(j, i) || std::abs(rho(i, j)) > 1.0) {
                    throw DomainError("BasketPutSpec: correlation must be symmetric in [-1, 1]");
                }
            }
        }
    }
};

/// Builds the basket put equivalent to a call of strike K and expiry T.
///
/// One asset per dividend with ex-date in (0, T], in ex-date order, plus a
/// strike asset when the last ex-date is before T. When the last ex-date
/// equals T the strike is folded into that dividend's asset.
inline BasketPutSpec build_basket(double spot, const Curve& rate, const Curve& vol,
                                  const DividendSchedule& divs, double K, double T) {
    if (!(spot > 0.0)) throw DomainError("build_basket: spot must be > 0");
    if (!(K >= 0.0)) throw DomainError("build_basket: strike must be >= 0");
    if (!(T > 0.0)) throw DomainError("build_basket: maturity must be > 0");

    struct Term {
        double time;
        double spot;
    };
    std::vector<Term> terms;
    const std::size_t n = divs.count_until(T);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& d = divs.entries()[i];
        // zero cash amounts add nothing to the basket
        if (d.cash > 0.0) terms.push_back({d.ex_date, d.cash});
    }
    if (K > 0.0) {
        if (!terms.empty() && terms.back().time == T) {
            terms.back().spot += K;
        } else {
            terms.push_back({T, K});
        }
    }
    if (terms.empty()) {
        throw DomainError("build_basket: empty basket (no cash dividend before expiry and K = 0)");
    }

    BasketPutSpec b;
    const std::size_t m = terms.size();
    b.maturity = T;
    b.strike = spot;
    b.numeraire_growth = growth_factor(rate, divs, T);
    b.single_factor = true;
    b.spots.reserve(m);
    b.drifts.reserve(m);
    b.vols.reserve(m);
    std::vector<double> variance(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double growth = growth_factor(rate, divs, terms[i].time);
        b.spots.push_back(terms[i].spot);
        b.drifts.push_back(-std::log(growth) / T);
        variance[i] = integrate_variance(vol, 0.0, terms[i].time);
        b.vols.push_back(std::sqrt(variance[i] / T));
    }
    b.correlation.assign(m * m, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) continue;
            const double lo = std::min(variance[i], variance[j]);
            const double hi = std::max(variance[i], variance[j]);
            b.correlation[i * m + j] = (hi > 0.0) ? std::sqrt(lo / hi) : 1.0;
        }
    }
    return b;
}

/// C(0,T) times the basket put value.
inline double undiscounted_call_from_basket(double bs_put_price, double growth) {
    if (!(bs_put_price >= 0.0) || !(growth >= 0.0)) {
        throw DomainError("undiscounted_call_from_basket: inputs must be >= 0");
    }
    return growth * bs_put_price;
}

}  // namespace cashdiv
