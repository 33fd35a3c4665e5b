#pragma once

/**
 * @file term_structures.hpp
 * @brief Piecewise-constant rate/volatility curves and discrete dividend schedules.
 *
 * Times are year fractions measured from the valuation date.
 */

#include "cashdiv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cashdiv {

enum class CurveKind { rate, volatility };

/// Piecewise-constant term structure.
///
/// `values[k]` applies on `[knots[k], knots[k+1])`; the first level is used
/// before `knots[0]` and the last level beyond `knots.back()`.
class Curve {
public:
    Curve(std::vector<double> knots, std::vector<double> values, CurveKind kind = CurveKind::rate)
        : knots_(std::move(knots)), values_(std::move(values)), kind_(kind) {
        if (knots_.empty() || knots_.size() != values_.size()) {
            throw DomainError("Curve: knots and values must be nonempty and of equal length");
        }
        for (std::size_t k = 0; k < knots_.size(); ++k) {
            if (!std::isfinite(knots_[k]) || knots_[k] < 0.0) {
                throw DomainError("Curve: knots must be finite and >= 0");
            }
            if (k > 0 && !(knots_[k] > knots_[k - 1])) {
                throw DomainError("Curve: knots must be strictly ascending");
            }
            if (!std::isfinite(values_[k])) {
                throw DomainError("Curve: values must be finite");
            }
            if (kind_ == CurveKind::volatility && values_[k] < 0.0) {
                throw DomainError("Curve: volatility levels must be >= 0");
            }
        }
    }

    static Curve flat(double level, CurveKind kind = CurveKind::rate) {
        return Curve({0.0}, {level}, kind);
    }
    static Curve flat_vol(double level) { return flat(level, CurveKind::volatility); }

    CurveKind kind() const noexcept { return kind_; }
    std::span<const double> knots() const noexcept { return knots_; }
    std::span<const double> values() const noexcept { return values_; }

    double level(double t) const noexcept {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
        if (it == knots_.begin()) return values_.front();
        return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
    }

    /// Exact integral of level(s)^power over [t0, t1] for power 1 or 2.
    double integrate(double t0, double t1, int power) const {
        if (!(t0 <= t1)) throw DomainError("Curve::integrate: requires t0 <= t1");
        if (t0 < 0.0) throw DomainError("Curve::integrate: requires t0 >= 0");
        double sum = 0.0;
        // interval k is [start_k, end_k) with start_0 = -inf and end_last = +inf
        for (std::size_t k = 0; k < values_.size(); ++k) {
            const double lo = (k == 0) ? t0 : std::max(t0, knots_[k]);
            const double hi = (k + 1 < knots_.size()) ? std::min(t1, knots_[k + 1]) : t1;
            if (hi > lo) {
                const double v = (power == 1) ? values_[k] : values_[k] * values_[k];
                sum += v * (hi - lo);
            }
        }
        return sum;
    }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
    CurveKind kind_;
};

/// Integral of the rate over [t0, t1].
inline double integrate_rate(const Curve& curve, double t0, double t1) {
    return curve.integrate(t0, t1, 1);
}

/// Integral of the squared level over [t0, t1].
inline double integrate_variance(const Curve& curve, double t0, double t1) {
    return curve.integrate(t0, t1, 2);
}

struct Dividend {
    double ex_date = 0.0;
    double cash = 0.0;          ///< amount subtracted from the spot
    double proportional = 0.0;  ///< fraction of the spot removed, applied before the cash amount
};

/// Dividends ordered by strictly ascending ex-date, all strictly after valuation.
class DividendSchedule {
public:
    DividendSchedule() = default;

    explicit DividendSchedule(std::vector<Dividend> entries) : entries_(std::move(entries)) {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const auto& d = entries_[i];
            const std::string where = "DividendSchedule[" + std::to_string(i) + "]: ";
            if (!std::isfinite(d.ex_date) || !(d.ex_date > 0.0)) {
                throw DomainError(where + "ex_date must be > 0");
            }
            if (i > 0 && !(d.ex_date > entries_[i - 1].ex_date)) {
                throw DomainError(where + "ex_dates must be strictly ascending");
            }
            if (!std::isfinite(d.cash) || d.cash < 0.0) {
                throw DomainError(where + "cash amount must be >= 0");
            }
            if (!(d.proportional >= 0.0 && d.proportional < 1.0)) {
                throw DomainError(where + "proportional fraction must lie in [0, 1)");
            }
        }
    }

    static DividendSchedule cash_only(std::span<const double> ex_dates,
                                      std::span<const double> amounts) {
        if (ex_dates.size() != amounts.size()) {
            throw DomainError("DividendSchedule: ex_dates and amounts differ in length");
        }
        std::vector<Dividend> entries;
        entries.reserve(ex_dates.size());
        for (std::size_t i = 0; i < ex_dates.size(); ++i) {
            entries.push_back({ex_dates[i], amounts[i], 0.0});
        }
        return DividendSchedule(std::move(entries));
    }

    std::span<const Dividend> entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    /// Number of dividends with ex-date in (0, horizon].
    std::size_t count_until(double horizon) const noexcept {
        return static_cast<std::size_t>(
            std::upper_bound(entries_.begin(), entries_.end(), horizon,
                             [](double t, const Dividend& d) { return t < d.ex_date; }) -
            entries_.begin());
    }

    /// Copy with the ex-date of one entry moved; the result is re-validated.
    DividendSchedule with_ex_date(std::size_t index, double ex_date) const {
        auto copy = entries_;
        copy.at(index).ex_date = ex_date;
        return DividendSchedule(std::move(copy));
    }

private:
    std::vector<Dividend> entries_;
};

/// Repo growth with proportional-dividend attrition over (t0, t1]:
/// exp(int_{t0}^{t1} r) * prod_{t0 < t_j <= t1} (1 - beta_j).
inline double growth_factor(const Curve& rate, const DividendSchedule& dividends, double t0,
                            double t1) {
    if (!(t0 >= 0.0 && t0 <= t1)) throw DomainError("growth_factor: requires 0 <= t0 <= t1");
    double attrition = 1.0;
    for (const auto& d : dividends.entries()) {
        if (d.ex_date > t0 && d.ex_date <= t1) {
            if (d.proportional >= 1.0) {
                throw DomainError("growth_factor: proportional dividend >= 1 wipes out the equity");
            }
            attrition *= 1.0 - d.proportional;
        }
    }
    return std::exp(integrate_rate(rate, t0, t1)) * attrition;
}

/// C(0, T).
inline double growth_factor(const Curve& rate, const DividendSchedule& dividends, double T) {
    if (!(T >= 0.0)) throw DomainError("growth_factor: requires T >= 0");
    return growth_factor(rate, dividends, 0.0, T);
}

}  // namespace cashdiv
