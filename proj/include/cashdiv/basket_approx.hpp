#pragma once

/**
 * @file basket_approx.hpp
 * @brief Conditioning approximations for lognormal basket puts.
 *
 * With Lambda a Gaussian linear combination of the log-drivers and U its
 * standardisation, every asset is conditionally lognormal:
 *
 *   E[S_i(T) | U = u] = F_i exp(b_i u - b_i^2 / 2),  b_i = Cov(X_i, U).
 *
 * When all b_i >= 0 the conditional mean m1(u) is increasing and crosses the
 * strike at a unique d. The lower bound is E[(G - E[S | U])^+], a sum of
 * normal cdf terms. The conditioned approximation replaces the conditional
 * basket given U = u by a lognormal with the same first two conditional
 * moments and integrates its put over the law of U. It is written as the
 * lower bound plus the time value of the matched put (a call below d, a put
 * above d by parity), which is nonnegative and vanishes for a single asset.
 */

#include "cashdiv/basket.hpp"
#include "cashdiv/black_scholes.hpp"
#include "cashdiv/errors.hpp"
#include "cashdiv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace cashdiv {

struct ConditioningPlan {
    std::vector<double> loadings;        ///< coefficient of each log-driver in Lambda
    double lambda_variance = 0.0;
    std::vector<double> per_asset_corr;  ///< Corr(X_i, Lambda); 0 for deterministic assets

    void validate(std::size_t n) const {
        if (loadings.size() != n || per_asset_corr.size() != n) {
            throw DomainError("ConditioningPlan: dimension does not match the basket");
        }
        if (!(lambda_variance >= 0.0)) {
            throw DomainError("ConditioningPlan: lambda_variance must be >= 0");
        }
        for (double r : per_asset_corr) {
            if (!(std::abs(r) <= 1.0 + 1e-12)) {
                throw DomainError("ConditioningPlan: |corr| must be <= 1");
            }
        }
    }
};

struct QuadratureSettings {
    double abs_tolerance = 1e-7;  ///< relative to the basket strike
    int max_depth = 40;
    double integration_bounds = 10.0;  ///< in standard deviations of Lambda

    void validate() const {
        if (!(abs_tolerance > 0.0)) throw DomainError("QuadratureSettings: tolerance must be > 0");
        if (max_depth < 10) throw DomainError("QuadratureSettings: max_depth must be >= 10");
        if (!(integration_bounds > 0.0)) {
            throw DomainError("QuadratureSettings: integration_bounds must be > 0");
        }
    }
};

/// Throws DomainError unless the basket correlation is positive semidefinite.
inline void check_correlation_psd(const BasketPutSpec& basket) {
    const std::size_t n = basket.size();
    std::vector<double> L(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = basket.rho(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= L[j * n + k] * L[j * n + k];
        if (diag < -1e-10) throw DomainError("basket correlation matrix is not positive semidefinite");
        const double pivot = diag > 1e-12 ? std::sqrt(diag) : 0.0;
        L[j * n + j] = pivot;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = basket.rho(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= L[i * n + k] * L[j * n + k];
            if (pivot == 0.0) {
                if (std::abs(v) > 1e-8) {
                    throw DomainError("basket correlation matrix is not positive semidefinite");
                }
                L[i * n + j] = 0.0;
            } else {
                L[i * n + j] = v / pivot;
            }
        }
    }
}

/// Lambda weighted by each asset's forward, i.e. the first-order expansion of
/// the basket around its forward. Weighting by spot times the growth from
/// the asset date to maturity differs only by a common factor.
inline ConditioningPlan make_conditioning_plan(const BasketPutSpec& basket) {
    basket.validate();
    const std::size_t n = basket.size();
    ConditioningPlan plan;
    plan.loadings.resize(n);
    for (std::size_t i = 0; i < n; ++i) plan.loadings[i] = basket.asset_forward(i);
    std::vector<double> cov_with_lambda(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += basket.covariance(i, j) * plan.loadings[j];
        cov_with_lambda[i] = acc;
        plan.lambda_variance += plan.loadings[i] * acc;
    }
    plan.per_asset_corr.assign(n, 0.0);
    const double sd = std::sqrt(std::max(plan.lambda_variance, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double var_i = basket.covariance(i, i);
        if (var_i > 0.0 && sd > 0.0) {
            plan.per_asset_corr[i] = std::clamp(cov_with_lambda[i] / (sd * std::sqrt(var_i)), -1.0, 1.0);
        }
    }
    return plan;
}

struct BasketApproxResult {
    double price = 0.0;
    double lower_bound = 0.0;
    double strike_crossing = 0.0;  ///< d, in standard deviations of Lambda
    std::size_t evaluations = 0;
    double error_estimate = 0.0;
};

namespace detail {

// Basket after folding deterministic assets into the strike and merging
// assets that share one driver.
struct ReducedBasket {
    double strike = 0.0;
    std::vector<double> forwards;
    std::vector<double> loading;            // b_g = Cov(X_g, U)
    std::vector<double> variance;           // Var(X_g)
    std::vector<double> conditional_expm1;  // expm1(Cov(X_g, X_h | U)), row-major
};

inline ReducedBasket reduce(const BasketPutSpec& basket, const ConditioningPlan& plan) {
    const std::size_t n = basket.size();
    ReducedBasket r;
    r.strike = basket.strike;
    std::vector<std::size_t> rep;  // representative asset of each group
    for (std::size_t i = 0; i < n; ++i) {
        const double fwd = basket.asset_forward(i);
        const double var = basket.covariance(i, i);
        if (var == 0.0) {
            r.strike -= fwd;
            continue;
        }
        bool merged = false;
        for (std::size_t g = 0; g < rep.size(); ++g) {
            const std::size_t k = rep[g];
            if (basket.rho(i, k) >= 1.0 - 1e-14 &&
                std::abs(var - r.variance[g]) <= 1e-14 * std::max(var, r.variance[g])) {
                r.forwards[g] += fwd;
                merged = true;
                break;
            }
        }
        if (!merged) {
            rep.push_back(i);
            r.forwards.push_back(fwd);
            r.variance.push_back(var);
            r.loading.push_back(plan.per_asset_corr[i] * std::sqrt(var));
        }
    }
    const std::size_t m = rep.size();
    r.conditional_expm1.resize(m * m);
    for (std::size_t g = 0; g < m; ++g) {
        for (std::size_t h = 0; h < m; ++h) {
            const double cov = basket.covariance(rep[g], rep[h]);
            r.conditional_expm1[g * m + h] = std::expm1(cov - r.loading[g] * r.loading[h]);
        }
    }
    return r;
}

// Solves sum_g F_g exp(b_g u - b_g^2/2) = G for u; -inf when the left side
// stays above G for every u.
inline double strike_crossing(const ReducedBasket& r) {
    const std::size_t m = r.forwards.size();
    const double log_strike = std::log(r.strike);
    auto eval = [&](double u, double& slope) {
        double mx = -std::numeric_limits<double>::infinity();
        std::vector<double> e(m);
        for (std::size_t g = 0; g < m; ++g) {
            e[g] = std::log(r.forwards[g]) + r.loading[g] * u - 0.5 * r.loading[g] * r.loading[g];
            mx = std::max(mx, e[g]);
        }
        double sum = 0.0;
        double weighted = 0.0;
        for (std::size_t g = 0; g < m; ++g) {
            const double w = std::exp(e[g] - mx);
            sum += w;
            weighted += w * r.loading[g];
        }
        slope = weighted / sum;
        return mx + std::log(sum) - log_strike;
    };

    double slope = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double h0 = eval(0.0, slope);
    if (h0 == 0.0) return 0.0;
    if (h0 < 0.0) {
        hi = 1.0;
        while (eval(hi, slope) < 0.0) {
            lo = hi;
            hi *= 2.0;
        }
    } else {
        lo = -1.0;
        while (eval(lo, slope) > 0.0) {
            hi = lo;
            lo *= 2.0;
            if (lo < -64.0) return -std::numeric_limits<double>::infinity();
        }
    }
    double u = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double hu = eval(u, slope);
        if (hu == 0.0) return u;
        if (hu < 0.0) lo = u; else hi = u;
        double next = (slope > 0.0) ? u - hu / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - u) <= 1e-15 * std::max(1.0, std::abs(u))) return next;
        u = next;
    }
    return u;
}

inline double closed_form_lower_bound(const ReducedBasket& r, double d) {
    if (d == -std::numeric_limits<double>::infinity()) return 0.0;
    double lb = r.strike * cdf_normal(d);
    for (std::size_t g = 0; g < r.forwards.size(); ++g) {
        lb -= r.forwards[g] * cdf_normal(d - r.loading[g]);
    }
    return std::max(lb, 0.0);
}

// Either a final price, or the reduced basket still needing the multi-asset path.
struct Prepared {
    bool done = false;
    double price = 0.0;
    ReducedBasket reduced;
    double d = 0.0;
};

inline Prepared prepare(const BasketPutSpec& basket, const ConditioningPlan& plan) {
    basket.validate();
    plan.validate(basket.size());
    if (!basket.single_factor) check_correlation_psd(basket);

    Prepared p;
    p.reduced = reduce(basket, plan);
    auto& r = p.reduced;
    if (r.strike <= 0.0) {
        p.done = true;
        return p;
    }
    if (r.forwards.empty()) {
        p.done = true;
        p.price = r.strike;
        return p;
    }
    if (r.forwards.size() == 1) {
        p.done = true;
        p.price = detail::black_undiscounted(r.forwards[0], r.strike, std::sqrt(r.variance[0]), false);
        return p;
    }
    bool any_positive = false;
    for (double b : r.loading) {
        if (b < -1e-12) {
            throw DomainError("conditioning variable is negatively correlated with an asset");
        }
        any_positive = any_positive || b > 0.0;
    }
    if (!any_positive) throw DomainError("conditioning variable is independent of the basket");
    p.d = strike_crossing(r);
    return p;
}

}  // namespace detail

/// E[(G - E[basket | Lambda])^+]; a lower bound of the basket put.
inline double lower_bound_put(const BasketPutSpec& basket, const ConditioningPlan& plan) {
    auto p = detail::prepare(basket, plan);
    if (p.done) return p.price;
    return detail::closed_form_lower_bound(p.reduced, p.d);
}

inline BasketApproxResult conditioned_put_detailed(const BasketPutSpec& basket,
                                                   const ConditioningPlan& plan,
                                                   const QuadratureSettings& quad = {}) {
    quad.validate();
    auto p = detail::prepare(basket, plan);
    BasketApproxResult out;
    if (p.done) {
        out.price = out.lower_bound = p.price;
        return out;
    }
    const auto& r = p.reduced;
    const std::size_t m = r.forwards.size();
    out.strike_crossing = p.d;
    out.lower_bound = detail::closed_form_lower_bound(r, p.d);

    const double bound = quad.integration_bounds;
    const double d = p.d;

    std::vector<double> cond_mean(m);
    // conditional mean and lognormal sigma of the basket given U = u
    auto conditional_moments = [&](double u, double& sigma) {
        double m1 = 0.0;
        for (std::size_t g = 0; g < m; ++g) {
            cond_mean[g] = r.forwards[g] *
                           std::exp(r.loading[g] * u - 0.5 * r.loading[g] * r.loading[g]);
            m1 += cond_mean[g];
        }
        double q = 0.0;
        for (std::size_t g = 0; g < m; ++g) {
            const double* row = &r.conditional_expm1[g * m];
            double acc = 0.0;
            for (std::size_t h = 0; h < m; ++h) acc += row[h] * cond_mean[h];
            q += cond_mean[g] * acc;
        }
        q = (m1 > 0.0) ? q / (m1 * m1) : 0.0;
        sigma = (q > 0.0) ? std::sqrt(std::log1p(q)) : 0.0;
        return m1;
    };
    // time value of the matched lognormal put per unit strike, times the
    // density of U; written as the out-of-the-money side
    const std::function<double(double)> f = [&](double u) {
        double sigma = 0.0;
        const double m1 = conditional_moments(u, sigma);
        if (!(m1 > 0.0) || sigma == 0.0) return 0.0;
        return detail::black_undiscounted(m1 / r.strike, 1.0, sigma, u < d) * pdf_normal(u);
    };

    // The integrand peaks at d with a width of roughly sigma(d) over the
    // slope of log m1; panels grow geometrically away from the peak.
    const double centre = std::clamp(d, -bound, bound);
    double width = 1.0;
    if (std::isfinite(d)) {
        double sigma = 0.0;
        const double m1 = conditional_moments(centre, sigma);
        double slope = 0.0;
        for (std::size_t g = 0; g < m; ++g) slope += cond_mean[g] * r.loading[g];
        slope /= m1;
        if (slope > 0.0 && sigma > 0.0) width = std::clamp(sigma / slope, 1e-10, 1.0);
    }
    std::vector<double> cuts{centre};
    for (double w = width; centre + w < bound; w *= 2.0) cuts.push_back(centre + w);
    cuts.push_back(bound);
    for (double w = width; centre - w > -bound; w *= 2.0) cuts.push_back(centre - w);
    cuts.push_back(-bound);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const double tol = quad.abs_tolerance / static_cast<double>(cuts.size());
    double correction = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        try {
            const auto res = adaptive_simpson_detailed(f, cuts[k], cuts[k + 1], tol, quad.max_depth);
            correction += res.value;
            out.evaluations += res.evaluations;
            out.error_estimate += res.error_estimate;
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(e.what(),
                                   out.lower_bound + r.strike * (correction + e.best_estimate()),
                                   r.strike * (out.error_estimate + e.error_bound()));
        }
    }
    out.error_estimate *= r.strike;
    out.price = out.lower_bound + r.strike * correction;
    return out;
}

inline double conditioned_put(const BasketPutSpec& basket, const ConditioningPlan& plan,
                              const QuadratureSettings& quad = {}) {
    return conditioned_put_detailed(basket, plan, quad).price;
}

}  // namespace cashdiv
