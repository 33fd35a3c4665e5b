#pragma once

// Reference computations used only by the tests. Nothing here calls into
// the pricing code paths it is used to check.

#include "cashdiv/basket.hpp"

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace cashdiv::oracle {

/// Composite Simpson with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i) sum += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
    return sum * h / 3.0;
}

/// Undiscounted lognormal call by integrating the payoff against the density.
inline double lognormal_call_by_quadrature(double forward, double strike, double s) {
    const auto density = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
    const double kink = (std::log(strike / forward) + 0.5 * s * s) / s;
    return simpson([&](double z) { return (forward * std::exp(s * z - 0.5 * s * s) - strike) * density(z); },
                   kink, 14.0, 200000);
}

/// Phi(x) = 1/2 + phi(x) * sum_n x^(2n+1) / (1*3*...*(2n+1)), in long double.
inline double normal_cdf_series(double xd) {
    const long double x = xd;
    long double term = x;
    long double sum = x;
    for (int n = 1; n < 400; ++n) {
        term *= x * x / (2.0L * n + 1.0L);
        sum += term;
        if (std::fabs(term) < 1e-30L * std::fabs(sum)) break;
    }
    const long double pdf = std::exp(-0.5L * x * x) / std::sqrt(2.0L * 3.14159265358979323846264338327950288L);
    return static_cast<double>(0.5L + pdf * sum);
}

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
};

/// Basket put by plain Monte Carlo with a Cholesky factor of the correlation
/// and antithetic pairs.
inline McEstimate basket_put_mc(const BasketPutSpec& b, std::size_t pairs, std::uint64_t seed) {
    const std::size_t n = b.size();
    std::vector<double> L(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = b.rho(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k];
        L[j * n + j] = d > 0.0 ? std::sqrt(d) : 0.0;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = b.rho(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= L[i * n + k] * L[j * n + k];
            L[i * n + j] = L[j * n + j] > 0.0 ? v / L[j * n + j] : 0.0;
        }
    }
    std::vector<double> drift(n), sd(n);
    for (std::size_t i = 0; i < n; ++i) {
        sd[i] = b.vols[i] * std::sqrt(b.maturity);
        drift[i] = std::log(b.spots[i]) + b.drifts[i] * b.maturity - 0.5 * sd[i] * sd[i];
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> z(n);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t p = 0; p < pairs; ++p) {
        for (auto& zi : z) zi = normal(rng);
        double v = 0.0;
        for (double sign : {1.0, -1.0}) {
            double basket = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double w = 0.0;
                for (std::size_t k = 0; k <= i; ++k) w += L[i * n + k] * z[k];
                basket += std::exp(drift[i] + sd[i] * sign * w);
            }
            v += 0.5 * std::max(b.strike - basket, 0.0);
        }
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / pairs;
    const double var = std::max(sum_sq / pairs - mean * mean, 0.0);
    return {mean, std::sqrt(var / (pairs - 1))};
}

/// Random basket with nonnegative correlations from a one-factor-plus-noise
/// structure, so the matrix is PSD.
inline BasketPutSpec random_basket(std::mt19937_64& rng, std::size_t n, double max_vol,
                                   double max_maturity = 3.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    BasketPutSpec b;
    b.maturity = 0.25 + (max_maturity - 0.25) * unit(rng);
    std::vector<double> beta(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        b.spots.push_back(5.0 + 45.0 * unit(rng));
        b.drifts.push_back(-0.05 + 0.1 * unit(rng));
        b.vols.push_back(0.05 + (max_vol - 0.05) * unit(rng));
        beta[i] = 0.3 + 0.7 * unit(rng);
        total += b.asset_forward(i);
    }
    b.correlation.assign(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) b.correlation[i * n + j] = beta[i] * beta[j];
    b.strike = total * (0.7 + 0.6 * unit(rng));
    return b;
}

/// Random basket with the structure of a dividend basket: all assets load on
/// one Brownian path up to increasing times, so rho_ij = sqrt(v_min / v_max).
inline BasketPutSpec random_single_factor_basket(std::mt19937_64& rng, std::size_t n, double max_vol) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    BasketPutSpec b;
    b.maturity = 0.25 + 9.75 * unit(rng);
    const double vol = 0.05 + (max_vol - 0.05) * unit(rng);
    std::vector<double> fraction(n);
    for (auto& f : fraction) f = unit(rng);
    std::sort(fraction.begin(), fraction.end());
    fraction.back() = 1.0;  // the strike asset runs to maturity
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        b.spots.push_back(i + 1 < n ? 1.0 + 10.0 * unit(rng) : 40.0 + 100.0 * unit(rng));
        b.drifts.push_back(-0.05 * fraction[i]);
        b.vols.push_back(vol * std::sqrt(fraction[i]));
        total += b.asset_forward(i);
    }
    b.correlation.assign(n * n, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            b.correlation[i * n + j] = std::sqrt(std::min(fraction[i], fraction[j]) /
                                                 std::max(fraction[i], fraction[j]));
    b.single_factor = true;
    b.strike = total * (0.7 + 0.6 * unit(rng));
    return b;
}

}  // namespace cashdiv::oracle
