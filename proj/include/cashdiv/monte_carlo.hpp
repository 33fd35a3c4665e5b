#pragma once

/**
 * @file monte_carlo.hpp
 * @brief Monte Carlo reference prices for the piecewise-lognormal model.
 *
 * Between ex-dates the spot is sampled exactly from its lognormal law; at
 * each ex-date the dividend is applied according to the dividend policy.
 * Paths are split into fixed batches, each with its own generator seeded
 * from (seed, batch index), so results do not depend on the thread count.
 */

#include "cashdiv/errors.hpp"
#include "cashdiv/market.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

namespace cashdiv {

struct McSettings {
    std::size_t paths = 1'000'000;
    std::uint64_t seed = 20240601;
    DividendPolicy policy = DividendPolicy::none;
    bool antithetic = true;
    unsigned threads = 0;  ///< 0 selects std::thread::hardware_concurrency()

    void validate() const {
        if (paths < 2) throw DomainError("McSettings: at least 2 paths are required");
    }
};

struct McResult {
    double price = 0.0;
    double std_error = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double inverse_cdf_normal(double p) {
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

struct McSegment {
    double drift;  // int r - 0.5 int sigma^2
    double sd;     // sqrt(int sigma^2)
    const Dividend* dividend;  // applied at the end of the segment, or null
};

}  // namespace detail

inline McResult mc_price(const MarketData& m, const OptionSpec& o, const McSettings& s) {
    m.validate();
    o.validate();
    s.validate();
    const double T = o.expiry;

    std::vector<detail::McSegment> segments;
    double t = 0.0;
    const std::size_t n = m.dividends.count_until(T);
    for (std::size_t i = 0; i <= n; ++i) {
        const double end = (i < n) ? m.dividends.entries()[i].ex_date : T;
        const Dividend* div = (i < n) ? &m.dividends.entries()[i] : nullptr;
        const double var = integrate_variance(m.vol_curve, t, end);
        segments.push_back({integrate_rate(m.repo_curve, t, end) - 0.5 * var, std::sqrt(var), div});
        t = end;
    }
    const double discount = discount_factor(m, o.payment_time());
    const double K = o.strike;
    const bool is_call = o.kind == OptionKind::call;

    auto payoff = [&](const double* z, double sign) {
        double spot = m.spot;
        for (std::size_t k = 0; k < segments.size(); ++k) {
            const auto& seg = segments[k];
            spot *= std::exp(seg.drift + seg.sd * sign * z[k]);
            if (seg.dividend) spot = apply_dividend(spot, *seg.dividend, s.policy);
        }
        return is_call ? std::max(spot - K, 0.0) : std::max(K - spot, 0.0);
    };

    const std::size_t samples = s.antithetic ? (s.paths + 1) / 2 : s.paths;
    const std::size_t batches = std::min<std::size_t>(256, samples);
    const std::size_t per_batch = (samples + batches - 1) / batches;

    // moments are accumulated around the zero-noise payoff for stability
    const std::vector<double> zeros(segments.size(), 0.0);
    const double shift = payoff(zeros.data(), 1.0);

    struct BatchSum {
        double sum = 0.0;
        double sum_sq = 0.0;
        std::size_t count = 0;
    };
    std::vector<BatchSum> sums(batches);

    auto run_batch = [&](std::size_t b) {
        std::mt19937_64 rng(detail::splitmix64(s.seed ^ detail::splitmix64(b + 1)));
        std::vector<double> z(segments.size());
        const std::size_t begin = b * per_batch;
        const std::size_t end = std::min(samples, begin + per_batch);
        BatchSum acc;
        for (std::size_t i = begin; i < end; ++i) {
            for (auto& zk : z) {
                const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
                zk = detail::inverse_cdf_normal(u);
            }
            double v = payoff(z.data(), 1.0);
            if (s.antithetic) v = 0.5 * (v + payoff(z.data(), -1.0));
            v -= shift;
            acc.sum += v;
            acc.sum_sq += v * v;
            ++acc.count;
        }
        sums[b] = acc;
    };

    unsigned threads = s.threads ? s.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, batches));
    if (threads <= 1) {
        for (std::size_t b = 0; b < batches; ++b) run_batch(b);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t b = w; b < batches; b += threads) run_batch(b);
            });
        }
        for (auto& th : pool) th.join();
    }

    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (const auto& b : sums) {
        sum += b.sum;
        sum_sq += b.sum_sq;
        count += b.count;
    }
    const double mean = sum / static_cast<double>(count);
    const double var = std::max(sum_sq / static_cast<double>(count) - mean * mean, 0.0);
    McResult out;
    out.price = discount * (shift + mean);
    out.std_error = discount * std::sqrt(var / static_cast<double>(count > 1 ? count - 1 : 1));
    return out;
}

}  // namespace cashdiv
