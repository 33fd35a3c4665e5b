#include "cashdiv/fdm.hpp"
#include "cashdiv/monte_carlo.hpp"
#include "cashdiv/pricer.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cashdiv;

namespace {

MarketData table1_market() {
    const std::vector<double> dates{0.9, 1.9, 2.9, 3.9, 4.9, 5.9, 6.9};
    const std::vector<double> cash{6.0, 6.5, 7.0, 7.5, 8.0, 8.0, 8.0};
    return MarketData::flat(100.0, 0.06, 0.25, DividendSchedule::cash_only(dates, cash));
}

OptionSpec call(double K, double T) { return {K, T, 0.0, OptionKind::call, Method::MC}; }

McSettings mc(std::size_t paths, DividendPolicy policy = DividendPolicy::none) {
    McSettings s;
    s.paths = paths;
    s.policy = policy;
    return s;
}

FdmSettings grid(std::size_t space, std::size_t time) {
    FdmSettings s;
    s.space_steps = space;
    s.time_steps = time;
    return s;
}

}  // namespace

TEST(MonteCarlo, ZeroVolatilityIsExact) {
    auto m = table1_market();
    m.vol_curve = Curve::flat_vol(0.0);
    for (double K : {30.0, 60.0}) {
        const auto res = mc_price(m, call(K, 7.0), mc(1000));
        const double expected = std::exp(-0.42) * std::max(forward(m, 7.0) - K, 0.0);
        EXPECT_NEAR(res.price, expected, 1e-12 * 100.0);
        EXPECT_EQ(res.std_error, 0.0);
    }
}

TEST(MonteCarlo, NoDividendsMatchesBlackScholes) {
    const auto m = MarketData::flat(100.0, 0.05, 0.3);
    for (double K : {80.0, 100.0, 130.0}) {
        const auto res = mc_price(m, call(K, 2.0), mc(1'000'000));
        const double bs = bs_price({100.0 * std::exp(0.1), K, 0.3 * std::sqrt(2.0), std::exp(-0.1), true});
        EXPECT_NEAR(res.price, bs, 3.0 * res.std_error) << K;
        EXPECT_GT(res.std_error, 0.0);
    }
}

TEST(MonteCarlo, SeedReproducibleAcrossThreadCounts) {
    const auto m = table1_market();
    auto s = mc(20'000);
    s.threads = 1;
    const auto a = mc_price(m, call(100.0, 7.0), s);
    s.threads = 3;
    const auto b = mc_price(m, call(100.0, 7.0), s);
    EXPECT_EQ(a.price, b.price);
    EXPECT_EQ(a.std_error, b.std_error);
    s.seed += 1;
    EXPECT_NE(mc_price(m, call(100.0, 7.0), s).price, a.price);
}

TEST(MonteCarlo, Table1AgainstReference) {
    const auto res = mc_price(table1_market(), call(100.0, 7.0), mc(1'000'000));
    EXPECT_NEAR(res.price, 19.48229, 3.0 * res.std_error);
}

TEST(MonteCarlo, DividendPolicies) {
    // large dividends make a negative spot likely
    auto m = MarketData::flat(100.0, 0.02, 0.8,
                              DividendSchedule::cash_only(std::vector{0.5, 1.0, 1.5},
                                                          std::vector{30.0, 30.0, 30.0}));
    const auto o = call(20.0, 2.0);
    const auto none = mc_price(m, o, mc(400'000));
    const auto liq = mc_price(m, o, mc(400'000, DividendPolicy::liquidator));
    const auto surv = mc_price(m, o, mc(400'000, DividendPolicy::survivor));
    EXPECT_NEAR(liq.price, none.price, 3.0 * std::hypot(liq.std_error, none.std_error));
    EXPECT_GE(surv.price, none.price);
    EXPECT_GT(surv.price - none.price, 3.0 * std::hypot(surv.std_error, none.std_error));
    // the liquidator forward (a strike-zero call) exceeds the plain forward
    const auto fwd_liq = mc_price(m, call(0.0, 2.0), mc(400'000, DividendPolicy::liquidator));
    EXPECT_GT(fwd_liq.price, discount_factor(m, 2.0) * forward(m, 2.0) + 3.0 * fwd_liq.std_error);
}

TEST(MonteCarlo, Validation) {
    EXPECT_THROW(mc_price(table1_market(), call(100.0, 7.0), mc(1)), DomainError);
}

TEST(Fdm, NoDividendsMatchesBlackScholes) {
    const auto m = MarketData::flat(100.0, 0.05, 0.25);
    for (double K : {80.0, 100.0, 120.0}) {
        const double bs = bs_price({100.0 * std::exp(0.05), K, 0.25, std::exp(-0.05), true});
        EXPECT_NEAR(fdm_price(m, call(K, 1.0), grid(2000, 500)), bs, 1e-5 * bs) << K;
        const double bs_put = bs_price({100.0 * std::exp(0.05), K, 0.25, std::exp(-0.05), false});
        OptionSpec p = call(K, 1.0);
        p.kind = OptionKind::put;
        // absolute: the out-of-the-money put is small
        EXPECT_NEAR(fdm_price(m, p, grid(2000, 500)), bs_put, 5e-5) << K;
    }
}

TEST(Fdm, SecondOrderRefinement) {
    const auto m = MarketData::flat(100.0, 0.06, 0.30,
                                    DividendSchedule::cash_only(std::vector{0.4}, std::vector{7.0}));
    const auto o = call(100.0, 1.0);
    const double finest = fdm_price(m, o, grid(16000, 4000));
    const double coarse = fdm_price(m, o, grid(500, 125));
    const double fine = fdm_price(m, o, grid(1000, 250));
    const double ratio = std::abs(coarse - finest) / std::abs(fine - finest);
    EXPECT_GE(ratio, 3.5) << coarse - finest << " " << fine - finest;
}

TEST(Fdm, CallNondecreasingInSpot) {
    const auto sol = fdm_solve(table1_market(), call(100.0, 7.0), grid(2000, 500));
    for (std::size_t j = 1; j < sol.values.size(); ++j) {
        ASSERT_GE(sol.values[j], sol.values[j - 1] - 1e-12) << j;
    }
}

TEST(Fdm, Table1WithinMonteCarloBand) {
    const auto m = table1_market();
    const double K[] = {70.0, 100.0, 130.0};
    for (double k : K) {
        const double fd = fdm_price(m, call(k, 7.0), grid(4000, 1000));
        const auto res = mc_price(m, call(k, 7.0), mc(1'000'000));
        EXPECT_NEAR(fd, res.price, 3.0 * res.std_error) << k;
    }
}

TEST(Fdm, LiquidatorLeavesCallUnchanged) {
    const auto m = table1_market();
    auto liq = grid(2000, 500);
    liq.policy = DividendPolicy::liquidator;
    EXPECT_NEAR(fdm_price(m, call(100.0, 7.0), liq), fdm_price(m, call(100.0, 7.0), grid(2000, 500)), 1e-12);
}

TEST(Fdm, ConfigurationErrors) {
    const auto m = MarketData::flat(100.0, 0.05, 0.25);
    auto small = grid(2000, 500);
    small.s_max_multiplier = 0.5;
    EXPECT_THROW(fdm_price(m, call(100.0, 1.0), small), ConfigError);
    auto surv = grid(2000, 500);
    surv.policy = DividendPolicy::survivor;
    EXPECT_THROW(fdm_price(m, call(100.0, 1.0), surv), ConfigError);
    EXPECT_THROW(fdm_price(m, call(100.0, 1.0), grid(50, 500)), ConfigError);
    EXPECT_THROW(fdm_price(m, call(100.0, 1.0), grid(2000, 5)), ConfigError);
}
