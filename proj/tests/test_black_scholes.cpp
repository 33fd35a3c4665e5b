#include "cashdiv/black_scholes.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cashdiv;

TEST(CdfNormal, Basics) {
    EXPECT_EQ(cdf_normal(0.0), 0.5);
    EXPECT_NEAR(cdf_normal(1.96), 0.9750021049, 1e-10);
    EXPECT_GT(cdf_normal(-38.0), 0.0);
}

TEST(CdfNormal, MatchesSeriesOracle) {
    EXPECT_NEAR(oracle::normal_cdf_series(1.96), 0.9750021049, 1e-10);
    for (double x = -8.0; x <= 8.0; x += 0.125) {
        EXPECT_NEAR(cdf_normal(x), oracle::normal_cdf_series(x), 1e-15) << x;
        EXPECT_NEAR(cdf_normal(-x), 1.0 - cdf_normal(x), 1e-15);
    }
}

TEST(CdfNormal, Monotone) {
    double prev = 0.0;
    for (double x = -40.0; x <= 10.0; x += 0.01) {
        const double c = cdf_normal(x);
        EXPECT_GE(c, prev);
        prev = c;
    }
}

TEST(BsPrice, AtTheMoneyAgainstQuadrature) {
    const double oracle = oracle::lognormal_call_by_quadrature(100.0, 100.0, 0.2);
    EXPECT_NEAR(oracle, 7.965567, 1e-6);
    EXPECT_NEAR(bs_price({100.0, 100.0, 0.2, 1.0, true}), oracle, 1e-9);
}

TEST(BsPrice, OffTheMoneyAgainstQuadrature) {
    for (double K : {60.0, 90.0, 130.0, 200.0}) {
        for (double s : {0.05, 0.3, 1.1}) {
            EXPECT_NEAR(bs_price({100.0, K, s, 1.0, true}),
                        oracle::lognormal_call_by_quadrature(100.0, K, s), 1e-8)
                << K << " " << s;
        }
    }
}

TEST(BsPrice, Degenerate) {
    EXPECT_EQ(bs_price({100.0, 0.0, 0.4, 1.0, true}), 100.0);
    EXPECT_EQ(bs_price({100.0, 100.0, 0.0, 1.0, true}), 0.0);
    EXPECT_EQ(bs_price({100.0, 90.0, 0.0, 0.5, true}), 5.0);
    EXPECT_EQ(bs_price({100.0, 110.0, 0.0, 0.5, false}), 5.0);
    EXPECT_THROW(bs_price({-1.0, 100.0, 0.2, 1.0, true}), DomainError);
    EXPECT_THROW(bs_price({100.0, -1.0, 0.2, 1.0, true}), DomainError);
    EXPECT_THROW(bs_price({100.0, 100.0, 0.2, 1.5, true}), DomainError);
}

TEST(BsPrice, ParityOnRandomQuotes) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1'000'000; ++i) {
        const double F = 1.0 + 500.0 * u(rng);
        const double K = F * (0.2 + 3.0 * u(rng));
        const double s = 2.0 * u(rng);
        const double df = 0.3 + 0.7 * u(rng);
        const double c = bs_price({F, K, s, df, true});
        const double p = bs_price({F, K, s, df, false});
        ASSERT_NEAR(c - p, df * (F - K), 1e-12 * F) << F << " " << K << " " << s;
    }
}

TEST(BsPrice, VegaPositive) {
    for (double K : {50.0, 100.0, 150.0}) {
        double prev = bs_price({100.0, K, 0.0, 1.0, true});
        for (double s = 0.01; s < 3.0; s += 0.01) {
            if (s > 0.1) EXPECT_GT(detail::black_vega_undiscounted(100.0, K, s), 0.0);
            const double v = bs_price({100.0, K, s, 1.0, true});
            EXPECT_GE(v, prev);
            prev = v;
        }
        EXPECT_GT(prev, bs_price({100.0, K, 1.0, 1.0, true}));
    }
}

TEST(ImpliedVol, Roundtrip) {
    const double price = bs_price({100.0, 110.0, 0.3, 0.95, true});
    EXPECT_NEAR(implied_vol(price, 100.0, 110.0, 1.0, 0.95, true), 0.3, 1e-10);
}

TEST(ImpliedVol, IntrinsicGivesZero) {
    EXPECT_EQ(implied_vol(0.9 * 10.0, 100.0, 90.0, 1.0, 0.9, true), 0.0);
    EXPECT_EQ(implied_vol(0.0, 100.0, 120.0, 2.0, 1.0, true), 0.0);
}

TEST(ImpliedVol, NearUpperBoundAgainstBisection) {
    const double F = 100.0, K = 100.0, df = 0.9;
    const double price = df * F - 1e-6;
    const double vol = implied_vol(price, F, K, 1.0, df, true);
    // plain bisection on the total standard deviation
    double lo = 0.0, hi = 100.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (bs_price({F, K, mid, df, true}) < price ? lo : hi) = mid;
    }
    EXPECT_GT(vol, 5.0);
    EXPECT_NEAR(vol, 0.5 * (lo + hi), 1e-6 * vol);
    EXPECT_NEAR(bs_price({F, K, vol, df, true}), price, 1e-12 * F);
}

TEST(ImpliedVol, RejectsOutOfBand) {
    try {
        implied_vol(1.0, 100.0, 90.0, 1.0, 1.0, true);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("intrinsic"), std::string::npos);
    }
    try {
        implied_vol(100.0, 100.0, 90.0, 1.0, 1.0, true);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("upper"), std::string::npos);
    }
    EXPECT_THROW(implied_vol(95.0, 100.0, 90.0, 1.0, 1.0, false), DomainError);
}

TEST(ImpliedVol, IdentityOnRandomGrid) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200'000; ++i) {
        const double F = 10.0 + 200.0 * u(rng);
        const double K = F * std::exp(-0.8 + 1.6 * u(rng));
        const double T = 0.05 + 10.0 * u(rng);
        const double vol = 0.05 + 1.2 * u(rng);
        const double df = 0.5 + 0.5 * u(rng);
        const bool call = u(rng) < 0.5;
        // skip quotes whose time value is lost to rounding
        if (std::abs(std::log(K / F)) > 4.0 * vol * std::sqrt(T)) continue;
        const double price = bs_price({F, K, vol * std::sqrt(T), df, call});
        const double back = implied_vol(price, F, K, T, df, call);
        ASSERT_NEAR(back, vol, 1e-9) << F << " " << K << " " << T << " " << call;
        ASSERT_NEAR(bs_price({F, K, back * std::sqrt(T), df, call}), price, 1e-12 * F);
    }
}
