#include "catch2/catch_amalgamated.hpp"

#include <cmath>

#include "hypfpp/stats.hpp"

using namespace hypfpp;

TEST_CASE("normal cdf, pdf, and quantile agree with tabled values") {
    REQUIRE(normal_cdf(0.0) == Catch::Approx(0.5));
    REQUIRE(normal_cdf(1.96) == Catch::Approx(0.9750021048517795).epsilon(1e-12));
    REQUIRE(normal_cdf(-1.0) == Catch::Approx(0.15865525393145707).epsilon(1e-12));
    REQUIRE(normal_pdf(0.0) == Catch::Approx(0.3989422804014327).epsilon(1e-12));
    for (double p : {0.01, 0.1, 0.25, 0.5, 0.9, 0.999})
        REQUIRE(normal_cdf(normal_quantile(p)) == Catch::Approx(p).margin(1e-9));
    REQUIRE(normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("sample moments match hand computations") {
    std::vector<double> xs{1, 2, 3, 4};
    REQUIRE(sample_mean(xs) == Catch::Approx(2.5));
    REQUIRE(sample_variance(xs) == Catch::Approx(5.0 / 3.0));
    REQUIRE(sample_skewness({1, 2, 3}) == Catch::Approx(0.0).margin(1e-12));
    // Two-point symmetric mass has the minimum kurtosis.
    REQUIRE(sample_excess_kurtosis({-1, -1, 1, 1}) == Catch::Approx(-2.0).epsilon(1e-12));
    SummaryStats s = summarize(xs);
    REQUIRE(s.n == 4);
    REQUIRE(s.mean == Catch::Approx(2.5));
    REQUIRE(s.se == Catch::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}

TEST_CASE("empirical quantiles interpolate between order statistics") {
    std::vector<double> xs{4, 1, 3, 2};
    REQUIRE(empirical_quantile(xs, 0.5) == Catch::Approx(2.5));
    REQUIRE(empirical_quantile(xs, 0.25) == Catch::Approx(1.75));
    REQUIRE(empirical_quantile(xs, 0.0) == 1.0);
    REQUIRE(empirical_quantile(xs, 1.0) == 4.0);
    REQUIRE_THROWS_AS(empirical_quantile({}, 0.5), DomainError);
    REQUIRE_THROWS_AS(empirical_quantile(xs, 1.5), DomainError);
}

TEST_CASE("bootstrap intervals cover the plug-in statistic") {
    SplitMix64 rng(8);
    std::vector<double> xs;
    for (int i = 0; i < 400; ++i) xs.push_back(rng.next_u01());
    Interval mean_ci = bootstrap_mean_ci(xs, 2000, 0.95, 1);
    REQUIRE(mean_ci.lo <= sample_mean(xs));
    REQUIRE(mean_ci.hi >= sample_mean(xs));
    REQUIRE(mean_ci.lo < mean_ci.hi);
    Interval var_ci = bootstrap_variance_ci(xs, 2000, 0.95, 2);
    REQUIRE(var_ci.lo <= sample_variance(xs));
    REQUIRE(var_ci.hi >= sample_variance(xs));
    // Same seed, same interval.
    Interval again = bootstrap_mean_ci(xs, 2000, 0.95, 1);
    REQUIRE(again.lo == mean_ci.lo);
    REQUIRE(again.hi == mean_ci.hi);
    REQUIRE_THROWS_AS(bootstrap_mean_ci({1.0}, 100, 0.95, 1), DomainError);
    REQUIRE_THROWS_AS(bootstrap_mean_ci(xs, 100, 1.0, 1), DomainError);
}

TEST_CASE("the Kolmogorov distance is tiny for matched laws and large otherwise") {
    SplitMix64 rng(3);
    std::vector<double> xs;
    for (int i = 0; i < 50000; ++i) xs.push_back(rng.next_u01());
    auto uniform_cdf = [](double x) { return x < 0 ? 0.0 : (x > 1 ? 1.0 : x); };
    REQUIRE(ks_distance(xs, uniform_cdf) < 0.01);
    auto shifted = [](double x) { return x < 0.5 ? 0.0 : (x > 1.5 ? 1.0 : x - 0.5); };
    REQUIRE(ks_distance(xs, shifted) > 0.4);
    REQUIRE_THROWS_AS(ks_distance({}, uniform_cdf), DomainError);
}

TEST_CASE("the normality statistic separates normal from exponential samples") {
    SplitMix64 rng(12);
    std::vector<double> normals, exponentials;
    for (int i = 0; i < 2000; ++i) {
        // Box-Muller keeps the draw independent of the quantile code.
        double u1 = rng.next_u01(), u2 = rng.next_u01();
        u1 = std::max(u1, 1e-12);
        normals.push_back(std::sqrt(-2 * std::log(u1)) * std::cos(6.283185307179586 * u2));
        exponentials.push_back(-std::log(std::max(rng.next_u01(), 1e-12)));
    }
    // 1.035 is the 1% critical value for the modified statistic.
    REQUIRE(anderson_darling_normal(normals).a2_modified < 1.035);
    REQUIRE(anderson_darling_normal(exponentials).a2_modified > 1.035);
    REQUIRE_THROWS_AS(anderson_darling_normal({1, 2, 3}), DomainError);
    REQUIRE_THROWS_AS(anderson_darling_normal(std::vector<double>(20, 1.0)), DomainError);
}

TEST_CASE("least squares recovers exact linear data") {
    std::vector<double> xs{1, 2, 3, 4, 5};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(2.5 * x - 1.0);
    LinearFit f = linear_fit(xs, ys);
    REQUIRE(f.slope == Catch::Approx(2.5).epsilon(1e-12));
    REQUIRE(f.intercept == Catch::Approx(-1.0).epsilon(1e-12));
    REQUIRE(f.r2 == Catch::Approx(1.0).epsilon(1e-12));
    std::vector<double> through;
    for (double x : xs) through.push_back(0.75 * x);
    REQUIRE(through_origin_slope(xs, through) == Catch::Approx(0.75).epsilon(1e-12));
    REQUIRE_THROWS_AS(linear_fit({1}, {1}), DomainError);
    REQUIRE_THROWS_AS(linear_fit({1, 1, 1}, {1, 2, 3}), DomainError);
    REQUIRE_THROWS_AS(through_origin_slope({0, 0}, {1, 2}), DomainError);
}

TEST_CASE("quadrature handles smooth and kinked integrands") {
    REQUIRE(integrate([](double x) { return x * x; }, 0, 1, 1e-10) ==
            Catch::Approx(1.0 / 3.0).epsilon(1e-9));
    // |x - 1/4| has a kink; the knot keeps each piece smooth. The exact value
    // is 1/32 + 9/32 = 5/16.
    auto vee = [](double x) { return std::abs(x - 0.25); };
    REQUIRE(integrate(vee, 0, 1, 1e-10, {0.25}) == Catch::Approx(5.0 / 16.0).epsilon(1e-9));
    REQUIRE(integrate([](double) { return 1.0; }, 1, 1, 1e-10) == 0.0);
    REQUIRE(integrate([](double x) { return std::sin(x); }, 0, 3.141592653589793, 1e-10) ==
            Catch::Approx(2.0).epsilon(1e-9));
}
