#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "bfmix/bayes_factor.hpp"
#include "bfmix/quadrature.hpp"
#include "bfmix/random.hpp"

using namespace bfmix;

namespace {

Dataset random_dataset(std::mt19937_64& gen, int n, double mean = 0.0, double sd = 1.0) {
    std::normal_distribution<double> z(mean, sd);
    std::vector<double> v(n);
    for (double& x : v) x = z(gen);
    return Dataset(std::move(v));
}

// Independent route: integrate phi(x - mu) products against phi(mu) with
// boost's Gauss-Kronrod, in log-shifted form.
double quadrature_log_marginal(const Dataset& d) {
    const double n = static_cast<double>(d.size());
    const double post_mean = d.sum() / (n + 1.0);
    auto log_f = [&](double mu) {
        double s = -0.5 * mu * mu - 0.5 * std::log(2 * std::numbers::pi);
        for (double x : d.values()) s += -0.5 * (x - mu) * (x - mu) - 0.5 * std::log(2 * std::numbers::pi);
        return s;
    };
    const double shift = log_f(post_mean);
    auto f = [&](double mu) { return std::exp(log_f(mu) - shift); };
    double err = 0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, -10.0, 10.0, 25, 1e-13, &err);
    return shift + std::log(v);
}

// Rouder-style route: delta | g ~ N(0, g), g ~ InvGamma(1/2, gamma^2/2),
// written in h = g / gamma^2.
double jzs_g_prior_log_bf10(double t, int n, double gamma) {
    const double nu = n - 1.0;
    auto f = [=](double h) {
        const double a = 1.0 + n * gamma * gamma * h;
        const double log_v = -0.5 * std::log(a) - 0.5 * (nu + 1.0) * (std::log1p(t * t / (a * nu)) - std::log1p(t * t / nu)) -
                             0.5 * std::log(2 * std::numbers::pi) - 1.5 * std::log(h) - 1.0 / (2.0 * h);
        return std::exp(log_v);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    return std::log(integrator.integrate(f));
}

}  // namespace

TEST_CASE("point-null marginal") {
    CHECK(log_marginal_point_null(Dataset({0.0})) == doctest::Approx(-0.9189385332046727).epsilon(1e-14));
    CHECK(log_marginal_point_null(Dataset({0.0, 0.0})) == doctest::Approx(-std::log(2 * std::numbers::pi)).epsilon(1e-14));
    CHECK_THROWS_AS(log_marginal_point_null(Dataset()), std::domain_error);

    std::mt19937_64 gen(3);
    const Dataset d = random_dataset(gen, 10);
    double direct = 0;
    for (double x : d.values()) direct += log_pdf_normal(x, 0, 1);
    CHECK(log_marginal_point_null(d) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("normal-mean marginal against quadrature") {
    CHECK(log_marginal_normal_mean(Dataset({0.0})) ==
          doctest::Approx(-0.9189385332046727 - 0.5 * std::log(2.0)).epsilon(1e-14));
    CHECK(log_marginal_normal_mean(Dataset(std::vector<double>(4, 0.0))) ==
          doctest::Approx(-2 * std::log(2 * std::numbers::pi) - 0.5 * std::log(5.0)).epsilon(1e-14));
    CHECK(quadrature_log_marginal(Dataset({0.0})) ==
          doctest::Approx(-0.9189385332046727 - 0.5 * std::log(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(log_marginal_normal_mean(Dataset()), std::domain_error);

    std::mt19937_64 gen(17);
    for (int rep = 0; rep < 10; ++rep) {
        const Dataset d = random_dataset(gen, 1 + rep * 5, 0.4 * rep - 1.0);
        CHECK(std::abs(log_marginal_normal_mean(d) - quadrature_log_marginal(d)) < 1e-8);
    }
}

TEST_CASE("closed-form Bayes factor examples") {
    const BfResult one = bf_normal_point_null(Dataset({0.0}), 0.5);
    CHECK(one.bf_null_vs_alt() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(one.posterior_prob_null == doctest::Approx(std::sqrt(2.0) / (1 + std::sqrt(2.0))).epsilon(1e-14));
    CHECK(one.posterior_prob_null == doctest::Approx(0.585786).epsilon(1e-6));

    const BfResult four = bf_normal_point_null(Dataset(std::vector<double>(4, 0.0)), 0.5);
    CHECK(four.bf_null_vs_alt() == doctest::Approx(2.2360679774997896).epsilon(1e-14));

    // mean^2 = (n+1) log(n+1) / n^2 gives BF = 1
    const int n = 9;
    const double mean = std::sqrt((n + 1) * std::log(n + 1.0)) / n;
    const BfResult even = bf_normal_point_null(Dataset(std::vector<double>(n, mean)), 0.5);
    CHECK(std::abs(even.log_bf_null_vs_alt) < 1e-14);
    CHECK(even.posterior_prob_null == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(posterior_prob_from_log_bf(0.0, 0.5) == 0.5);

    CHECK_THROWS_AS(bf_normal_point_null(Dataset({0.0}), 0.0), std::domain_error);
    CHECK_THROWS_AS(bf_normal_point_null(Dataset({0.0}), 1.0), std::domain_error);
    CHECK_THROWS_AS(bf_normal_point_null(Dataset(), 0.5), std::domain_error);
}

TEST_CASE("BfResult invariant and difference of marginals") {
    std::mt19937_64 gen(23);
    std::uniform_real_distribution<double> w(0.01, 0.99);
    for (int rep = 0; rep < 100; ++rep) {
        const Dataset d = random_dataset(gen, 1 + rep % 40, (rep % 5) * 0.3);
        const double wt = w(gen);
        const BfResult r = bf_normal_point_null(d, wt);
        const double bf = std::exp(r.log_bf_null_vs_alt);
        CHECK(std::abs(r.posterior_prob_null - wt * bf / (wt * bf + 1 - wt)) < 1e-12);
        CHECK(r.log_bf_null_vs_alt ==
              doctest::Approx(log_marginal_point_null(d) - log_marginal_normal_mean(d)).epsilon(1e-10));
    }
}

TEST_CASE("Savage-Dickey ratio") {
    const Dataset d({0.0});
    const auto base = PriorRepresentative::standard_normal();
    const auto sd = savage_dickey_normal(d, base);
    REQUIRE(sd.ratio);
    CHECK(*sd.ratio == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    const auto zero = savage_dickey_normal(d, base.with_value_at_null(0.0));
    CHECK(zero.undefined());
    CHECK(zero.diagnostic.find("not well-defined") != std::string::npos);

    const auto doubled = savage_dickey_normal(d, base.with_value_at_null(2.0 * std::exp(log_pdf_normal(0, 0, 1))));
    REQUIRE(doubled.ratio);
    CHECK(*doubled.ratio == doctest::Approx(*sd.ratio / 2.0).epsilon(1e-14));
    CHECK(bf_normal_point_null(d, 0.5).bf_null_vs_alt() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    CHECK_THROWS_AS(savage_dickey_normal(Dataset(), base), std::domain_error);
    CHECK_THROWS_AS(base.with_value_at_null(-1.0), std::domain_error);
}

TEST_CASE("Savage-Dickey identity over random datasets (property)") {
    std::mt19937_64 gen(101);
    std::uniform_int_distribution<int> size(1, 50);
    for (int rep = 0; rep < 100; ++rep) {
        const Dataset d = random_dataset(gen, size(gen), 0.5 * (rep % 3));
        const auto sd = savage_dickey_normal(d, PriorRepresentative::standard_normal());
        const double bf = std::exp(bf_normal_point_null(d, 0.5).log_bf_null_vs_alt);
        CHECK(std::abs(*sd.ratio - bf) <= 1e-10 * std::max(1.0, bf));
    }
}

TEST_CASE("Savage-Dickey through the generic quadrature path") {
    PriorRepresentative generic;
    generic.log_density = [](double mu) { return log_pdf_normal(mu, 0, 1); };
    std::mt19937_64 gen(7);
    for (int rep = 0; rep < 5; ++rep) {
        const Dataset d = random_dataset(gen, 5 + 10 * rep, 0.3);
        const auto sd = savage_dickey_normal(d, generic);
        CHECK(*sd.ratio == doctest::Approx(bf_normal_point_null(d, 0.5).bf_null_vs_alt()).epsilon(1e-8));
    }
    // A Cauchy prior on mu: ratio is still computable, and zeroing the null
    // value still yields the pathology.
    PriorRepresentative cauchy;
    cauchy.log_density = [](double mu) { return log_pdf_cauchy(mu, 0, 1); };
    const Dataset d = random_dataset(gen, 20, 0.2);
    CHECK(savage_dickey_normal(d, cauchy).ratio.has_value());
    CHECK(savage_dickey_normal(d, cauchy.with_value_at_null(0.0)).undefined());
}

TEST_CASE("t-test Bayes factor against frozen high-precision values") {
    // mpmath (30 digits) on the g-prior representation of the same model.
    struct Case {
        double t;
        int n;
        double gamma, log_bf10;
    };
    const Case cases[] = {
        {0, 10, 1, -1.4596124541501218},     {2.5, 30, 1, 0.79843667621942358},
        {2.5, 30, 10, -1.3039116806523801},  {2.5, 30, 100, -3.604039624794166},
        {2.5, 30, 1000, -5.9066000822313974}, {2, 20, 0.5, 0.32925875875377173},
        {2, 20, 1, -0.016992910074100201},   {2, 20, 2, -0.56668921836708041},
        {3, 50, 0.707, 2.0695551475733709},  {1, 15, 1, -1.1741201118297565},
        {-1.5, 8, 2, -0.94005320218278442},
    };
    for (const auto& c : cases) {
        CAPTURE(c.t);
        CAPTURE(c.n);
        CAPTURE(c.gamma);
        CHECK(std::abs(log_bf10_ttest({c.t, c.n, c.gamma}) - c.log_bf10) < 1e-6);
        CHECK(std::abs(jzs_g_prior_log_bf10(c.t, c.n, c.gamma) - c.log_bf10) < 1e-8);
    }
}

TEST_CASE("t-test Bayes factor limits and monotonicity") {
    for (auto [t, n] : {std::pair{0.0, 10}, {2.0, 30}, {3.0, 50}}) {
        CHECK(std::abs(log_bf10_ttest({t, n, 1e-6})) < 1e-3);
    }
    CHECK(log_bf10_ttest({0.0, 10, 1.0}) < 0.0);
    double prev = log_bf10_ttest({2.5, 30, 1.0});
    for (double g : {10.0, 100.0, 1000.0}) {
        const double cur = log_bf10_ttest({2.5, 30, g});
        CHECK(cur < prev);
        prev = cur;
    }
    // symmetric in the sign of t
    CHECK(log_bf10_ttest({-2.1, 12, 0.8}) == doctest::Approx(log_bf10_ttest({2.1, 12, 0.8})).epsilon(1e-9));

    CHECK_THROWS_AS(log_bf10_ttest({1.0, 1, 1.0}), std::domain_error);
    CHECK_THROWS_AS(log_bf10_ttest({1.0, 10, 0.0}), std::domain_error);
    CHECK_THROWS_AS(log_bf10_ttest({NAN, 10, 1.0}), std::domain_error);
}

TEST_CASE("t-test Bayes factor handles large t and n") {
    for (auto [t, n] : {std::pair{8.0, 40}, {15.0, 400}, {-6.0, 1000}}) {
        const double ours = log_bf10_ttest({t, n, 1.0});
        CHECK(std::isfinite(ours));
        CHECK(ours == doctest::Approx(jzs_g_prior_log_bf10(t, n, 1.0)).epsilon(1e-6));
    }
}

TEST_CASE("delta likelihood ratio is one at zero and depends on data only via t") {
    CHECK(log_ttest_delta_ratio(0.0, 1.7, 12) == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    std::mt19937_64 gen(8);
    const Dataset d = random_dataset(gen, 25, 0.4);
    const auto p1 = TTestProblem::from_data(d, 1.0);
    const auto p2 = TTestProblem::from_data(d.scaled(13.5), 1.0);
    CHECK(log_bf10_ttest(p2) == doctest::Approx(log_bf10_ttest(p1)).epsilon(1e-10));
}

TEST_CASE("t-test Bayes factor against a Monte Carlo oracle over (delta, sigma)") {
    // sigma ~ its posterior under the null with pi(sigma) ~ 1/sigma, delta
    // ~ Cauchy(0, gamma); average the likelihood ratio. Scale s = 1.
    auto mc = [](double t, int n, double gamma, int draws, std::uint64_t seed) {
        std::mt19937_64 gen(seed);
        std::gamma_distribution<double> tau(0.5 * n, 2.0 / ((n - 1.0) + t * t));
        std::cauchy_distribution<double> delta(0.0, gamma);
        double sum = 0;
        for (int i = 0; i < draws; ++i) {
            const double d = delta(gen);
            sum += std::exp(-0.5 * n * d * d + std::sqrt(double(n)) * t * d * std::sqrt(tau(gen)));
        }
        return std::log(sum / draws);
    };
    CHECK(mc(2.0, 20, 1.0, 2000000, 1) == doctest::Approx(log_bf10_ttest({2.0, 20, 1.0})).epsilon(0.01).scale(1));
    CHECK(std::exp(mc(0.0, 10, 1.0, 2000000, 2)) < 1.0);
}

TEST_CASE("gamma sweep") {
    const auto single = sweep_gamma(2.0, 20, {1.0});
    REQUIRE(single.size() == 1);
    CHECK(*single[0].log_bf10 == log_bf10_ttest({2.0, 20, 1.0}));

    const auto tiny = sweep_gamma(2.0, 20, {1e-6});
    CHECK(std::abs(*tiny[0].log_bf10) < 1e-3);

    const auto rows = sweep_gamma(2.0, 20, {0.5, 1.0, 2.0});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].gamma == 0.5);
    CHECK(rows[2].gamma == 2.0);
    CHECK(*rows[0].log_bf10 > *rows[1].log_bf10);
    CHECK(*rows[1].log_bf10 > *rows[2].log_bf10);

    CHECK_THROWS_AS(sweep_gamma(2.0, 20, {}), std::domain_error);
    CHECK_THROWS_AS(sweep_gamma(2.0, 20, {1.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(sweep_gamma(2.0, 20, {-1.0}), std::domain_error);
}
