#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "bfmix/stats.hpp"

using namespace bfmix;

TEST_CASE("log_pdf_normal values") {
    CHECK(log_pdf_normal(0, 0, 1) == doctest::Approx(-0.9189385332046727).epsilon(1e-14));
    CHECK(log_pdf_normal(1, 0, 1) == doctest::Approx(-1.4189385332046727).epsilon(1e-14));
    // mpmath at 30 digits
    CHECK(log_pdf_normal(2, 1, 0.7) == doctest::Approx(-1.582671752531246485).epsilon(1e-14));
    CHECK_THROWS_AS(log_pdf_normal(0, 0, 0), std::domain_error);
    CHECK_THROWS_AS(log_pdf_normal(0, 0, -1), std::domain_error);
}

TEST_CASE("log_pdf_cauchy values") {
    CHECK(log_pdf_cauchy(0, 0, 1) == doctest::Approx(-std::log(std::numbers::pi)).epsilon(1e-14));
    CHECK(log_pdf_cauchy(0, 0, 2) == doctest::Approx(-std::log(2 * std::numbers::pi)).epsilon(1e-14));
    CHECK(log_pdf_cauchy(1, 0, 2) == doctest::Approx(-2.061020617723555239).epsilon(1e-14));
    CHECK_THROWS_AS(log_pdf_cauchy(0, 0, 0), std::domain_error);
}

TEST_CASE("log_pdf_beta values and domain") {
    CHECK(log_pdf_beta(0.5, 1, 1) == doctest::Approx(0.0));
    CHECK(log_pdf_beta(0.25, 1, 1) == doctest::Approx(0.0));
    CHECK(log_pdf_beta(0.5, 0.5, 0.5) == doctest::Approx(std::log(2 / std::numbers::pi)).epsilon(1e-13));
    CHECK_THROWS_AS(log_pdf_beta(0.0, 1, 1), std::domain_error);
    CHECK_THROWS_AS(log_pdf_beta(1.0, 1, 1), std::domain_error);
    CHECK_THROWS_AS(log_pdf_beta(1.5, 1, 1), std::domain_error);
    CHECK_THROWS_AS(log_pdf_beta(0.5, 0, 1), std::domain_error);
}

TEST_CASE("log_sum_exp") {
    const std::vector<double> one{3.25};
    CHECK(log_sum_exp(one) == 3.25);
    const std::vector<double> two{0, 0};
    CHECK(log_sum_exp(two) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    const std::vector<double> low{-1000, -1000};
    CHECK(log_sum_exp(low) == doctest::Approx(-1000 + std::log(2.0)).epsilon(1e-15));
    const std::vector<double> high{700, 699};
    CHECK(std::isfinite(log_sum_exp(high)));
    CHECK_THROWS_AS(log_sum_exp(std::vector<double>{}), std::domain_error);

    const double ninf = -std::numeric_limits<double>::infinity();
    CHECK(log_sum_exp(ninf, 2.0) == 2.0);
    CHECK(log_sum_exp(ninf, ninf) == ninf);
    CHECK(log_sum_exp(1.5, -0.25) == log_sum_exp(-0.25, 1.5));
}

TEST_CASE("log_sum_exp shift invariance (property)") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> term(-700, 700), shift(-300, 300);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> t(1 + trial % 7);
        for (double& x : t) x = term(gen) / 2;
        const double c = shift(gen);
        std::vector<double> shifted(t);
        for (double& x : shifted) x += c;
        const double base = log_sum_exp(t);
        CHECK(std::abs((log_sum_exp(shifted) - c) - base) <= 1e-12 * std::max(1.0, std::abs(base)));
    }
}

TEST_CASE("densities are unimodal around their location") {
    for (double loc : {-2.0, 0.0, 1.5}) {
        double prev_n = log_pdf_normal(loc, loc, 0.7), prev_c = log_pdf_cauchy(loc, loc, 2.0);
        for (int k = 1; k <= 200; ++k) {
            const double d = 0.05 * k;
            for (double sign : {-1.0, 1.0}) {
                CHECK(std::isfinite(log_pdf_normal(loc + sign * d, loc, 0.7)));
                CHECK(std::isfinite(log_pdf_cauchy(loc + sign * d, loc, 2.0)));
            }
            const double ln = log_pdf_normal(loc + d, loc, 0.7), lc = log_pdf_cauchy(loc + d, loc, 2.0);
            CHECK(ln < prev_n);
            CHECK(lc < prev_c);
            CHECK(log_pdf_normal(loc - d, loc, 0.7) == doctest::Approx(ln));
            prev_n = ln;
            prev_c = lc;
        }
    }
    // Be(a, a) with a > 1 has its mode at 1/2.
    double prev = log_pdf_beta(0.5, 3, 3);
    for (int k = 1; k < 50; ++k) {
        const double v = log_pdf_beta(0.5 + 0.0099 * k, 3, 3);
        CHECK(std::isfinite(v));
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("suff_stats examples") {
    const std::vector<double> v{1, 2, 3};
    const Dataset d = suff_stats(v);
    CHECK(d.size() == 3);
    CHECK(*d.mean() == 2.0);
    CHECK(d.sum_sq() == 14.0);

    const Dataset empty = suff_stats(std::vector<double>{});
    CHECK(empty.size() == 0);
    CHECK(empty.empty());
    CHECK_FALSE(empty.mean().has_value());
    CHECK(empty.sum_sq() == 0.0);

    const Dataset zeros(std::vector<double>(4, 0.0));
    CHECK(zeros.size() == 4);
    CHECK(*zeros.mean() == 0.0);
    CHECK(zeros.sum_sq() == 0.0);
}

TEST_CASE("suff_stats agree with recomputation from values (property)") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> z(0.3, 2.0);
    for (int n : {1, 2, 10, 100, 500, 2000}) {
        std::vector<double> v(n);
        for (double& x : v) x = z(gen);
        const Dataset d(v);
        // long double reference accumulation
        long double s = 0, ss = 0;
        for (double x : d.values()) {
            s += x;
            ss += static_cast<long double>(x) * x;
        }
        const double tol = 1e-12 * n;
        CHECK(std::abs(*d.mean() - static_cast<double>(s / n)) <= tol);
        CHECK(std::abs(d.sum_sq() - static_cast<double>(ss)) <= tol * std::max(1.0, static_cast<double>(ss)));
        CHECK(std::abs(d.sum() - static_cast<double>(s)) <= tol);
    }
}

TEST_CASE("t statistic and rescaling") {
    const Dataset d(std::vector<double>{1.0, 2.0, 4.0, 0.5});
    // mean 1.875, s^2 = 2.228.. -> t = 1.875 * 2 / s
    const double s2 = ((1 - 1.875) * (1 - 1.875) + (2 - 1.875) * (2 - 1.875) + (4 - 1.875) * (4 - 1.875) +
                       (0.5 - 1.875) * (0.5 - 1.875)) / 3.0;
    CHECK(d.t_statistic() == doctest::Approx(1.875 * 2.0 / std::sqrt(s2)).epsilon(1e-14));
    CHECK(d.scaled(3.7).t_statistic() == doctest::Approx(d.t_statistic()).epsilon(1e-13));
    CHECK_THROWS_AS(Dataset(std::vector<double>{1.0}).t_statistic(), std::domain_error);
    CHECK_THROWS_AS(Dataset(std::vector<double>{2.0, 2.0}).t_statistic(), std::domain_error);
}

TEST_CASE("sigmoid helpers are finite at extreme logits") {
    for (double z : {-800.0, -40.0, -1.0, 0.0, 1.0, 40.0, 800.0}) {
        CHECK(std::isfinite(log_sigmoid(z)));
        CHECK(log_sigmoid(z) <= 0.0);
        CHECK(std::isfinite(log_sigmoid(z) - z));
    }
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(log_sigmoid(-800.0) == doctest::Approx(-800.0));
}
