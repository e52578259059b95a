#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bfmix/stats.hpp"

namespace bfmix {

/// Log Bayes factor of the null against the alternative together with the
/// posterior probability of the null under prior weight `prior_weight_null`.
struct BfResult {
    double log_bf_null_vs_alt = 0.0;
    double prior_weight_null = 0.5;
    double posterior_prob_null = 0.5;

    double bf_null_vs_alt() const;
    double posterior_prob_alt() const { return 1.0 - posterior_prob_null; }
};

/// P(null | x) = w BF / (w BF + 1 - w), evaluated on the log-odds scale.
double posterior_prob_from_log_bf(double log_bf_null_vs_alt, double prior_weight_null);

/// Marginal likelihood of x_i ~ N(0, 1).
double log_marginal_point_null(const Dataset& data);

/// Marginal likelihood of x_i ~ N(mu, 1) with mu ~ N(0, 1).
double log_marginal_normal_mean(const Dataset& data);

/// N(0,1) against N(mu,1), mu ~ N(0,1).
BfResult bf_normal_point_null(const Dataset& data, double prior_weight_null);

/// Prior on the mean used by the Savage-Dickey ratio. The density value at
/// the tested point 0 may be overridden: the prior is unchanged as a measure,
/// but the ratio sees the overriding value.
struct PriorRepresentative {
    std::function<double(double)> log_density;
    std::optional<double> value_at_null;
    /// Set by `standard_normal()`; enables the conjugate closed form.
    bool is_standard_normal = false;

    static PriorRepresentative standard_normal();
    PriorRepresentative with_value_at_null(double value) const;
    /// Density value the ratio divides by.
    double density_at_null() const;
};

struct SavageDickeyResult {
    std::optional<double> ratio;
    double posterior_density_at_null = 0.0;
    double prior_density_at_null = 0.0;
    std::string diagnostic;

    bool undefined() const noexcept { return !ratio.has_value(); }
};

/// Posterior density of mu at 0 over the prior density at 0.
///
/// With a zero prior value at the null the ratio diverges and the result is
/// flagged undefined instead of returning a number.
SavageDickeyResult savage_dickey_normal(const Dataset& data, const PriorRepresentative& prior);

/// One-sample t-test with sigma integrated out under pi(sigma) ~ 1/sigma
/// and a Cauchy(0, gamma) prior on the effect size delta = mu / sigma.
struct TTestProblem {
    double t = 0.0;
    int n = 2;
    double gamma = 1.0;

    static TTestProblem from_data(const Dataset& data, double gamma);
};

/// log BF(alternative vs null) by adaptive quadrature over delta.
///
/// Throws NumericalError when the quadrature cannot certify a log-error
/// below 1e-6, std::domain_error for invalid problems.
double log_bf10_ttest(const TTestProblem& problem);

/// Likelihood ratio m(x | delta) / m(x | delta = 0) with sigma integrated
/// out; a function of (t, n) only.
double log_ttest_delta_ratio(double delta, double t, int n);

struct GammaSweepRow {
    double gamma = 0.0;
    std::optional<double> log_bf10;
    std::string error;
};

/// log BF10 for each gamma in input order. Rows whose quadrature fails
/// carry the error message and no value.
std::vector<GammaSweepRow> sweep_gamma(double t, int n, const std::vector<double>& gammas);

}  // namespace bfmix
