#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bfmix/random.hpp"
#include "bfmix/stats.hpp"

namespace bfmix {

/// Unit-variance normal component. Either the mean is fixed, or it is free
/// with a N(0, 1) prior.
struct ComponentModel {
    std::optional<double> fixed_mean;

    static ComponentModel free_mean() { return {}; }
    static ComponentModel fixed(double mean) { return {mean}; }
    bool is_free() const noexcept { return !fixed_mean.has_value(); }
};

/// Encompassing model x ~ alpha f0 + (1 - alpha) f1 with alpha ~ Be(a0, a0).
/// At most one component carries the free mean mu.
struct MixtureProblem {
    ComponentModel f0 = ComponentModel::free_mean();
    ComponentModel f1 = ComponentModel::fixed(0.0);
    double a0 = 1.0;

    /// N(mu, 1) against N(0, 1): the configuration the closed forms cover.
    static MixtureProblem normal_mean_vs_point_null(double a0);
    /// Same problem with the labels exchanged.
    MixtureProblem swapped() const;
    bool has_free_mean() const noexcept { return f0.is_free() || f1.is_free(); }
    /// Throws std::domain_error when a0 <= 0 or both components are free.
    void validate() const;
};

/// Thrown when the sampler cannot start from a finite log posterior.
class InitializationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MhConfig {
    int iterations = 10000;
    /// Warm-up sweeps, discarded.
    int burn_in = 2000;
    /// Alternating sweeps per retained draw.
    int thin = 5;
    /// Random-walk scale on logit(alpha); 0.8 when unset.
    std::optional<double> step_logit_alpha;
    /// Random-walk scale on mu; 2.4 / sqrt(n + 1) when unset.
    std::optional<double> step_mu;
    /// Tune both scales toward 30% acceptance during burn-in, then freeze.
    bool adapt = true;
    RandomStream stream{0, 0};
    /// Hold alpha (may be 0 or 1) or mu fixed instead of sampling it.
    std::optional<double> pin_alpha;
    std::optional<double> pin_mu;

    void validate() const;
};

struct Chain {
    std::vector<double> draws_alpha;
    std::vector<double> draws_mu;
    double accept_rate_alpha = 0.0;
    double accept_rate_mu = 0.0;
    double final_step_logit_alpha = 0.0;
    double final_step_mu = 0.0;
};

struct PosteriorSummary {
    double mean_alpha = 0.0;
    double median_alpha = 0.0;
    double q05_alpha = 0.0;
    double q95_alpha = 0.0;
    /// Absent for quadrature-based summaries.
    std::optional<double> ess_alpha;
};

/// log Be(alpha; a0, a0) + log prior(mu) + sum_i log[alpha f0(x_i) + (1 - alpha) f1(x_i)].
/// Throws std::domain_error unless 0 < alpha < 1.
double log_posterior_unnorm(double alpha, double mu, const Dataset& data,
                            const MixtureProblem& problem);

/// Mixture log likelihood given log(alpha) and log(1 - alpha); either may be -inf.
double mixture_log_likelihood(double log_alpha, double log_one_minus_alpha, double mu,
                              std::span<const double> values, const MixtureProblem& problem);

/// Component-wise random-walk Metropolis-Hastings on (logit alpha, mu),
/// started at alpha = 1/2 and mu = sample mean. Returns exactly
/// `config.iterations` draws, one every `config.thin` sweeps, kept after
/// `config.burn_in` warm-up sweeps.
Chain run_mh(const Dataset& data, const MixtureProblem& problem, const MhConfig& config);

/// Summary of draws_alpha. Throws std::domain_error for chains shorter than 100.
PosteriorSummary summarize(const Chain& chain);

/// Effective sample size by Geyer's initial positive sequence.
double effective_sample_size(std::span<const double> draws);

/// Linear-interpolation sample quantile of sorted values.
double sorted_quantile(std::span<const double> sorted, double p);

/// Reference posterior of alpha by tensor-grid trapezoid quadrature over
/// (alpha, mu) in (0,1) x [-8, 8]. `resolution` cells per axis, >= 200.
PosteriorSummary posterior_grid(const Dataset& data, const MixtureProblem& problem,
                                int resolution);

}  // namespace bfmix
