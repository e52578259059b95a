#include "bfmix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace bfmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double component_mean(const ComponentModel& c, double mu) { return c.fixed_mean.value_or(mu); }

struct LogWeights {
    double log_alpha;
    double log_one_minus;
};

LogWeights weights_from_logit(double z) {
    const double la = log_sigmoid(z);
    return {la, la - z};
}

// Strictly interior representation of sigmoid(z) for storage.
double interior_alpha(double z) {
    const double a = sigmoid(z);
    if (a <= 0.0) return std::numeric_limits<double>::denorm_min();
    if (a >= 1.0) return std::nextafter(1.0, 0.0);
    return a;
}

}  // namespace

MixtureProblem MixtureProblem::normal_mean_vs_point_null(double a0) {
    MixtureProblem p;
    p.f0 = ComponentModel::free_mean();
    p.f1 = ComponentModel::fixed(0.0);
    p.a0 = a0;
    p.validate();
    return p;
}

MixtureProblem MixtureProblem::swapped() const {
    MixtureProblem p = *this;
    std::swap(p.f0, p.f1);
    return p;
}

void MixtureProblem::validate() const {
    if (!(a0 > 0.0) || !std::isfinite(a0)) {
        throw std::domain_error("Beta shape a0 must be positive, got " + std::to_string(a0));
    }
    if (f0.is_free() && f1.is_free()) {
        throw std::domain_error("at most one mixture component may carry the free mean");
    }
}

void MhConfig::validate() const {
    if (iterations < 100) throw std::domain_error("MH needs at least 100 iterations");
    if (burn_in < 0) throw std::domain_error("burn-in must be non-negative");
    if (thin < 1) throw std::domain_error("thinning interval must be at least 1");
    if (step_logit_alpha && !(*step_logit_alpha > 0.0)) {
        throw std::domain_error("logit(alpha) step must be positive");
    }
    if (step_mu && !(*step_mu > 0.0)) throw std::domain_error("mu step must be positive");
    if (pin_alpha && !(*pin_alpha >= 0.0 && *pin_alpha <= 1.0)) {
        throw std::domain_error("pinned alpha must lie in [0,1]");
    }
    if (pin_mu && !std::isfinite(*pin_mu)) throw std::domain_error("pinned mu must be finite");
}

double mixture_log_likelihood(double log_alpha, double log_one_minus_alpha, double mu,
                              std::span<const double> values, const MixtureProblem& problem) {
    const double m0 = component_mean(problem.f0, mu);
    const double m1 = component_mean(problem.f1, mu);
    double total = 0.0;
    for (double x : values) {
        const double d0 = x - m0;
        const double d1 = x - m1;
        total += log_sum_exp(log_alpha - 0.5 * d0 * d0, log_one_minus_alpha - 0.5 * d1 * d1);
    }
    return total - static_cast<double>(values.size()) * kLogSqrt2Pi;
}

double log_posterior_unnorm(double alpha, double mu, const Dataset& data,
                            const MixtureProblem& problem) {
    problem.validate();
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("alpha must lie strictly inside (0,1), got " + std::to_string(alpha));
    }
    double lp = log_pdf_beta(alpha, problem.a0, problem.a0);
    if (problem.has_free_mean()) lp += log_pdf_normal(mu, 0.0, 1.0);
    return lp + mixture_log_likelihood(std::log(alpha), std::log1p(-alpha), mu, data.values(), problem);
}

namespace {

// Per-observation cache for the sampler: with
// l_k(x) = -(x - m_k)^2 / 2, the log likelihood is
// sum_i l1_i + sum_i log((1 - alpha) + alpha exp(l0_i - l1_i)).
class CachedLikelihood {
public:
    CachedLikelihood(std::span<const double> values, const MixtureProblem& problem)
        : values_(values), problem_(problem), ratio_(values.size()), log_ratio_(values.size()) {}

    void set_mu(double mu) { fill(mu, base_, ratio_, log_ratio_); }

    // Evaluates at mu without changing the cache; commit() adopts it.
    double try_mu(double mu, const LogWeights& w) {
        fill(mu, trial_base_, trial_ratio_, trial_log_ratio_);
        return eval(w, trial_base_, trial_ratio_, trial_log_ratio_);
    }
    void commit() {
        std::swap(base_, trial_base_);
        ratio_.swap(trial_ratio_);
        log_ratio_.swap(trial_log_ratio_);
    }
    double at(const LogWeights& w) const { return eval(w, base_, ratio_, log_ratio_); }

private:
    static constexpr double kDirectLimit = 600.0;

    void fill(double mu, double& base, std::vector<double>& ratio, std::vector<double>& log_ratio) const {
        const double m0 = component_mean(problem_.f0, mu);
        const double m1 = component_mean(problem_.f1, mu);
        ratio.resize(values_.size());
        log_ratio.resize(values_.size());
        CompensatedSum b;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const double d0 = values_[i] - m0, d1 = values_[i] - m1;
            const double l1 = -0.5 * d1 * d1;
            const double d = -0.5 * d0 * d0 - l1;
            b += l1;
            log_ratio[i] = d;
            ratio[i] = d < kDirectLimit ? std::exp(d) : 0.0;
        }
        base = b.value() - static_cast<double>(values_.size()) * kLogSqrt2Pi;
    }

    static double eval(const LogWeights& w, double base, const std::vector<double>& ratio,
                       const std::vector<double>& log_ratio) {
        const double alpha = std::exp(w.log_alpha), beta = std::exp(w.log_one_minus);
        double total = base;
        for (std::size_t i = 0; i < ratio.size(); ++i) {
            const double v = beta + alpha * ratio[i];
            if (log_ratio[i] < kDirectLimit && v > 1e-300) {
                total += std::log(v);
            } else {
                total += log_sum_exp(w.log_alpha + log_ratio[i], w.log_one_minus);
            }
        }
        return total;
    }

    std::span<const double> values_;
    const MixtureProblem& problem_;
    double base_ = 0.0, trial_base_ = 0.0;
    std::vector<double> ratio_, log_ratio_, trial_ratio_, trial_log_ratio_;
};

}  // namespace

Chain run_mh(const Dataset& data, const MixtureProblem& problem, const MhConfig& config) {
    problem.validate();
    config.validate();

    const auto values = data.values();
    const double n = static_cast<double>(values.size());
    const bool sample_alpha = !config.pin_alpha.has_value();
    const bool sample_mu = problem.has_free_mean() && !config.pin_mu.has_value();
    const double a0 = problem.a0;

    double step_alpha = config.step_logit_alpha.value_or(0.8);
    double step_mu = config.step_mu.value_or(2.4 / std::sqrt(n + 1.0));
    RandomStream rng = config.stream;

    // alpha lives on the logit scale; its target there includes the
    // Jacobian alpha (1 - alpha), which turns the Be(a0, a0) density into
    // a0 * (log alpha + log(1 - alpha)).
    double z = 0.0;
    LogWeights w{std::log(0.5), std::log(0.5)};
    if (config.pin_alpha) {
        w = {std::log(*config.pin_alpha), std::log1p(-*config.pin_alpha)};
    }
    double mu = config.pin_mu.value_or(data.mean().value_or(0.0));

    auto alpha_term = [&](const LogWeights& lw) {
        return sample_alpha ? a0 * (lw.log_alpha + lw.log_one_minus) : 0.0;
    };
    auto mu_term = [&](double m) { return sample_mu ? -0.5 * m * m : 0.0; };

    double loglik = mixture_log_likelihood(w.log_alpha, w.log_one_minus, mu, values, problem);
    if (!std::isfinite(loglik + alpha_term(w) + mu_term(mu))) {
        throw InitializationError("log posterior is not finite at the initial state");
    }
    CachedLikelihood cache(values, problem);
    cache.set_mu(mu);

    Chain chain;
    chain.draws_alpha.reserve(static_cast<std::size_t>(config.iterations));
    chain.draws_mu.reserve(static_cast<std::size_t>(config.iterations));

    constexpr int kBatch = 50;
    constexpr double kTargetRate = 0.3;
    int batch_accept_alpha = 0, batch_accept_mu = 0, batch_count = 0, batches = 0;
    long kept_accept_alpha = 0, kept_accept_mu = 0;

    auto sweep = [&](bool& acc_alpha, bool& acc_mu) {
        acc_alpha = acc_mu = false;
        if (sample_alpha) {
            const double z_new = z + step_alpha * rng.normal();
            const LogWeights w_new = weights_from_logit(z_new);
            const double ll_new = cache.at(w_new);
            const double delta = (ll_new + alpha_term(w_new)) - (loglik + alpha_term(w));
            if (std::log(rng.uniform()) < delta) {
                z = z_new;
                w = w_new;
                loglik = ll_new;
                acc_alpha = true;
            }
        }
        if (sample_mu) {
            const double mu_new = mu + step_mu * rng.normal();
            const double ll_new = cache.try_mu(mu_new, w);
            const double delta = (ll_new + mu_term(mu_new)) - (loglik + mu_term(mu));
            if (std::log(rng.uniform()) < delta) {
                mu = mu_new;
                loglik = ll_new;
                cache.commit();
                acc_mu = true;
            }
        }
    };

    bool acc_alpha = false, acc_mu = false;
    for (int it = 0; it < config.burn_in; ++it) {
        sweep(acc_alpha, acc_mu);
        if (!config.adapt) continue;
        batch_accept_alpha += acc_alpha;
        batch_accept_mu += acc_mu;
        if (++batch_count == kBatch) {
            ++batches;
            const double gain = std::min(1.0, 2.0 / std::sqrt(static_cast<double>(batches)));
            step_alpha *= std::exp(gain * (batch_accept_alpha / double(kBatch) - kTargetRate));
            step_mu *= std::exp(gain * (batch_accept_mu / double(kBatch) - kTargetRate));
            batch_accept_alpha = batch_accept_mu = batch_count = 0;
        }
    }
    for (int it = 0; it < config.iterations; ++it) {
        for (int k = 0; k < config.thin; ++k) {
            sweep(acc_alpha, acc_mu);
            kept_accept_alpha += acc_alpha;
            kept_accept_mu += acc_mu;
        }
        chain.draws_alpha.push_back(config.pin_alpha ? *config.pin_alpha : interior_alpha(z));
        chain.draws_mu.push_back(mu);
    }

    const double kept = static_cast<double>(config.iterations) * config.thin;
    chain.accept_rate_alpha = sample_alpha ? kept_accept_alpha / kept : 0.0;
    chain.accept_rate_mu = sample_mu ? kept_accept_mu / kept : 0.0;
    chain.final_step_logit_alpha = step_alpha;
    chain.final_step_mu = step_mu;
    return chain;
}

double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::domain_error("quantile of an empty sample");
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double effective_sample_size(std::span<const double> draws) {
    const std::size_t len = draws.size();
    if (len < 2) return static_cast<double>(len);
    CompensatedSum s;
    for (double x : draws) s += x;
    const double mean = s.value() / static_cast<double>(len);

    auto autocov = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t i = 0; i + lag < len; ++i) acc += (draws[i] - mean) * (draws[i + lag] - mean);
        return acc / static_cast<double>(len);
    };
    const double c0 = autocov(0);
    if (!(c0 > 0.0)) return static_cast<double>(len);

    // tau = -1 + 2 * sum of paired autocorrelations, truncated at the first
    // non-positive pair.
    double tau = -1.0;
    for (std::size_t m = 0; 2 * m + 1 < len; ++m) {
        const double pair = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
        if (!(pair > 0.0)) break;
        tau += 2.0 * pair;
    }
    const double ess = static_cast<double>(len) / std::max(tau, 1e-12);
    return std::min(ess, static_cast<double>(len));
}

PosteriorSummary summarize(const Chain& chain) {
    const auto& a = chain.draws_alpha;
    if (a.size() < 100) throw std::domain_error("summaries need a chain of at least 100 draws");
    std::vector<double> sorted(a);
    std::sort(sorted.begin(), sorted.end());
    CompensatedSum s;
    for (double x : a) s += x;
    PosteriorSummary out;
    out.mean_alpha = s.value() / static_cast<double>(a.size());
    out.median_alpha = sorted_quantile(sorted, 0.5);
    out.q05_alpha = sorted_quantile(sorted, 0.05);
    out.q95_alpha = sorted_quantile(sorted, 0.95);
    out.ess_alpha = effective_sample_size(a);
    return out;
}

PosteriorSummary posterior_grid(const Dataset& data, const MixtureProblem& problem, int resolution) {
    problem.validate();
    if (resolution < 200) throw std::domain_error("grid resolution must be at least 200");
    const double a0 = problem.a0;
    const auto values = data.values();

    // Each half of (0,1) is mapped from s in [0,1]: alpha = s^(1/a0) / 2 on
    // the left and 1 - s^(1/a0) / 2 on the right. The Jacobian absorbs the
    // Beta singularity at the near endpoint, leaving (far weight)^(a0-1).
    const int half_cells = (resolution + 1) / 2;
    const double hs = 1.0 / half_cells;
    struct Node {
        double alpha, log_alpha, log_one_minus, log_factor;
    };
    std::vector<Node> left, right;
    for (int k = 0; k <= half_cells; ++k) {
        const double s = k * hs;
        const double near = 0.5 * std::pow(s, 1.0 / a0);
        const double log_near = k == 0 ? kNegInf : std::log(0.5) + std::log(s) / a0;
        const double log_far = std::log1p(-near);
        left.push_back({near, log_near, log_far, (a0 - 1.0) * log_far});
        right.push_back({1.0 - near, log_far, log_near, (a0 - 1.0) * log_far});
    }

    std::vector<double> mus;
    const bool free_mu = problem.has_free_mean();
    if (free_mu) {
        const double hm = 16.0 / resolution;
        for (int j = 0; j <= resolution; ++j) mus.push_back(-8.0 + j * hm);
    } else {
        mus.push_back(0.0);
    }

    // log integrand over (s, mu), then marginalise mu with trapezoid weights.
    auto log_joint = [&](const Node& node, double mu) {
        double lp = node.log_factor + mixture_log_likelihood(node.log_alpha, node.log_one_minus, mu, values, problem);
        if (free_mu) lp += -0.5 * mu * mu;
        return lp;
    };
    const std::size_t ns = left.size();
    std::vector<double> log_left(ns * mus.size()), log_right(ns * mus.size());
    double shift = kNegInf;
    for (std::size_t k = 0; k < ns; ++k) {
        for (std::size_t j = 0; j < mus.size(); ++j) {
            log_left[k * mus.size() + j] = log_joint(left[k], mus[j]);
            log_right[k * mus.size() + j] = log_joint(right[k], mus[j]);
            shift = std::max({shift, log_left[k * mus.size() + j], log_right[k * mus.size() + j]});
        }
    }
    auto mu_weight = [&](std::size_t j) {
        if (!free_mu) return 1.0;
        return (j == 0 || j + 1 == mus.size()) ? 0.5 : 1.0;
    };
    std::vector<double> g_left(ns), g_right(ns);
    for (std::size_t k = 0; k < ns; ++k) {
        CompensatedSum gl, gr;
        for (std::size_t j = 0; j < mus.size(); ++j) {
            gl += mu_weight(j) * std::exp(log_left[k * mus.size() + j] - shift);
            gr += mu_weight(j) * std::exp(log_right[k * mus.size() + j] - shift);
        }
        g_left[k] = gl.value();
        g_right[k] = gr.value();
    }

    auto s_weight = [&](std::size_t k) { return (k == 0 || k + 1 == ns) ? 0.5 * hs : hs; };
    CompensatedSum mass, first;
    for (std::size_t k = 0; k < ns; ++k) {
        mass += s_weight(k) * (g_left[k] + g_right[k]);
        first += s_weight(k) * (g_left[k] * left[k].alpha + g_right[k] * right[k].alpha);
    }
    const double total = mass.value();

    // CDF over alpha in increasing order: left half with s ascending, then
    // the right half with s descending. Quantiles interpolate linearly in s.
    struct CdfPoint {
        double cdf, s;
        bool on_left;
    };
    std::vector<CdfPoint> cdf;
    double acc = 0.0;
    cdf.push_back({0.0, 0.0, true});
    for (std::size_t k = 1; k < ns; ++k) {
        acc += 0.5 * hs * (g_left[k - 1] + g_left[k]) / total;
        cdf.push_back({acc, k * hs, true});
    }
    for (std::size_t k = ns - 1; k-- > 0;) {
        acc += 0.5 * hs * (g_right[k + 1] + g_right[k]) / total;
        cdf.push_back({acc, k * hs, false});
    }
    auto to_alpha = [a0](double s, bool on_left) {
        const double near = 0.5 * std::pow(s, 1.0 / a0);
        return on_left ? near : 1.0 - near;
    };
    auto quantile = [&](double p) {
        for (std::size_t i = 1; i < cdf.size(); ++i) {
            if (cdf[i].cdf >= p) {
                const CdfPoint& lo = cdf[i - 1];
                const CdfPoint& hi = cdf[i];
                const double span = hi.cdf - lo.cdf;
                const double frac = span > 0.0 ? (p - lo.cdf) / span : 0.0;
                // Both points of the crossing segment lie in one half except
                // at the junction alpha = 1/2, where s = 1 on both sides.
                const bool side = hi.on_left;
                const double s_lo = lo.on_left == side ? lo.s : 1.0;
                return to_alpha(s_lo + frac * (hi.s - s_lo), side);
            }
        }
        return to_alpha(0.0, false);
    };

    PosteriorSummary out;
    out.mean_alpha = first.value() / total;
    out.median_alpha = quantile(0.5);
    out.q05_alpha = quantile(0.05);
    out.q95_alpha = quantile(0.95);
    return out;
}

}  // namespace bfmix
