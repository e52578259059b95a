#include "bfmix/bayes_factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "bfmix/quadrature.hpp"

namespace bfmix {

namespace {

void require_nonempty(const Dataset& data, const char* what) {
    if (data.empty()) throw std::domain_error(std::string(what) + " needs at least one observation");
}

void require_weight(double w) {
    if (!(w > 0.0 && w < 1.0)) {
        throw std::domain_error("prior weight of the null must lie in (0,1), got " + std::to_string(w));
    }
}

// log of K(c) = int_0^inf v^(n-1) exp(-(v - c)^2 / 2) dv, integrated in the
// offset y = v - v* from the mode so that large |c| loses no precision.
double log_shifted_moment(double c, int n) {
    const double k = static_cast<double>(n - 1);
    const double disc = std::sqrt(c * c + 4.0 * k);
    const double mode = c >= 0.0 ? 0.5 * (c + disc) : 2.0 * k / (disc - c);
    const double gap = mode - c;  // (n-1) / mode, always positive
    const double width = 1.0 / std::sqrt(k / (mode * mode) + 1.0);
    const double lo = std::max(-mode, -40.0 * width);
    const double hi = 40.0 * width;

    auto integrand = [&](double y) {
        if (y <= -mode) return 0.0;
        return std::exp(k * std::log1p(y / mode) - 0.5 * y * y - y * gap);
    };
    const double pts[] = {lo, -width, 0.0, width, hi};
    std::vector<double> breaks;
    for (double p : pts) {
        if (p >= lo && p <= hi && (breaks.empty() || p > breaks.back())) breaks.push_back(p);
    }
    QuadratureOptions opt;
    opt.rel_tol = 1e-12;
    const QuadratureResult r = integrate_gk15(integrand, breaks, opt);
    if (!r.converged || !(r.value > 0.0)) {
        throw NumericalError("inner sigma integral did not converge", r.error);
    }
    return k * std::log(mode) - 0.5 * gap * gap + std::log(r.value);
}

struct RatioTerms {
    int n;
    double nu, b, curvature, log_k0;

    RatioTerms(double t, int n_obs) : n(n_obs) {
        const double nn = static_cast<double>(n);
        nu = nn - 1.0;
        b = std::sqrt(nn) * t / std::sqrt(nu + t * t);
        curvature = nn * nu / (nu + t * t);  // n - b^2, computed without cancellation
        log_k0 = log_shifted_moment(0.0, n);
    }

    double operator()(double delta) const {
        const double c = b * delta;
        const double quad = 0.5 * curvature * delta * delta;
        if (quad > 2.0 * nu * std::log1p(std::abs(c)) + 2000.0) {
            return -std::numeric_limits<double>::infinity();
        }
        return -quad + log_shifted_moment(c, n) - log_k0;
    }
};

void validate(const TTestProblem& p) {
    if (p.n < 2) throw std::domain_error("t-test Bayes factor needs n >= 2");
    if (!std::isfinite(p.t)) throw std::domain_error("t statistic must be finite");
    if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) {
        throw std::domain_error("Cauchy scale gamma must be positive and finite");
    }
}

}  // namespace

double BfResult::bf_null_vs_alt() const { return std::exp(log_bf_null_vs_alt); }

double posterior_prob_from_log_bf(double log_bf_null_vs_alt, double prior_weight_null) {
    require_weight(prior_weight_null);
    const double log_odds =
        log_bf_null_vs_alt + std::log(prior_weight_null) - std::log1p(-prior_weight_null);
    return sigmoid(log_odds);
}

double log_marginal_point_null(const Dataset& data) {
    require_nonempty(data, "point-null marginal");
    const double n = static_cast<double>(data.size());
    return -n * kLogSqrt2Pi - 0.5 * data.sum_sq();
}

double log_marginal_normal_mean(const Dataset& data) {
    require_nonempty(data, "normal-mean marginal");
    const double n = static_cast<double>(data.size());
    const double s = data.sum();  // n * mean
    return -n * kLogSqrt2Pi - 0.5 * std::log(n + 1.0) - 0.5 * (data.sum_sq() - s * s / (n + 1.0));
}

BfResult bf_normal_point_null(const Dataset& data, double prior_weight_null) {
    require_nonempty(data, "normal point-null Bayes factor");
    require_weight(prior_weight_null);
    const double n = static_cast<double>(data.size());
    const double s = data.sum();
    BfResult r;
    // log m0 - log m1 with the shared terms cancelled.
    r.log_bf_null_vs_alt = 0.5 * std::log(n + 1.0) - 0.5 * s * s / (n + 1.0);
    r.prior_weight_null = prior_weight_null;
    r.posterior_prob_null = posterior_prob_from_log_bf(r.log_bf_null_vs_alt, prior_weight_null);
    return r;
}

PriorRepresentative PriorRepresentative::standard_normal() {
    PriorRepresentative p;
    p.log_density = [](double mu) { return log_pdf_normal(mu, 0.0, 1.0); };
    p.is_standard_normal = true;
    return p;
}

PriorRepresentative PriorRepresentative::with_value_at_null(double value) const {
    if (!(value >= 0.0)) throw std::domain_error("prior density value at the null must be >= 0");
    PriorRepresentative p = *this;
    p.value_at_null = value;
    return p;
}

double PriorRepresentative::density_at_null() const {
    if (value_at_null) return *value_at_null;
    return std::exp(log_density(0.0));
}

SavageDickeyResult savage_dickey_normal(const Dataset& data, const PriorRepresentative& prior) {
    require_nonempty(data, "Savage-Dickey ratio");
    if (!prior.log_density) throw std::invalid_argument("Savage-Dickey prior has no density");
    if (prior.value_at_null && !(*prior.value_at_null >= 0.0)) {
        throw std::domain_error("prior density value at the null must be >= 0");
    }
    const double n = static_cast<double>(data.size());
    const double s = data.sum();

    // Posterior density of mu at 0. It never depends on the override: a
    // single point carries no prior mass.
    double log_post_at_null;
    if (prior.is_standard_normal) {
        log_post_at_null = 0.5 * std::log(n + 1.0) - kLogSqrt2Pi - 0.5 * s * s / (n + 1.0);
    } else {
        const double xbar = s / n;
        const double scale = 1.0 / std::sqrt(n);
        auto log_kernel = [&](double mu) {
            return -0.5 * n * (mu - xbar) * (mu - xbar) + prior.log_density(mu);
        };
        const double shift = std::max(log_kernel(xbar), log_kernel(0.0));
        auto integrand = [&](double u) {
            const double a = 0.5 * std::numbers::pi * u;
            const double c = std::cos(a);
            if (c <= 0.0) return 0.0;
            const double mu = xbar + scale * std::tan(a);
            const double jac = 0.5 * std::numbers::pi * scale / (c * c);
            const double v = std::exp(log_kernel(mu) - shift) * jac;
            return std::isfinite(v) ? v : 0.0;
        };
        std::vector<double> breaks{-1.0, 1.0};
        for (double centre : {xbar, 0.0}) {
            for (double k : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
                for (double sign : {-1.0, 1.0}) {
                    const double mu = centre + sign * k * scale;
                    breaks.push_back(2.0 / std::numbers::pi * std::atan((mu - xbar) / scale));
                }
            }
        }
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
        QuadratureOptions opt;
        opt.rel_tol = 1e-12;
        const QuadratureResult r = integrate_gk15(integrand, breaks, opt);
        if (!r.converged) throw NumericalError("posterior normalising integral did not converge", r.error);
        log_post_at_null = log_kernel(0.0) - shift - std::log(r.value);
    }

    SavageDickeyResult out;
    out.posterior_density_at_null = std::exp(log_post_at_null);
    out.prior_density_at_null = prior.density_at_null();
    if (out.prior_density_at_null == 0.0) {
        out.diagnostic =
            "ratio diverges; Savage-Dickey value not well-defined (prior density at the null is 0, "
            "a pointwise-updated posterior would give 0 instead)";
        return out;
    }
    if (prior.value_at_null) {
        out.ratio = std::exp(log_post_at_null - std::log(out.prior_density_at_null));
    } else {
        out.ratio = std::exp(log_post_at_null - prior.log_density(0.0));
    }
    return out;
}

TTestProblem TTestProblem::from_data(const Dataset& data, double gamma) {
    TTestProblem p;
    p.t = data.t_statistic();
    p.n = static_cast<int>(data.size());
    p.gamma = gamma;
    return p;
}

double log_ttest_delta_ratio(double delta, double t, int n) {
    validate({t, n, 1.0});
    return RatioTerms(t, n)(delta);
}

double log_bf10_ttest(const TTestProblem& problem) {
    validate(problem);
    const double gamma = problem.gamma;
    const RatioTerms log_ratio(problem.t, problem.n);

    // delta = gamma * tan(pi u / 2) maps the Cauchy prior onto the uniform
    // density 1/2 on (-1, 1).
    auto to_u = [gamma](double delta) { return 2.0 / std::numbers::pi * std::atan(delta / gamma); };
    const double h = 1.0 / std::sqrt(static_cast<double>(problem.n));
    const double peak = log_ratio.b / log_ratio.curvature;  // maximiser of the Gaussian part of the ratio
    std::vector<double> breaks{-1.0, 1.0};
    for (double centre : {0.0, peak}) {
        breaks.push_back(to_u(centre));
        for (double k : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) {
            breaks.push_back(to_u(centre - k * h));
            breaks.push_back(to_u(centre + k * h));
        }
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [](double x, double y) { return std::abs(x - y) < 1e-15; }),
                 breaks.end());
    breaks.front() = -1.0;
    breaks.back() = 1.0;

    double shift = 0.0;
    for (double u : breaks) {
        if (std::abs(u) < 1.0) shift = std::max(shift, log_ratio(gamma * std::tan(0.5 * std::numbers::pi * u)));
    }
    shift = std::max(shift, log_ratio(peak));

    auto integrand = [&](double u) {
        const double delta = gamma * std::tan(0.5 * std::numbers::pi * u);
        return 0.5 * std::exp(log_ratio(delta) - shift);
    };
    QuadratureOptions opt;
    opt.rel_tol = 1e-9;
    const QuadratureResult r = integrate_gk15(integrand, breaks, opt);
    const double log_error = r.value > 0.0 ? r.error / r.value : std::numeric_limits<double>::infinity();
    if (!(log_error < 1e-6)) {
        throw NumericalError("t-test Bayes factor quadrature did not reach log-error 1e-6", log_error);
    }
    return shift + std::log(r.value);
}

std::vector<GammaSweepRow> sweep_gamma(double t, int n, const std::vector<double>& gammas) {
    if (gammas.empty()) throw std::domain_error("gamma sweep needs at least one gamma");
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (!(gammas[i] > 0.0)) throw std::domain_error("gamma values must be positive");
        if (i > 0 && !(gammas[i] > gammas[i - 1])) {
            throw std::domain_error("gamma values must be strictly increasing");
        }
    }
    std::vector<GammaSweepRow> rows;
    rows.reserve(gammas.size());
    for (double g : gammas) {
        GammaSweepRow row;
        row.gamma = g;
        try {
            row.log_bf10 = log_bf10_ttest({t, n, g});
        } catch (const NumericalError& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace bfmix
