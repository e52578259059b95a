#include "bfmix/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bfmix {

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        correction_ += (sum_ - t) + x;
    } else {
        correction_ += (x - t) + sum_;
    }
    sum_ = t;
}

Dataset::Dataset(std::vector<double> values) : values_(std::move(values)) {
    CompensatedSum s, ss;
    for (double x : values_) {
        s += x;
        ss += x * x;
    }
    sum_ = s.value();
    sum_sq_ = ss.value();
    if (!values_.empty()) {
        const double m = sum_ / static_cast<double>(values_.size());
        CompensatedSum c;
        for (double x : values_) c += (x - m) * (x - m);
        centered_ss_ = c.value();
    }
}

std::optional<double> Dataset::mean() const noexcept {
    if (values_.empty()) return std::nullopt;
    return sum_ / static_cast<double>(values_.size());
}

double Dataset::t_statistic() const {
    if (values_.size() < 2) {
        throw std::domain_error("t statistic needs at least two observations");
    }
    const double n = static_cast<double>(values_.size());
    const double s2 = centered_ss_ / (n - 1.0);
    if (!(s2 > 0.0)) {
        throw std::domain_error("t statistic undefined for a constant sample");
    }
    return std::sqrt(n) * (sum_ / n) / std::sqrt(s2);
}

Dataset Dataset::scaled(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return Dataset(std::move(v));
}

Dataset suff_stats(std::span<const double> values) {
    return Dataset(std::vector<double>(values.begin(), values.end()));
}

double log_pdf_normal(double x, double mu, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::domain_error("normal density needs sigma > 0, got " + std::to_string(sigma));
    }
    const double z = (x - mu) / sigma;
    return -kLogSqrt2Pi - std::log(sigma) - 0.5 * z * z;
}

double log_pdf_cauchy(double x, double loc, double scale) {
    if (!(scale > 0.0)) {
        throw std::domain_error("Cauchy density needs scale > 0, got " + std::to_string(scale));
    }
    const double z = (x - loc) / scale;
    return -kLogPi - std::log(scale) - std::log1p(z * z);
}

double log_pdf_beta(double a, double a0, double b0) {
    if (!(a0 > 0.0) || !(b0 > 0.0)) {
        throw std::domain_error("Beta density needs positive shapes");
    }
    if (!(a > 0.0 && a < 1.0)) {
        throw std::domain_error("Beta density argument must lie in (0,1), got " + std::to_string(a));
    }
    const double log_norm = std::lgamma(a0 + b0) - std::lgamma(a0) - std::lgamma(b0);
    return log_norm + (a0 - 1.0) * std::log(a) + (b0 - 1.0) * std::log1p(-a);
}

double log_sum_exp(double a, double b) noexcept {
    const double hi = std::max(a, b);
    if (hi == -std::numeric_limits<double>::infinity()) return hi;
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

double log_sum_exp(std::span<const double> terms) {
    if (terms.empty()) throw std::domain_error("log_sum_exp of an empty sequence");
    const double hi = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(hi)) return hi;
    CompensatedSum s;
    for (double t : terms) s += std::exp(t - hi);
    return hi + std::log(s.value());
}

double log_sigmoid(double z) noexcept {
    return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace bfmix
