#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bfmix {

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) noexcept;
    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }
    double value() const noexcept { return sum_ + correction_; }

private:
    double sum_ = 0.0;
    double correction_ = 0.0;
};

/// Observations together with the sufficient statistics the closed forms
/// need. An empty dataset is legal: its mean is reported as absent.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<double> values);

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    std::optional<double> mean() const noexcept;
    double sum() const noexcept { return sum_; }
    double sum_sq() const noexcept { return sum_sq_; }
    /// Sum of squared deviations from the mean (0 when empty).
    double centered_sum_sq() const noexcept { return centered_ss_; }

    /// One-sample t statistic for a zero mean, sqrt(n) * mean / s.
    /// Requires n >= 2 and a non-degenerate sample.
    double t_statistic() const;

    /// Every value multiplied by c.
    Dataset scaled(double c) const;

private:
    std::vector<double> values_;
    double sum_ = 0.0;
    double sum_sq_ = 0.0;
    double centered_ss_ = 0.0;
};

Dataset suff_stats(std::span<const double> values);

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;
inline constexpr double kLogPi = 1.14472988584940017414;

/// log N(x; mu, sigma^2). Throws std::domain_error for sigma <= 0.
double log_pdf_normal(double x, double mu, double sigma);

/// log Cauchy(x; loc, scale). Throws std::domain_error for scale <= 0.
double log_pdf_cauchy(double x, double loc, double scale);

/// log Beta(a; a0, b0) on the open interval. Throws std::domain_error
/// outside (0, 1) or for non-positive shapes.
double log_pdf_beta(double a, double a0, double b0);

/// log(exp(a) + exp(b)), exact for -inf arguments.
double log_sum_exp(double a, double b) noexcept;

/// Throws std::domain_error on an empty sequence.
double log_sum_exp(std::span<const double> terms);

/// logistic(z) and its logs, evaluated without overflow.
double log_sigmoid(double z) noexcept;
double sigmoid(double z) noexcept;

}  // namespace bfmix
