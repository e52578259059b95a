#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace bfmix {

/// Raised when an integral does not reach its requested accuracy.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double error_bound)
        : std::runtime_error(what), error_bound_(error_bound) {}
    /// Error estimate achieved before giving up.
    double error_bound() const noexcept { return error_bound_; }

private:
    double error_bound_;
};

struct QuadratureOptions {
    double abs_tol = 0.0;
    double rel_tol = 1e-10;
    int max_subdivisions = 4000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature over a finite interval.
///
/// `breakpoints` must be sorted and hold at least two points; the first and
/// last are the integration limits and the inner ones seed the initial
/// partition. The interval with the largest error estimate is bisected until
/// error <= max(abs_tol, rel_tol * |value|) or the subdivision budget is
/// exhausted. Never throws on non-convergence; check `converged`.
QuadratureResult integrate_gk15(const std::function<double(double)>& f,
                                std::span<const double> breakpoints,
                                const QuadratureOptions& options = {});

QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                                const QuadratureOptions& options = {});

}  // namespace bfmix
