#include "bfmix/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <tuple>
#include <vector>

namespace bfmix {

namespace {

// Kronrod abscissae on [0,1); odd indices are the Gauss-7 nodes.
constexpr std::array<double, 8> kXgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double fsum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * fsum;
        if (j % 2 == 1) gauss += kWg[j / 2] * fsum;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate_gk15(const std::function<double(double)>& f,
                                std::span<const double> breakpoints,
                                const QuadratureOptions& options) {
    if (breakpoints.size() < 2) {
        throw std::invalid_argument("integrate_gk15 needs at least two breakpoints");
    }
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end())) {
        throw std::invalid_argument("integrate_gk15 breakpoints must be sorted");
    }

    std::priority_queue<Segment> heap;
    QuadratureResult result;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (!(breakpoints[i + 1] > breakpoints[i])) continue;
        heap.push(gk15(f, breakpoints[i], breakpoints[i + 1]));
        result.evaluations += 15;
    }

    auto totals = [&heap]() {
        // Re-summing on demand keeps the running totals free of cancellation drift.
        auto copy = heap;
        double v = 0.0, e = 0.0;
        while (!copy.empty()) {
            v += copy.top().value;
            e += copy.top().error;
            copy.pop();
        }
        return std::pair{v, e};
    };

    auto [value, error] = totals();

    int subdivisions = 0;
    while (!heap.empty()) {
        const double target = std::max(options.abs_tol, options.rel_tol * std::abs(value));
        if (error <= target) {
            result.converged = true;
            break;
        }
        if (subdivisions >= options.max_subdivisions) break;
        const Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted at machine precision
        heap.pop();
        const Segment left = gk15(f, worst.a, mid);
        const Segment right = gk15(f, mid, worst.b);
        result.evaluations += 30;
        heap.push(left);
        heap.push(right);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        ++subdivisions;
        if (subdivisions % 64 == 0) std::tie(value, error) = totals();
    }
    std::tie(value, error) = totals();
    if (!result.converged) {
        result.converged = error <= std::max(options.abs_tol, options.rel_tol * std::abs(value));
    }
    result.value = value;
    result.error = error;
    return result;
}

QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                                const QuadratureOptions& options) {
    const std::array<double, 2> pts{a, b};
    return integrate_gk15(f, pts, options);
}

}  // namespace bfmix
