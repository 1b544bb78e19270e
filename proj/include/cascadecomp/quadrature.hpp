#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "error.hpp"

namespace cascadecomp {

/**
 * Composite Simpson weights for `intervals` equal panels of width h. An odd
 * panel count closes with Simpson's 3/8 rule on the last three panels. One
 * panel degrades to the trapezoid rule.
 */
inline std::vector<double> simpson_weights(std::size_t intervals, double h) {
    if (intervals == 0) {
        return {0.0};
    }
    std::vector<double> w(intervals + 1, 0.0);
    if (intervals == 1) {
        w[0] = w[1] = 0.5 * h;
        return w;
    }
    std::size_t simpson_panels = intervals;
    if (intervals % 2 == 1) {
        simpson_panels = intervals - 3;
        const std::size_t s = simpson_panels;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    for (std::size_t i = 0; i + 2 <= simpson_panels; i += 2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    return w;
}

inline std::vector<double> trapezoid_weights(std::size_t intervals, double h) {
    std::vector<double> w(intervals + 1, h);
    w.front() = 0.5 * h;
    w.back() = intervals == 0 ? 0.0 : 0.5 * h;
    return w;
}

inline double simpson(std::span<const double> samples, double h) {
    if (samples.empty()) {
        return 0.0;
    }
    const auto w = simpson_weights(samples.size() - 1, h);
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        acc += w[i] * samples[i];
    }
    return acc;
}

inline double trapezoid(std::span<const double> samples, double h) {
    if (samples.size() < 2) {
        return 0.0;
    }
    double acc = 0.5 * (samples.front() + samples.back());
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        acc += samples[i];
    }
    return acc * h;
}

/**
 * Adaptive Gauss-Kronrod (61 points) on [a, b] with a relative tolerance.
 * Results whose error estimate stays above max(rel_tol·|I|, 1e-13·∫|f|)
 * after the subdivision budget is spent are reported as non-converged.
 */
template<typename F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-8) {
    double error = 0.0;
    double l1 = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, rel_tol * 1e-2, &error, &l1);
    if (!std::isfinite(value) || error > std::max(rel_tol * std::abs(value), 1e-13 * l1)) {
        throw NumericalError("adaptive quadrature did not converge on [" + detail::fmt_g(a) + ", " +
                             detail::fmt_g(b) + "] (estimate " + detail::fmt_g(value) + ", error " +
                             detail::fmt_g(error) + ")");
    }
    return value;
}

} // namespace cascadecomp
