#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rgg/error.hpp"

namespace rgg::quad {

struct Tolerance {
    double absolute = 1e-10;
    double relative = 1e-10;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

struct Panel {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

// Kronrod 15-point value with |K15 - G7| as the absolute error estimate. The
// Gauss nodes are the even-indexed Kronrod nodes.
template <class F>
Panel kronrod_panel(const F& f, double a, double b) {
    using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
    using Gauss = boost::math::quadrature::gauss<double, 7>;
    const auto& x = Kronrod::abscissa();
    const auto& wk = Kronrod::weights();
    const auto& wg = Gauss::weights();
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double f0 = f(c);
    double k = wk[0] * f0;
    double g = wg[0] * f0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double pair = f(c - h * x[i]) + f(c + h * x[i]);
        k += wk[i] * pair;
        if (i % 2 == 0) {
            g += wg[i / 2] * pair;
        }
    }
    const double error = std::max(std::abs(k - g) * h, 50.0 * std::numeric_limits<double>::epsilon() * std::abs(k * h));
    return {a, b, k * h, error};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) on a finite interval.
///
/// Bisects the panel with the largest error estimate until the summed error
/// is within max(abs, rel * |value|). Throws NumericFailure after
/// `max_panels` panels.
template <class F>
Result integrate(const F& f, double a, double b, Tolerance tol = {}, int max_panels = 4000) {
    if (!(a < b)) {
        return {};
    }
    std::priority_queue<detail::Panel> heap;
    Result total;
    {
        auto panel = detail::kronrod_panel(f, a, b);
        total = {panel.value, panel.error};
        heap.push(panel);
    }
    int panels = 1;
    while (total.error > std::max(tol.absolute, tol.relative * std::abs(total.value))) {
        if (panels >= max_panels) {
            throw NumericFailure("adaptive quadrature did not converge on [" + detail::fmt(a) + ", " + detail::fmt(b) +
                                 "]: error estimate " + detail::fmt(total.error) + " value " + detail::fmt(total.value));
        }
        const auto worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            // Interval cannot be split further in double precision.
            throw NumericFailure("adaptive quadrature exhausted floating-point resolution near " +
                                 std::to_string(worst.a));
        }
        heap.pop();
        const auto left = detail::kronrod_panel(f, worst.a, mid);
        const auto right = detail::kronrod_panel(f, mid, worst.b);
        total.value += left.value + right.value - worst.value;
        total.error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++panels;
    }
    // Resum to shed the round-off accumulated by incremental updates.
    Result resummed;
    while (!heap.empty()) {
        resummed.value += heap.top().value;
        resummed.error += heap.top().error;
        heap.pop();
    }
    return resummed;
}

/// Integrate over consecutive pieces [b0,b1], [b1,b2], ... of a breakpoint list.
template <class F>
Result integrate_pieces(const F& f, const std::vector<double>& breakpoints, Tolerance tol = {}) {
    Result total;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const auto part = integrate(f, breakpoints[i], breakpoints[i + 1], tol);
        total.value += part.value;
        total.error += part.error;
    }
    return total;
}

/// Integral over [a, inf) by double-exponential (exp-sinh) quadrature.
template <class F>
Result integrate_to_infinity(const F& f, double a, Tolerance tol = {}) {
    thread_local boost::math::quadrature::exp_sinh<double> integrator;
    Result out;
    double l1 = 0.0;
    try {
        out.value = integrator.integrate(f, a, std::numeric_limits<double>::infinity(), tol.relative * 1e-2,
                                         &out.error, &l1);
    } catch (const std::exception& e) {
        throw NumericFailure(std::string("semi-infinite quadrature failed: ") + e.what());
    }
    if (!std::isfinite(out.value) || out.error > std::max(tol.absolute, tol.relative * std::abs(out.value))) {
        throw NumericFailure("semi-infinite quadrature did not converge from " + detail::fmt(a) +
                             ": error estimate " + detail::fmt(out.error));
    }
    return out;
}

/// Fixed-order Gauss-Legendre rule on [a, b].
template <unsigned Order, class F>
double gauss_legendre(const F& f, double a, double b) {
    return boost::math::quadrature::gauss<double, Order>::integrate(f, a, b);
}

/// Nodes and weights of the Order-point Gauss-Legendre rule on [-1, 1].
template <unsigned Order>
struct LegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    LegendreRule() {
        using rule = boost::math::quadrature::gauss<double, Order>;
        const auto& x = rule::abscissa();
        const auto& w = rule::weights();
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] == 0.0) {
                nodes.push_back(0.0);
                weights.push_back(w[i]);
                continue;
            }
            nodes.push_back(-x[i]);
            weights.push_back(w[i]);
            nodes.push_back(x[i]);
            weights.push_back(w[i]);
        }
    }
};

}  // namespace rgg::quad
