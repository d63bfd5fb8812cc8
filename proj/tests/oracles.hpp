#pragma once

// Reference implementations used as test oracles. Each is deliberately naive
// and shares no code path with the library beyond the density profile.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <queue>
#include <random>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "rgg/density.hpp"
#include "rgg/graph.hpp"
#include "rgg/random.hpp"
#include "rgg/sampler.hpp"

namespace oracle {

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    bool within(double value, double sigmas = 3.0) const {
        return std::abs(value - mean) <= sigmas * stderr_ + 1e-15;
    }
};

inline double dist2(const rgg::PointCloud& c, std::size_t a, std::size_t b) {
    const auto x = c.point(a);
    const auto y = c.point(b);
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double t = x[k] - y[k];
        s += t * t;
    }
    return s;
}

/// All pairs (u < v) with |x_u - x_v| < r.
inline std::vector<rgg::Edge> brute_edges(const rgg::PointCloud& c, double r) {
    std::vector<rgg::Edge> out;
    for (std::size_t u = 0; u < c.size(); ++u) {
        for (std::size_t v = u + 1; v < c.size(); ++v) {
            if (dist2(c, u, v) < r * r) {
                out.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
            }
        }
    }
    return out;
}

/// Component labels by breadth-first search, numbered by first appearance.
inline std::vector<std::uint32_t> bfs_labels(std::size_t n, const std::vector<rgg::Edge>& edges) {
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (auto [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<std::int64_t> label(n, -1);
    std::uint32_t next = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (label[s] >= 0) {
            continue;
        }
        std::queue<std::uint32_t> q;
        q.push(static_cast<std::uint32_t>(s));
        label[s] = next;
        while (!q.empty()) {
            const auto u = q.front();
            q.pop();
            for (auto v : adj[u]) {
                if (label[v] < 0) {
                    label[v] = next;
                    q.push(v);
                }
            }
        }
        ++next;
    }
    return {label.begin(), label.end()};
}

inline std::vector<double> uniform_in_ball(std::mt19937_64& gen, std::size_t d) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    std::vector<double> x(d);
    double n2 = 0.0;
    for (auto& c : x) {
        c = normal(gen);
        n2 += c * c;
    }
    const double r = std::pow(unif(gen), 1.0 / static_cast<double>(d)) / std::sqrt(n2);
    for (auto& c : x) {
        c *= r;
    }
    return x;
}

inline double norm(const std::vector<double>& x) {
    double s = 0.0;
    for (double c : x) {
        s += c * c;
    }
    return std::sqrt(s);
}

/// nu(B(y, r)) with |y| = rho, by uniform sampling of the ball.
inline Estimate mc_ball_mass(const rgg::DensitySpec& spec, double rho, double r, std::size_t samples,
                             std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    const auto d = static_cast<std::size_t>(spec.dimension());
    const double vol = rgg::unit_ball_volume(spec.dimension()) * std::pow(r, spec.dimension());
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        auto x = uniform_in_ball(gen, d);
        for (auto& c : x) {
            c *= r;
        }
        x[0] += rho;
        const double f = vol * spec.profile(norm(x));
        s += f;
        s2 += f * f;
    }
    const double m = static_cast<double>(samples);
    const double mean = s / m;
    return {mean, std::sqrt(std::max(0.0, s2 / m - mean * mean) / (m - 1.0))};
}

/// nu(box) by uniform sampling of the box.
inline Estimate mc_box_mass(const rgg::DensitySpec& spec, const rgg::Box& box, std::size_t samples,
                            std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif;
    const auto d = box.dimension();
    const double vol = box.volume();
    std::vector<double> x(d);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            x[k] = box.lower[k] + (box.upper[k] - box.lower[k]) * unif(gen);
        }
        const double f = vol * spec.profile(norm(x));
        s += f;
        s2 += f * f;
    }
    const double m = static_cast<double>(samples);
    const double mean = s / m;
    return {mean, std::sqrt(std::max(0.0, s2 / m - mean * mean) / (m - 1.0))};
}

/// nu(B(0, R)^c) by importance sampling of the radius from the Pareto law
/// g(rho) = k R^k / rho^{k+1} on [R, inf), with k = alpha - d for heavy tails.
inline Estimate mc_tail_mass(const rgg::DensitySpec& spec, double R, std::size_t samples, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unif;
    const double d = spec.dimension();
    const double k = spec.is_light() ? 1.0 : spec.heavy().alpha - d;
    const double sphere = rgg::unit_sphere_area(spec.dimension());
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double u = 1.0 - unif(gen);
        const double rho = R * std::pow(u, -1.0 / k);
        const double g = k * std::pow(R, k) / std::pow(rho, k + 1.0);
        const double f = sphere * std::pow(rho, d - 1.0) * spec.profile(rho) / g;
        s += f;
        s2 += f * f;
    }
    const double m = static_cast<double>(samples);
    const double mean = s / m;
    return {mean, std::sqrt(std::max(0.0, s2 / m - mean * mean) / (m - 1.0))};
}

/// Critical value of the one-sample KS statistic at significance 0.001.
inline double ks_critical_001(std::size_t n) {
    return 1.95 / std::sqrt(static_cast<double>(n));
}

/// Upper-tail probability of a chi-square variable with k degrees of freedom.
inline double chi2_sf(double x, double k) {
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(k), x));
}

/// Independent Poisson draws from the standard library generator.
inline std::vector<std::uint64_t> poisson_draws(double n, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::poisson_distribution<std::uint64_t> dist(n);
    std::vector<std::uint64_t> out(count);
    for (auto& x : out) {
        x = dist(gen);
    }
    return out;
}

}  // namespace oracle
