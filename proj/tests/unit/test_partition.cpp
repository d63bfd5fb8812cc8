#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "../oracles.hpp"
#include "rgg/error.hpp"
#include "rgg/partition.hpp"
#include "rgg/quadrature.hpp"

using namespace rgg;

namespace {

// Area of [x0,x1] x [y0,y1] inside the disc of radius R.
double clipped_area(double x0, double x1, double y0, double y1, double R) {
    const auto chord = [&](double x) {
        if (std::abs(x) >= R) {
            return 0.0;
        }
        const double h = std::sqrt(R * R - x * x);
        return std::max(0.0, std::min(y1, h) - std::max(y0, -h));
    };
    std::vector<double> breaks{x0};
    for (double k : {-R, R}) {
        if (k > x0 && k < x1) {
            breaks.push_back(k);
        }
    }
    for (double y : {y0, y1}) {
        if (std::abs(y) < R) {
            const double x = std::sqrt(R * R - y * y);
            for (double s : {-x, x}) {
                if (s > x0 && s < x1) {
                    breaks.push_back(s);
                }
            }
        }
    }
    breaks.push_back(x1);
    std::sort(breaks.begin(), breaks.end());
    return quad::integrate_pieces(chord, breaks, {1e-14, 1e-12}).value;
}

// Owner of grid cell k by exhaustive search over inner cells.
std::size_t brute_owner(const CubePartition& p, const CellIndex& k) {
    std::size_t best = 0;
    std::int64_t best2 = -1;
    for (std::size_t i = 0; i < p.inner_cells().size(); ++i) {
        std::int64_t d2 = 0;
        for (std::size_t a = 0; a < k.size(); ++a) {
            const auto t = p.inner_cells()[i][a] - k[a];
            d2 += t * t;
        }
        if (best2 < 0 || d2 < best2) {
            best2 = d2;
            best = i;
        }
    }
    return best;
}

bool has_ties(const CubePartition& p) {
    for (const auto& [cell, owner] : p.assignment()) {
        std::int64_t best2 = -1;
        int count = 0;
        for (const auto& inner : p.inner_cells()) {
            std::int64_t d2 = 0;
            for (std::size_t a = 0; a < cell.size(); ++a) {
                d2 += (inner[a] - cell[a]) * (inner[a] - cell[a]);
            }
            if (best2 < 0 || d2 < best2) {
                best2 = d2;
                count = 1;
            } else if (d2 == best2) {
                ++count;
            }
        }
        if (count > 1) {
            return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("origin-centred grid") {
    const auto p = CubePartition::build(2, 1.0, 0.4);
    CHECK(p.is_inner(CellIndex{0, 0}));
    CHECK(std::find(p.inner_cells().begin(), p.inner_cells().end(), CellIndex{0, 0}) != p.inner_cells().end());
    const auto box = p.cell_box(CellIndex{0, 0});
    CHECK(box.lower == std::vector<double>{-0.2, -0.2});
    CHECK(box.upper == std::vector<double>{0.2, 0.2});
    for (const auto& k : p.inner_cells()) {
        const auto b = p.cell_box(k);
        for (int mask = 0; mask < 4; ++mask) {
            const double x = mask & 1 ? b.upper[0] : b.lower[0];
            const double y = mask & 2 ? b.upper[1] : b.lower[1];
            CHECK(x * x + y * y <= 1.0);
        }
    }
    CHECK_THROWS_AS(CubePartition::build(2, 0.1, 1.0), InsufficientResolution);
    CHECK_THROWS_AS(CubePartition::build(2, 0.0, 1.0), UsageError);
}

TEST_CASE("regions tile the ball") {
    for (auto [R, side] : {std::pair{1.0, 0.4}, std::pair{2.04, 0.5}, std::pair{3.3, 0.25}}) {
        const auto p = CubePartition::build(2, R, side);
        double area = 0.0;
        for (const auto& [cell, owner] : p.assignment()) {
            CHECK(owner < p.inner_cells().size());
            const auto b = p.cell_box(cell);
            area += clipped_area(b.lower[0], b.upper[0], b.lower[1], b.upper[1], R);
        }
        CHECK(area == doctest::Approx(std::numbers::pi * R * R).epsilon(1e-6));
    }
}

TEST_CASE("regions tile the ball: Monte Carlo volume in 3d") {
    const double R = 1.0;
    const auto p = CubePartition::build(3, R, 0.3, 1);
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(-R, R);
    const std::size_t samples = 1000000;
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::vector<double> x{u(gen), u(gen), u(gen)};
        if (oracle::norm(x) <= R && p.assignment().count(p.cell_of(x)) == 1) {
            ++hits;
        }
    }
    const double frac = static_cast<double>(hits) / samples;
    const double sigma = std::sqrt(frac * (1.0 - frac) / samples);
    CHECK(std::abs(frac - std::numbers::pi / 6.0) <= 3.0 * sigma);
}

TEST_CASE("every probe of the ball has exactly one owner") {
    const auto p = CubePartition::build(2, 1.7, 0.35);
    std::mt19937_64 gen(11);
    for (int s = 0; s < 100000; ++s) {
        auto x = oracle::uniform_in_ball(gen, 2);
        for (auto& c : x) {
            c *= 1.7;
        }
        const auto owner = p.locate(x);
        REQUIRE(owner.has_value());
        CHECK(*owner == brute_owner(p, p.cell_of(x)));
    }
    const std::vector<double> outside{1.8, 0.0};
    CHECK_FALSE(p.locate(outside).has_value());
    const std::vector<double> on_sphere{1.7, 0.0};
    CHECK(p.locate(on_sphere).has_value());
}

TEST_CASE("counting points") {
    const auto spec = DensitySpec::gaussian(2);
    const auto p = CubePartition::build(2, 2.0, 0.5);
    const auto empty = count_points(p, make_cloud(spec, {}));
    CHECK(std::all_of(empty.counts.begin(), empty.counts.end(), [](auto c) { return c == 0; }));
    CHECK(empty.overflow == 0);

    const auto cloud = sample(spec, 1e4, 5);
    const auto counts = count_points(p, cloud);
    std::size_t total = counts.overflow;
    for (auto c : counts.counts) {
        total += c;
    }
    CHECK(total == cloud.size());

    std::vector<std::size_t> direct(p.inner_cells().size(), 0);
    std::size_t outside = 0;
    for (std::size_t v = 0; v < cloud.size(); ++v) {
        const auto x = cloud.point(v);
        if (x[0] * x[0] + x[1] * x[1] > 4.0) {
            ++outside;
            continue;
        }
        CellIndex k{static_cast<std::int64_t>(std::floor(x[0] / 0.5 + 0.5)),
                    static_cast<std::int64_t>(std::floor(x[1] / 0.5 + 0.5))};
        ++direct[brute_owner(p, k)];
    }
    CHECK(direct == counts.counts);
    CHECK(outside == counts.overflow);
    CHECK_THROWS_AS(count_points(p, make_cloud(DensitySpec::gaussian(3), {})), UsageError);
}

TEST_CASE("grid symmetries permute counts") {
    // Lexicographic tie-breaking is not symmetric, so use a grid without ties.
    const auto spec = DensitySpec::gaussian(2);
    CHECK(has_ties(CubePartition::build(2, 2.0, 0.5)));
    const auto p = CubePartition::build(2, 1.2, 0.5);
    REQUIRE_FALSE(has_ties(p));
    const auto cloud = sample(spec, 2e4, 9);
    std::vector<double> swapped(cloud.coords.size()), flipped(cloud.coords.size());
    for (std::size_t v = 0; v < cloud.size(); ++v) {
        swapped[2 * v] = cloud.coords[2 * v + 1];
        swapped[2 * v + 1] = cloud.coords[2 * v];
        flipped[2 * v] = -cloud.coords[2 * v];
        flipped[2 * v + 1] = cloud.coords[2 * v + 1];
    }
    const auto base = count_points(p, cloud);
    const auto by_swap = count_points(p, make_cloud(spec, swapped));
    const auto by_flip = count_points(p, make_cloud(spec, flipped));
    const auto ordinal = [&](const CellIndex& k) {
        return static_cast<std::size_t>(
            std::find(p.inner_cells().begin(), p.inner_cells().end(), k) - p.inner_cells().begin());
    };
    for (std::size_t i = 0; i < p.inner_cells().size(); ++i) {
        const auto& k = p.inner_cells()[i];
        CHECK(base.counts[i] == by_swap.counts[ordinal({k[1], k[0]})]);
        CHECK(base.counts[i] == by_flip.counts[ordinal({-k[0], k[1]})]);
    }
}

TEST_CASE("cell masses") {
    const auto spec = DensitySpec::gaussian(2);
    const auto p = CubePartition::build(2, 2.0, 0.5, 3);
    const auto m = cell_masses(p, spec, 20000);
    double total = 0.0, var = 0.0;
    for (std::size_t i = 0; i < m.nu.size(); ++i) {
        total += m.nu[i];
        var += m.stderr_nu[i] * m.stderr_nu[i];
        CHECK(m.nu[i] > 0.0);
    }
    CHECK(std::abs(total - (1.0 - tail_mass(spec, 2.0))) <= 3.0 * std::sqrt(var) + 1e-9);
    // Inner cells without clipped neighbours have exact masses.
    const auto i0 = static_cast<std::size_t>(
        std::find(p.inner_cells().begin(), p.inner_cells().end(), CellIndex{0, 0}) - p.inner_cells().begin());
    CHECK(m.stderr_nu[i0] == 0.0);
    CHECK(m.nu[i0] == doctest::Approx(std::pow(std::erf(0.25), 2)).epsilon(1e-10));
    const auto again = cell_masses(p, spec, 20000);
    CHECK(again.nu == m.nu);
}

TEST_CASE("concentration check") {
    const auto spec = DensitySpec::gaussian(2);
    const auto p = CubePartition::build(2, 1.0, 0.5, 2);
    const auto masses = cell_masses(p, spec, 20000);
    const double n = 1e4;
    const double gamma = 0.3;
    // Put ceil((1 + 2 gamma) n nu) points at the centre of cell 0 and the
    // expected number into every other cell.
    std::vector<double> coords;
    for (std::size_t i = 0; i < p.inner_cells().size(); ++i) {
        const double factor = i == 0 ? 1.0 + 2.0 * gamma : 1.0;
        const auto count = static_cast<std::size_t>(std::ceil(factor * n * masses.nu[i]));
        for (std::size_t c = 0; c < count; ++c) {
            coords.push_back(p.inner_cells()[i][0] * 0.5);
            coords.push_back(p.inner_cells()[i][1] * 0.5);
        }
    }
    const auto cloud = make_cloud(spec, coords, n);
    const auto rep = check_concentration(p, masses, cloud, gamma);
    CHECK(rep.violations == std::vector<std::size_t>{0});
    CHECK(rep.cells[0].violated);
    CHECK(rep.max_relative_deviation >= 2.0 * gamma);
    CHECK(rep.overflow == 0);
    double budget = 0.0;
    for (double nu : masses.nu) {
        budget += 2.0 * std::exp(-n * nu * gamma * gamma / 3.0);
    }
    CHECK(rep.chernoff_budget == doctest::Approx(budget));
    const auto j = to_json(rep);
    for (const char* key : {"gamma", "n", "cells", "overflow", "violations", "max_relative_deviation"}) {
        CHECK(j.contains(key));
    }
    CHECK(j.at("cells")[0].contains("lower"));
    CHECK_THROWS_AS(check_concentration(p, masses, cloud, 1.0), UsageError);

    // Chernoff direction: larger n at a fixed partition means fewer violations.
    const auto small = check_concentration(p, masses, sample(spec, 1e3, 1), gamma);
    const auto large = check_concentration(p, masses, sample(spec, 1e6, 1), gamma);
    CHECK(large.chernoff_budget < small.chernoff_budget);
    CHECK(large.violations.size() <= small.violations.size());
}
