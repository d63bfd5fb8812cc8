#include "rgg/partition.hpp"

#include <algorithm>
#include <cmath>

#include "rgg/error.hpp"
#include "rgg/random.hpp"

namespace rgg {

namespace {

// Visit every index vector in the box centre +- reach, in lexicographic order.
template <class Visit>
void for_each_in_box(const CellIndex& centre, std::int64_t reach, Visit&& visit) {
    const std::size_t d = centre.size();
    CellIndex k(d);
    for (std::size_t i = 0; i < d; ++i) {
        k[i] = centre[i] - reach;
    }
    while (true) {
        visit(static_cast<const CellIndex&>(k));
        std::size_t i = d;
        while (true) {
            if (i == 0) {
                return;
            }
            --i;
            if (++k[i] <= centre[i] + reach) {
                break;
            }
            k[i] = centre[i] - reach;
        }
    }
}

std::int64_t index_distance2(const CellIndex& a, const CellIndex& b) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

}  // namespace

bool CubePartition::is_inner(const CellIndex& cell) const {
    double far2 = 0.0;
    for (auto k : cell) {
        const double c = (static_cast<double>(std::abs(k)) + 0.5) * side_;
        far2 += c * c;
    }
    return far2 <= radius_ * radius_;
}

Box CubePartition::cell_box(const CellIndex& cell) const {
    Box box;
    for (auto k : cell) {
        box.lower.push_back((static_cast<double>(k) - 0.5) * side_);
        box.upper.push_back((static_cast<double>(k) + 0.5) * side_);
    }
    return box;
}

std::size_t CubePartition::nearest_inner(const CellIndex& cell) const {
    if (is_inner(cell)) {
        return inner_ordinal_.at(cell);
    }
    // Grow a search box until it holds an inner cell, then scan the box that is
    // guaranteed to hold every cell at least as close.
    std::int64_t reach = 1;
    std::int64_t best2 = -1;
    while (best2 < 0) {
        for_each_in_box(cell, reach, [&](const CellIndex& k) {
            if (is_inner(k)) {
                const auto d2 = index_distance2(k, cell);
                best2 = best2 < 0 ? d2 : std::min(best2, d2);
            }
        });
        if (best2 < 0) {
            reach *= 2;
            if (reach > (std::int64_t{1} << 40)) {
                throw InsufficientResolution("no inner cell reachable");
            }
        }
    }
    const auto full = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(best2))));
    std::optional<CellIndex> best;
    for_each_in_box(cell, full, [&](const CellIndex& k) {
        if (!is_inner(k)) {
            return;
        }
        const auto d2 = index_distance2(k, cell);
        // Visiting order is lexicographic, so the first minimiser wins ties.
        if (d2 < best2 || (d2 == best2 && !best)) {
            best2 = d2;
            best = k;
        }
    });
    return inner_ordinal_.at(*best);
}

CubePartition CubePartition::build(int dimension, double R, double side, std::uint64_t seed) {
    if (dimension < 1) {
        throw UsageError("partition dimension must be positive");
    }
    if (!(R > 0.0) || !(side > 0.0)) {
        throw UsageError("partition needs R > 0 and side > 0");
    }
    CubePartition p;
    p.dimension_ = dimension;
    p.radius_ = R;
    p.side_ = side;
    p.seed_ = seed;

    const auto reach = static_cast<std::int64_t>(std::ceil(R / side + 0.5));
    if (std::pow(2.0 * static_cast<double>(reach) + 1.0, dimension) > 2e7) {
        throw UsageError("partition grid too fine: (2*" + std::to_string(reach) + "+1)^" +
                         std::to_string(dimension) + " cells");
    }
    std::vector<CellIndex> meeting;
    for_each_in_box(CellIndex(static_cast<std::size_t>(dimension), 0), reach, [&](const CellIndex& k) {
        double near2 = 0.0;
        for (auto c : k) {
            const double g = std::max(0.0, (static_cast<double>(std::abs(c)) - 0.5) * side);
            near2 += g * g;
        }
        if (near2 > R * R) {
            return;
        }
        meeting.push_back(k);
        if (p.is_inner(k)) {
            p.inner_ordinal_.emplace(k, p.inner_.size());
            p.inner_.push_back(k);
        }
    });
    if (p.inner_.empty()) {
        throw InsufficientResolution("no grid cube of side " + std::to_string(side) + " fits in B(0, " +
                                     std::to_string(R) + ")");
    }
    for (const auto& k : meeting) {
        p.assignment_.emplace(k, p.nearest_inner(k));
    }
    return p;
}

std::vector<CellIndex> CubePartition::boundary_cells_of(std::size_t i) const {
    std::vector<CellIndex> out;
    for (const auto& [cell, owner] : assignment_) {
        if (owner == i && !is_inner(cell)) {
            out.push_back(cell);
        }
    }
    return out;
}

CellIndex CubePartition::cell_of(std::span<const double> x) const {
    CellIndex k(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        k[i] = static_cast<std::int64_t>(std::floor(x[i] / side_ + 0.5));
    }
    return k;
}

std::optional<std::size_t> CubePartition::locate(std::span<const double> x) const {
    double norm2 = 0.0;
    for (double c : x) {
        norm2 += c * c;
    }
    if (norm2 > radius_ * radius_) {
        return std::nullopt;
    }
    const auto cell = cell_of(x);
    const auto it = assignment_.find(cell);
    return it != assignment_.end() ? it->second : nearest_inner(cell);
}

CellCounts count_points(const CubePartition& partition, const PointCloud& cloud) {
    if (cloud.dimension() != partition.dimension()) {
        throw UsageError("cloud and partition dimensions differ");
    }
    CellCounts out;
    out.counts.assign(partition.inner_cells().size(), 0);
    for (std::size_t v = 0; v < cloud.size(); ++v) {
        if (const auto owner = partition.locate(cloud.point(v))) {
            ++out.counts[*owner];
        } else {
            ++out.overflow;
        }
    }
    return out;
}

CellMasses cell_masses(const CubePartition& partition, const DensitySpec& spec, std::size_t samples_per_boundary_cell) {
    if (spec.dimension() != partition.dimension()) {
        throw UsageError("density and partition dimensions differ");
    }
    const auto& inner = partition.inner_cells();
    CellMasses out;
    out.nu.assign(inner.size(), 0.0);
    std::vector<double> variance(inner.size(), 0.0);
    for (std::size_t i = 0; i < inner.size(); ++i) {
        out.nu[i] = cube_mass(spec, partition.cell_box(inner[i]));
    }
    const double R2 = partition.radius() * partition.radius();
    const auto d = static_cast<std::size_t>(partition.dimension());
    std::uint64_t ordinal = 0;
    std::vector<double> x(d);
    for (const auto& [cell, owner] : partition.assignment()) {
        ++ordinal;
        if (partition.is_inner(cell)) {
            continue;
        }
        const Box box = partition.cell_box(cell);
        Rng rng(child_seed(partition.seed(), ordinal));
        double sum = 0.0;
        double sum2 = 0.0;
        for (std::size_t s = 0; s < samples_per_boundary_cell; ++s) {
            double norm2 = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                x[k] = box.lower[k] + (box.upper[k] - box.lower[k]) * rng.uniform_open();
                norm2 += x[k] * x[k];
            }
            const double f = norm2 <= R2 ? spec.profile(std::sqrt(norm2)) : 0.0;
            sum += f;
            sum2 += f * f;
        }
        const double m = static_cast<double>(samples_per_boundary_cell);
        const double mean = sum / m;
        const double var = std::max(0.0, sum2 / m - mean * mean) / (m - 1.0);
        const double vol = box.volume();
        out.nu[owner] += vol * mean;
        variance[owner] += vol * vol * var;
    }
    out.stderr_nu.resize(inner.size());
    std::transform(variance.begin(), variance.end(), out.stderr_nu.begin(), [](double v) { return std::sqrt(v); });
    return out;
}

ConcentrationReport check_concentration(const CubePartition& partition, const CellMasses& masses,
                                        const PointCloud& cloud, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw UsageError("gamma must lie in (0, 1)");
    }
    const auto counts = count_points(partition, cloud);
    ConcentrationReport rep;
    rep.gamma = gamma;
    rep.n = cloud.intensity_n;
    rep.overflow = counts.overflow;
    const double n = cloud.intensity_n;
    for (std::size_t i = 0; i < partition.inner_cells().size(); ++i) {
        CellCheck c;
        c.index = partition.inner_cells()[i];
        c.count = counts.counts[i];
        c.nu = masses.nu[i];
        c.nu_stderr = masses.stderr_nu[i];
        const double expected = n * c.nu;
        const double slack = 3.0 * n * c.nu_stderr;
        c.lower = (1.0 - gamma) * expected - slack;
        c.upper = (1.0 + gamma) * expected + slack;
        const auto count = static_cast<double>(c.count);
        c.violated = count < c.lower || count > c.upper;
        if (c.violated) {
            rep.violations.push_back(i);
        }
        if (expected > 0.0) {
            rep.max_relative_deviation = std::max(rep.max_relative_deviation, std::abs(count - expected) / expected);
        }
        rep.chernoff_budget += 2.0 * std::exp(-expected * gamma * gamma / 3.0);
        rep.cells.push_back(std::move(c));
    }
    return rep;
}

ConcentrationReport check_concentration(const CubePartition& partition, const PointCloud& cloud,
                                        const DensitySpec& spec, double gamma) {
    return check_concentration(partition, cell_masses(partition, spec), cloud, gamma);
}

nlohmann::json to_json(const ConcentrationReport& rep) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : rep.cells) {
        cells.push_back({{"index", c.index},
                         {"count", c.count},
                         {"nu", c.nu},
                         {"nu_stderr", c.nu_stderr},
                         {"lower", c.lower},
                         {"upper", c.upper},
                         {"violated", c.violated}});
    }
    return {{"gamma", rep.gamma},
            {"n", rep.n},
            {"cells", cells},
            {"overflow", rep.overflow},
            {"violations", rep.violations},
            {"max_relative_deviation", rep.max_relative_deviation},
            {"chernoff_budget", rep.chernoff_budget}};
}

}  // namespace rgg
