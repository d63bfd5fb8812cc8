#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <span>
#include <vector>

#include "rgg/density.hpp"

namespace rgg {

/// One realisation of a Poisson point process of intensity n * nu.
struct PointCloud {
    DensitySpec spec;
    double intensity_n = 0.0;
    std::uint64_t seed = 0;
    /// Row-major coordinates, size() * dimension() entries.
    std::vector<double> coords;
    /// Draws that fell beyond the radial table and were clamped to its edge.
    std::size_t truncated_draws = 0;

    int dimension() const { return spec.dimension(); }
    std::size_t size() const { return coords.size() / static_cast<std::size_t>(spec.dimension()); }
    bool empty() const { return coords.empty(); }
    std::span<const double> point(std::size_t i) const {
        const auto d = static_cast<std::size_t>(spec.dimension());
        return {coords.data() + i * d, d};
    }
    double norm(std::size_t i) const;
};

/// Draw P_n: N ~ Poisson(n), then N i.i.d. points from nu.
///
/// Deterministic in (measure, n, seed). The measure's table must have been
/// built for an intensity at least n.
PointCloud sample(const RadialMeasure& measure, double n, std::uint64_t seed);

/// Convenience overload that tabulates the radial law for intensity n.
PointCloud sample(const DensitySpec& spec, double n, std::uint64_t seed);

/// A cloud built from explicit coordinates (tests, imports).
PointCloud make_cloud(const DensitySpec& spec, std::vector<double> coords, double n = 1.0, std::uint64_t seed = 0);

struct KsResult {
    double statistic = 0.0;
    bool empty_cloud = false;
};

/// Kolmogorov-Smirnov distance between the radii of a cloud and the analytic
/// radial CDF. An empty cloud yields 0 with `empty_cloud` set.
KsResult radial_ks_statistic(const PointCloud& cloud);

/// CSV with header x0,...,x{d-1}, one point per row.
void write_cloud_csv(const PointCloud& cloud, std::ostream& out);

/// JSON sidecar {spec, n, seed, count}.
std::string cloud_sidecar_json(const PointCloud& cloud);

}  // namespace rgg
