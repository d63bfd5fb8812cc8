#include "rgg/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "rgg/error.hpp"
#include "rgg/random.hpp"
#include "rgg/serialize.hpp"

namespace rgg {

double PointCloud::norm(std::size_t i) const {
    double s = 0.0;
    for (double x : point(i)) {
        s += x * x;
    }
    return std::sqrt(s);
}

PointCloud sample(const RadialMeasure& measure, double n, std::uint64_t seed) {
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw UsageError("sample requires a finite intensity n > 0");
    }
    const auto& spec = measure.spec();
    const auto d = static_cast<std::size_t>(spec.dimension());

    PointCloud cloud{spec, n, seed, {}, 0};
    Rng rng(seed);
    std::poisson_distribution<std::uint64_t> count_dist(n);
    const std::uint64_t count = count_dist(rng);
    cloud.coords.resize(count * d);

    std::normal_distribution<double> normal;
    std::vector<double> direction(d);
    for (std::uint64_t i = 0; i < count; ++i) {
        bool truncated = false;
        const double radius = measure.quantile(rng.uniform_open(), &truncated);
        cloud.truncated_draws += truncated ? 1 : 0;
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (auto& c : direction) {
                c = normal(rng);
                norm2 += c * c;
            }
        } while (norm2 == 0.0);
        const double scale = radius / std::sqrt(norm2);
        for (std::size_t k = 0; k < d; ++k) {
            cloud.coords[i * d + k] = direction[k] * scale;
        }
    }
    return cloud;
}

PointCloud sample(const DensitySpec& spec, double n, std::uint64_t seed) {
    return sample(RadialMeasure(spec, n), n, seed);
}

PointCloud make_cloud(const DensitySpec& spec, std::vector<double> coords, double n, std::uint64_t seed) {
    const auto d = static_cast<std::size_t>(spec.dimension());
    if (coords.size() % d != 0) {
        throw UsageError("coordinate count is not a multiple of the dimension");
    }
    for (double x : coords) {
        if (!std::isfinite(x)) {
            throw UsageError("point coordinates must be finite");
        }
    }
    return PointCloud{spec, n, seed, std::move(coords), 0};
}

KsResult radial_ks_statistic(const PointCloud& cloud) {
    if (cloud.empty()) {
        return {0.0, true};
    }
    std::vector<double> radii(cloud.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        radii[i] = cloud.norm(i);
    }
    std::sort(radii.begin(), radii.end());
    const double count = static_cast<double>(radii.size());
    double statistic = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double f = radial_cdf(cloud.spec, radii[i]);
        statistic = std::max({statistic, static_cast<double>(i + 1) / count - f, f - static_cast<double>(i) / count});
    }
    return {statistic, false};
}

void write_cloud_csv(const PointCloud& cloud, std::ostream& out) {
    const int d = cloud.dimension();
    for (int k = 0; k < d; ++k) {
        out << (k ? "," : "") << 'x' << k;
    }
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto p = cloud.point(i);
        for (int k = 0; k < d; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", p[static_cast<std::size_t>(k)]);
            out << (k ? "," : "") << buf;
        }
        out << '\n';
    }
}

std::string cloud_sidecar_json(const PointCloud& cloud) {
    nlohmann::json j;
    j["spec"] = cloud.spec;
    j["n"] = cloud.intensity_n;
    j["seed"] = cloud.seed;
    j["count"] = cloud.size();
    j["truncated_draws"] = cloud.truncated_draws;
    return j.dump(2);
}

}  // namespace rgg
