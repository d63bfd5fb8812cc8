#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "rgg/density.hpp"
#include "rgg/sampler.hpp"

namespace rgg {

/// Integer coordinates of a grid cell; cell k is centred at k * side.
using CellIndex = std::vector<std::int64_t>;

/// Partition of the closed ball B(0, R) into regions Q_i, one per grid cube
/// Q'_i lying entirely inside the ball. Every other cube meeting the ball is
/// handed to the inner cube with the nearest centre (lexicographically
/// smallest index on ties) and contributes its part inside the ball.
class CubePartition {
  public:
    static CubePartition build(int dimension, double R, double side, std::uint64_t seed = 0);

    int dimension() const { return dimension_; }
    double radius() const { return radius_; }
    double side() const { return side_; }
    std::uint64_t seed() const { return seed_; }

    /// S(R): cells whose cube lies in the ball, in lexicographic order.
    const std::vector<CellIndex>& inner_cells() const { return inner_; }

    /// Every cell meeting the ball, mapped to the ordinal of its owning inner cell.
    const std::map<CellIndex, std::size_t>& assignment() const { return assignment_; }

    /// Cells owned by inner cell i that are not inner themselves.
    std::vector<CellIndex> boundary_cells_of(std::size_t i) const;

    /// Grid cell containing x (nearest centre).
    CellIndex cell_of(std::span<const double> x) const;

    /// Owning inner-cell ordinal of x, or nullopt when |x| > R.
    std::optional<std::size_t> locate(std::span<const double> x) const;

    bool is_inner(const CellIndex& cell) const;
    Box cell_box(const CellIndex& cell) const;

  private:
    std::size_t nearest_inner(const CellIndex& cell) const;

    int dimension_ = 0;
    double radius_ = 0.0;
    double side_ = 0.0;
    std::uint64_t seed_ = 0;
    std::vector<CellIndex> inner_;
    std::map<CellIndex, std::size_t> inner_ordinal_;
    std::map<CellIndex, std::size_t> assignment_;
};

struct CellCounts {
    std::vector<std::size_t> counts;
    std::size_t overflow = 0;
};

/// Number of points in each Q_i; points with |x| > R go to `overflow`.
CellCounts count_points(const CubePartition& partition, const PointCloud& cloud);

/// nu(Q_i) for every inner cell. The inner cube uses cube_mass; clipped
/// boundary cubes use Monte Carlo with the recorded standard error.
struct CellMasses {
    std::vector<double> nu;
    std::vector<double> stderr_nu;
};

CellMasses cell_masses(const CubePartition& partition, const DensitySpec& spec,
                       std::size_t samples_per_boundary_cell = 100000);

struct CellCheck {
    CellIndex index;
    std::size_t count = 0;
    double nu = 0.0;
    double nu_stderr = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool violated = false;
};

struct ConcentrationReport {
    double gamma = 0.0;
    double n = 0.0;
    std::vector<CellCheck> cells;
    std::size_t overflow = 0;
    /// Ordinals of violating cells.
    std::vector<std::size_t> violations;
    double max_relative_deviation = 0.0;
    /// sum_i 2 exp(-n nu(Q_i) gamma^2 / 3).
    double chernoff_budget = 0.0;
};

/// Compare each count against (1 +- gamma) n nu(Q_i), widened by three
/// standard errors of the mass estimate.
ConcentrationReport check_concentration(const CubePartition& partition, const CellMasses& masses,
                                        const PointCloud& cloud, double gamma);

ConcentrationReport check_concentration(const CubePartition& partition, const PointCloud& cloud,
                                        const DensitySpec& spec, double gamma);

nlohmann::json to_json(const ConcentrationReport& report);

}  // namespace rgg
