#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "rgg/sampler.hpp"

namespace rgg {

/// Highest ambient dimension supported by the neighbour grid.
inline constexpr int kMaxGraphDimension = 5;

using Edge = std::pair<std::uint32_t, std::uint32_t>;

/// Random geometric graph G(P_n, r): an edge joins two vertices whose distance
/// is strictly less than r.
///
/// Edges are implicit. Construction bins points into a hashed grid of cells
/// with side slightly below r / sqrt(d), so that every cell is a clique, and
/// merges components with union-find over neighbouring cell pairs. The graph is
/// immutable once built.
class GeometricGraph {
  public:
    static GeometricGraph build(std::shared_ptr<const PointCloud> cloud, double radius);

    const PointCloud& cloud() const { return *cloud_; }
    std::shared_ptr<const PointCloud> cloud_ptr() const { return cloud_; }
    double radius() const { return radius_; }
    std::size_t num_vertices() const { return component_of_.size(); }
    std::size_t num_components() const { return num_components_; }

    /// Component label per vertex, numbered by first appearance in vertex order.
    std::span<const std::uint32_t> component_of() const { return component_of_; }

    bool isolated(std::size_t v) const { return isolated_[v] != 0; }

    /// Every edge (u, v) with u < v, sorted. Materialised on request only.
    std::vector<Edge> edges() const;

    /// CSV `u,v`, one edge per row.
    void write_edge_csv(std::ostream& out) const;

    struct Grid;

  private:
    GeometricGraph() = default;

    std::shared_ptr<const PointCloud> cloud_;
    double radius_ = 0.0;
    std::shared_ptr<const Grid> grid_;
    std::vector<std::uint32_t> component_of_;
    std::vector<std::uint8_t> isolated_;
    std::size_t num_components_ = 0;
};

struct ConnectivityStats {
    bool is_connected = true;
    std::size_t num_components = 0;
    /// Furthest distance from the origin within the origin component.
    double r_c = 0.0;
    /// Furthest distance from the origin over all vertices.
    double r_max = 0.0;
    /// (probe radius R, number of isolated vertices with |x| <= R).
    std::vector<std::pair<double, std::size_t>> isolated_within;
    /// Set when the graph has no vertices; the statistics are then conventional.
    bool empty_graph = false;
    /// Vertex whose component is taken as the origin component.
    std::size_t origin_vertex = 0;
};

/// Connectivity statistics. The origin component is that of the vertex nearest
/// the origin, ties going to the lowest index.
ConnectivityStats stats(const GeometricGraph& g, std::span<const double> probe_radii);

}  // namespace rgg
