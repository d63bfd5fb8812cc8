#include "rgg/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "rgg/error.hpp"
#include "rgg/random.hpp"

namespace rgg {

namespace {

using CellKey = std::array<std::int64_t, kMaxGraphDimension>;

struct CellKeyHash {
    std::size_t operator()(const CellKey& key) const noexcept {
        std::uint64_t h = 0x243f6a8885a308d3ULL;
        for (auto c : key) {
            h = mix64(h ^ static_cast<std::uint64_t>(c));
        }
        return static_cast<std::size_t>(h);
    }
};

class DisjointSets {
  public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), 0u);
    }

    std::uint32_t find(std::uint32_t v) {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }

    bool unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        if (size_[a] < size_[b] || (size_[a] == size_[b] && b < a)) {
            std::swap(a, b);
        }
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

  private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
};

}  // namespace

struct GeometricGraph::Grid {
    std::size_t dimension = 0;
    double radius = 0.0;
    double radius2 = 0.0;
    double side = 0.0;
    const double* coords = nullptr;
    /// Point indices sorted by cell.
    std::vector<std::uint32_t> order;
    std::vector<CellKey> keys;
    /// Cell c holds order[starts[c] .. starts[c+1]).
    std::vector<std::uint32_t> starts;
    std::vector<std::uint8_t> clique;
    /// Bounding box of each cell's points, dimension-major per cell.
    std::vector<double> box_lo;
    std::vector<double> box_hi;
    std::unordered_map<CellKey, std::uint32_t, CellKeyHash> lookup;
    /// Offsets to neighbour cells, lexicographically positive half only.
    std::vector<CellKey> forward_offsets;

    std::size_t num_cells() const { return keys.size(); }
    std::span<const std::uint32_t> members(std::size_t c) const {
        return {order.data() + starts[c], order.data() + starts[c + 1]};
    }

    double dist2(std::uint32_t a, std::uint32_t b) const {
        const double* x = coords + static_cast<std::size_t>(a) * dimension;
        const double* y = coords + static_cast<std::size_t>(b) * dimension;
        double s = 0.0;
        for (std::size_t k = 0; k < dimension; ++k) {
            const double t = x[k] - y[k];
            s += t * t;
        }
        return s;
    }
    bool adjacent(std::uint32_t a, std::uint32_t b) const { return dist2(a, b) < radius2; }

    /// True when no pair of points of cells c and e can be adjacent.
    bool separated(std::size_t c, std::size_t e) const {
        double gap2 = 0.0;
        for (std::size_t k = 0; k < dimension; ++k) {
            const double g = std::max({0.0, box_lo[e * dimension + k] - box_hi[c * dimension + k],
                                       box_lo[c * dimension + k] - box_hi[e * dimension + k]});
            gap2 += g * g;
        }
        return gap2 > radius2 * (1.0 + 1e-9);
    }

    std::int64_t neighbour(std::size_t c, const CellKey& offset) const {
        CellKey key = keys[c];
        for (std::size_t k = 0; k < dimension; ++k) {
            key[k] += offset[k];
        }
        const auto it = lookup.find(key);
        return it == lookup.end() ? -1 : static_cast<std::int64_t>(it->second);
    }
};

namespace {

std::vector<CellKey> forward_offsets(std::size_t d, double side, double radius) {
    const auto reach = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(d)))) + 1;
    std::vector<CellKey> out;
    CellKey offset{};
    for (std::size_t k = 0; k < d; ++k) {
        offset[k] = -reach;
    }
    while (true) {
        // Smallest possible distance between points of the two cells.
        double gap2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double g = static_cast<double>(std::max<std::int64_t>(0, std::abs(offset[k]) - 1)) * side;
            gap2 += g * g;
        }
        const auto first_nonzero = std::find_if(offset.begin(), offset.begin() + static_cast<std::ptrdiff_t>(d),
                                                [](std::int64_t c) { return c != 0; });
        const bool positive = first_nonzero != offset.begin() + static_cast<std::ptrdiff_t>(d) && *first_nonzero > 0;
        if (positive && gap2 < radius * radius * (1.0 + 1e-6)) {
            out.push_back(offset);
        }
        std::size_t k = 0;
        while (k < d && ++offset[k] > reach) {
            offset[k++] = -reach;
        }
        if (k == d) {
            break;
        }
    }
    return out;
}

std::shared_ptr<GeometricGraph::Grid> build_grid(const PointCloud& cloud, double radius) {
    auto grid = std::make_shared<GeometricGraph::Grid>();
    const auto d = static_cast<std::size_t>(cloud.dimension());
    const std::size_t n = cloud.size();
    grid->dimension = d;
    grid->radius = radius;
    grid->radius2 = radius * radius;
    grid->side = radius / std::sqrt(static_cast<double>(d)) * (1.0 - 1e-9);
    grid->coords = cloud.coords.data();

    std::vector<CellKey> point_keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        CellKey key{};
        const auto p = cloud.point(i);
        for (std::size_t k = 0; k < d; ++k) {
            const double cell = std::floor(p[k] / grid->side);
            if (!(std::abs(cell) < 4.0e18)) {
                throw NumericFailure("point coordinate too large for the neighbour grid");
            }
            key[k] = static_cast<std::int64_t>(cell);
        }
        point_keys[i] = key;
    }
    grid->order.resize(n);
    std::iota(grid->order.begin(), grid->order.end(), 0u);
    std::sort(grid->order.begin(), grid->order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return point_keys[a] != point_keys[b] ? point_keys[a] < point_keys[b] : a < b;
    });
    for (std::size_t i = 0; i < n; ++i) {
        const auto& key = point_keys[grid->order[i]];
        if (i == 0 || key != grid->keys.back()) {
            grid->lookup.emplace(key, static_cast<std::uint32_t>(grid->keys.size()));
            grid->keys.push_back(key);
            grid->starts.push_back(static_cast<std::uint32_t>(i));
        }
    }
    grid->starts.push_back(static_cast<std::uint32_t>(n));

    // A cell is a clique when its bounding box diagonal is safely below r.
    grid->clique.assign(grid->num_cells(), 0);
    grid->box_lo.resize(grid->num_cells() * d);
    grid->box_hi.resize(grid->num_cells() * d);
    for (std::size_t c = 0; c < grid->num_cells(); ++c) {
        const auto members = grid->members(c);
        double diag2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            double lo = cloud.point(members[0])[k];
            double hi = lo;
            for (auto v : members) {
                lo = std::min(lo, cloud.point(v)[k]);
                hi = std::max(hi, cloud.point(v)[k]);
            }
            grid->box_lo[c * d + k] = lo;
            grid->box_hi[c * d + k] = hi;
            diag2 += (hi - lo) * (hi - lo);
        }
        grid->clique[c] = members.size() == 1 || diag2 < grid->radius2 * (1.0 - 1e-12) ? 1 : 0;
    }
    grid->forward_offsets = forward_offsets(d, grid->side, radius);
    return grid;
}

}  // namespace

GeometricGraph GeometricGraph::build(std::shared_ptr<const PointCloud> cloud, double radius) {
    if (!cloud) {
        throw UsageError("GeometricGraph::build needs a point cloud");
    }
    if (!(radius > 0.0) || !(radius <= 1.0)) {
        throw UsageError("graph radius must lie in (0, 1], got " + std::to_string(radius));
    }
    if (cloud->dimension() > kMaxGraphDimension) {
        throw UsageError("graph construction supports d <= " + std::to_string(kMaxGraphDimension));
    }
    if (cloud->size() >= std::size_t{1} << 32) {
        throw UsageError("too many points for 32-bit vertex ids");
    }

    GeometricGraph g;
    g.cloud_ = std::move(cloud);
    g.radius_ = radius;
    const std::size_t n = g.cloud_->size();
    auto grid = build_grid(*g.cloud_, radius);
    const auto& gr = *grid;

    DisjointSets sets(n);
    for (std::size_t c = 0; c < gr.num_cells(); ++c) {
        const auto members = gr.members(c);
        if (gr.clique[c]) {
            for (std::size_t i = 1; i < members.size(); ++i) {
                sets.unite(members[0], members[i]);
            }
            continue;
        }
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                if (gr.adjacent(members[i], members[j])) {
                    sets.unite(members[i], members[j]);
                }
            }
        }
    }

    for (std::size_t c = 0; c < gr.num_cells(); ++c) {
        for (const auto& offset : gr.forward_offsets) {
            const auto other = gr.neighbour(c, offset);
            if (other < 0 || gr.separated(c, static_cast<std::size_t>(other))) {
                continue;
            }
            auto a = gr.members(c);
            auto b = gr.members(static_cast<std::size_t>(other));
            bool a_clique = gr.clique[c] != 0;
            const bool b_clique = gr.clique[static_cast<std::size_t>(other)] != 0;
            if (!a_clique && b_clique) {
                std::swap(a, b);
                a_clique = true;
            }
            if (a_clique && b_clique && sets.find(a[0]) == sets.find(b[0])) {
                continue;
            }
            if (a_clique) {
                // One edge from each b suffices: all of `a` is already one component.
                for (auto v : b) {
                    if (sets.find(v) == sets.find(a[0])) {
                        continue;
                    }
                    for (auto u : a) {
                        if (gr.adjacent(u, v)) {
                            sets.unite(u, v);
                            break;
                        }
                    }
                }
                continue;
            }
            for (auto u : a) {
                for (auto v : b) {
                    if (sets.find(u) != sets.find(v) && gr.adjacent(u, v)) {
                        sets.unite(u, v);
                    }
                }
            }
        }
    }

    g.component_of_.assign(n, 0);
    std::vector<std::int64_t> label_of_root(n, -1);
    std::uint32_t next = 0;
    for (std::size_t v = 0; v < n; ++v) {
        const auto root = sets.find(static_cast<std::uint32_t>(v));
        if (label_of_root[root] < 0) {
            label_of_root[root] = next++;
        }
        g.component_of_[v] = static_cast<std::uint32_t>(label_of_root[root]);
    }
    g.num_components_ = next;
    // Degree zero exactly when the component is a singleton.
    std::vector<std::uint32_t> component_size(next, 0);
    for (auto label : g.component_of_) {
        ++component_size[label];
    }
    g.isolated_.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        g.isolated_[v] = component_size[g.component_of_[v]] == 1 ? 1 : 0;
    }
    g.grid_ = std::move(grid);
    return g;
}

std::vector<Edge> GeometricGraph::edges() const {
    std::vector<Edge> out;
    const auto& gr = *grid_;
    const auto push = [&out](std::uint32_t u, std::uint32_t v) { out.emplace_back(std::min(u, v), std::max(u, v)); };
    for (std::size_t c = 0; c < gr.num_cells(); ++c) {
        const auto members = gr.members(c);
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                if (gr.adjacent(members[i], members[j])) {
                    push(members[i], members[j]);
                }
            }
        }
        for (const auto& offset : gr.forward_offsets) {
            const auto other = gr.neighbour(c, offset);
            if (other < 0) {
                continue;
            }
            for (auto u : members) {
                for (auto v : gr.members(static_cast<std::size_t>(other))) {
                    if (gr.adjacent(u, v)) {
                        push(u, v);
                    }
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void GeometricGraph::write_edge_csv(std::ostream& out) const {
    out << "u,v\n";
    for (const auto& [u, v] : edges()) {
        out << u << ',' << v << '\n';
    }
}

ConnectivityStats stats(const GeometricGraph& g, std::span<const double> probe_radii) {
    for (double R : probe_radii) {
        if (!(R >= 0.0)) {
            throw UsageError("probe radii must be non-negative");
        }
    }
    ConnectivityStats s;
    const auto& cloud = g.cloud();
    const std::size_t n = g.num_vertices();
    s.num_components = g.num_components();
    s.is_connected = s.num_components <= 1;
    for (double R : probe_radii) {
        s.isolated_within.emplace_back(R, 0);
    }
    if (n == 0) {
        s.empty_graph = true;
        return s;
    }
    std::vector<double> norms(n);
    for (std::size_t v = 0; v < n; ++v) {
        norms[v] = cloud.norm(v);
    }
    // std::min_element keeps the first minimum, i.e. the lowest index on ties.
    s.origin_vertex = static_cast<std::size_t>(std::distance(norms.begin(), std::min_element(norms.begin(), norms.end())));
    const auto origin_label = g.component_of()[s.origin_vertex];
    for (std::size_t v = 0; v < n; ++v) {
        s.r_max = std::max(s.r_max, norms[v]);
        if (g.component_of()[v] == origin_label) {
            s.r_c = std::max(s.r_c, norms[v]);
        }
        if (g.isolated(v)) {
            for (auto& [R, count] : s.isolated_within) {
                count += norms[v] <= R ? 1 : 0;
            }
        }
    }
    return s;
}

}  // namespace rgg
