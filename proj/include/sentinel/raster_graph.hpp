#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sentinel {

struct NodeLabel {
    std::string region;
    std::optional<std::pair<double, double>> centroid;
};

// Raster ids are arbitrary integers; internally every node has a dense index
// in declaration order.
class RasterGraph {
public:
    RasterGraph() = default;
    RasterGraph(std::vector<int> ids, std::vector<std::vector<int>> neighbor_ids, std::vector<int> blocked_ids,
                std::vector<NodeLabel> labels = {});

    std::size_t size() const { return ids_.size(); }
    int id(std::size_t index) const { return ids_[index]; }
    const std::vector<int>& ids() const { return ids_; }
    std::size_t index_of(int id) const;
    bool contains(int id) const { return index_.count(id) != 0; }
    const std::vector<std::size_t>& neighbors(std::size_t index) const { return adj_[index]; }
    bool blocked(std::size_t index) const { return blocked_[index]; }
    const NodeLabel& label(std::size_t index) const { return labels_[index]; }
    std::vector<int> blocked_ids() const;

    // Multi-source BFS distances (in hops) from every node to the nearest
    // node of the set; -1 where unreachable.  Blocked nodes are never entered.
    std::vector<int> distances_to(const std::vector<std::size_t>& targets) const;

private:
    std::vector<int> ids_;
    std::map<int, std::size_t> index_;
    std::vector<std::vector<std::size_t>> adj_;
    std::vector<bool> blocked_;
    std::vector<NodeLabel> labels_;
};

// {"nodes": [{"id", "neighbors", "region"?, "centroid"?}], "blocked": [...]}
RasterGraph load_raster_graph(const nlohmann::json& data);
nlohmann::json raster_graph_to_json(const RasterGraph& g);

std::optional<int> shortest_hops(const RasterGraph& g, int from, const std::vector<int>& to);

struct LatticeSpec {
    int rows = 1;
    int cols = 1;
    double side_nm = 648.0;
    double period_hours = 12.0;
    double speed_knots = 27.0;

    // a raster side covers two periods of travel at full speed
    bool speed_consistent() const { return std::abs(side_nm - speed_knots * period_hours * 2.0) < 1e-9; }
};

// Triangles are numbered row-major from 1; cell (r, c) points up when r + c is
// even and shares its horizontal edge with the row below, otherwise with the
// row above.
RasterGraph generate_lattice(const LatticeSpec& spec, const std::vector<int>& blocked = {});
int lattice_id(const LatticeSpec& spec, int row, int col);

}  // namespace sentinel
