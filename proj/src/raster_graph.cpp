#include "sentinel/raster_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include <json.hpp>

#include "sentinel/error.hpp"

namespace sentinel {

using nlohmann::json;

RasterGraph::RasterGraph(std::vector<int> ids, std::vector<std::vector<int>> neighbor_ids,
                         std::vector<int> blocked_ids, std::vector<NodeLabel> labels)
    : ids_(std::move(ids)), labels_(std::move(labels)) {
    if (neighbor_ids.size() != ids_.size())
        throw Error("DimensionMismatch", "neighbor lists do not match node count");
    if (labels_.empty()) labels_.resize(ids_.size());
    if (labels_.size() != ids_.size()) throw Error("DimensionMismatch", "labels do not match node count");
    for (std::size_t i = 0; i < ids_.size(); ++i)
        if (!index_.emplace(ids_[i], i).second)
            throw Error("DuplicateNode", "raster " + std::to_string(ids_[i]) + " declared twice",
                        "nodes[" + std::to_string(i) + "]");

    adj_.assign(ids_.size(), {});
    std::vector<std::set<std::size_t>> sets(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        for (int nb : neighbor_ids[i]) {
            auto it = index_.find(nb);
            if (it == index_.end())
                throw Error("UnknownNodeReference",
                            "raster " + std::to_string(ids_[i]) + " lists unknown neighbor " + std::to_string(nb),
                            "nodes[" + std::to_string(i) + "].neighbors");
            if (it->second == i)
                throw Error("SelfLoop", "raster " + std::to_string(nb) + " lists itself as a neighbor",
                            "nodes[" + std::to_string(i) + "].neighbors");
            if (sets[i].insert(it->second).second) adj_[i].push_back(it->second);
        }
    }
    for (std::size_t i = 0; i < ids_.size(); ++i)
        for (auto j : adj_[i])
            if (!sets[j].count(i))
                throw Error("AsymmetricAdjacency",
                            "raster " + std::to_string(ids_[i]) + " lists " + std::to_string(ids_[j]) +
                                " but not the reverse",
                            "nodes[" + std::to_string(j) + "].neighbors");

    blocked_.assign(ids_.size(), false);
    for (int b : blocked_ids) {
        auto it = index_.find(b);
        if (it == index_.end())
            throw Error("UnknownNodeReference", "blocked raster " + std::to_string(b) + " does not exist",
                        "blocked");
        blocked_[it->second] = true;
    }
}

std::size_t RasterGraph::index_of(int id) const {
    auto it = index_.find(id);
    if (it == index_.end())
        throw Error("UnknownNodeReference", "raster " + std::to_string(id) + " does not exist");
    return it->second;
}

std::vector<int> RasterGraph::blocked_ids() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < ids_.size(); ++i)
        if (blocked_[i]) out.push_back(ids_[i]);
    return out;
}

std::vector<int> RasterGraph::distances_to(const std::vector<std::size_t>& targets) const {
    std::vector<int> dist(ids_.size(), -1);
    std::deque<std::size_t> queue;
    for (auto t : targets)
        if (!blocked_[t] && dist[t] < 0) {
            dist[t] = 0;
            queue.push_back(t);
        }
    while (!queue.empty()) {
        auto u = queue.front();
        queue.pop_front();
        for (auto v : adj_[u])
            if (!blocked_[v] && dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
    }
    return dist;
}

RasterGraph load_raster_graph(const json& data) {
    if (!data.is_object() || !data.contains("nodes") || !data["nodes"].is_array())
        throw Error("ValidationError", "graph needs a 'nodes' array", "nodes");
    std::vector<int> ids;
    std::vector<std::vector<int>> nbrs;
    std::vector<NodeLabel> labels;
    const auto& nodes = data["nodes"];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        const std::string at = "nodes[" + std::to_string(i) + "]";
        try {
            ids.push_back(n.at("id").get<int>());
            nbrs.push_back(n.value("neighbors", std::vector<int>{}));
            NodeLabel lab;
            lab.region = n.value("region", std::string{});
            if (n.contains("centroid")) {
                const auto& c = n["centroid"];
                lab.centroid = std::make_pair(c.at(0).get<double>(), c.at(1).get<double>());
            }
            labels.push_back(std::move(lab));
        } catch (const json::exception& e) {
            throw Error("ValidationError", e.what(), at);
        }
    }
    std::vector<int> blocked = data.value("blocked", std::vector<int>{});
    return RasterGraph(std::move(ids), std::move(nbrs), std::move(blocked), std::move(labels));
}

json raster_graph_to_json(const RasterGraph& g) {
    json nodes = json::array();
    for (std::size_t i = 0; i < g.size(); ++i) {
        json n{{"id", g.id(i)}};
        std::vector<int> nb;
        for (auto j : g.neighbors(i)) nb.push_back(g.id(j));
        n["neighbors"] = nb;
        if (!g.label(i).region.empty()) n["region"] = g.label(i).region;
        if (g.label(i).centroid) n["centroid"] = {g.label(i).centroid->first, g.label(i).centroid->second};
        nodes.push_back(std::move(n));
    }
    return json{{"nodes", nodes}, {"blocked", g.blocked_ids()}};
}

std::optional<int> shortest_hops(const RasterGraph& g, int from, const std::vector<int>& to) {
    if (to.empty()) throw Error("InvalidArgument", "target set is empty");
    const auto src = g.index_of(from);
    if (g.blocked(src)) throw Error("BlockedOrigin", "raster " + std::to_string(from) + " is blocked");
    std::vector<std::size_t> targets;
    for (int t : to) targets.push_back(g.index_of(t));
    int d = g.distances_to(targets)[src];
    if (d < 0) return std::nullopt;
    return d;
}

int lattice_id(const LatticeSpec& spec, int row, int col) { return row * spec.cols + col + 1; }

RasterGraph generate_lattice(const LatticeSpec& spec, const std::vector<int>& blocked) {
    if (spec.rows < 1 || spec.cols < 1) throw Error("InvalidArgument", "lattice needs rows, cols >= 1");
    if (!(spec.side_nm > 0 && spec.period_hours > 0 && spec.speed_knots > 0))
        throw Error("InvalidArgument", "lattice scale parameters must be positive");
    std::vector<int> ids;
    std::vector<std::vector<int>> nbrs;
    std::vector<NodeLabel> labels;
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const bool up = (r + c) % 2 == 0;
            ids.push_back(lattice_id(spec, r, c));
            std::vector<int> nb;
            if (c > 0) nb.push_back(lattice_id(spec, r, c - 1));
            if (c + 1 < spec.cols) nb.push_back(lattice_id(spec, r, c + 1));
            const int rr = up ? r - 1 : r + 1;
            if (rr >= 0 && rr < spec.rows) nb.push_back(lattice_id(spec, rr, c));
            nbrs.push_back(std::move(nb));
            NodeLabel lab;
            const double h = spec.side_nm * std::sqrt(3.0) / 2.0;
            lab.centroid = std::make_pair(spec.side_nm * (0.5 * c + 0.5), h * (r + (up ? 1.0 / 3.0 : 2.0 / 3.0)));
            labels.push_back(std::move(lab));
        }
    }
    return RasterGraph(std::move(ids), std::move(nbrs), blocked, std::move(labels));
}

}  // namespace sentinel
