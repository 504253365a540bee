#include <doctest.h>

#include <fstream>
#include <functional>
#include <random>

#include "oracles/oracles.hpp"
#include "sentinel/error.hpp"

using namespace sentinel;

namespace {

std::string code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST_CASE("graph construction rejects malformed adjacency") {
    CHECK(code_of([] { RasterGraph({1, 1}, {{}, {}}, {}); }) == "DuplicateNode");
    CHECK(code_of([] { RasterGraph({1, 2}, {{3}, {}}, {}); }) == "UnknownNodeReference");
    CHECK(code_of([] { RasterGraph({1, 2}, {{1}, {}}, {}); }) == "SelfLoop");
    CHECK(code_of([] { RasterGraph({1, 2}, {{2}, {}}, {}); }) == "AsymmetricAdjacency");
    CHECK(code_of([] { RasterGraph({1, 2}, {{2}, {1}}, {5}); }) == "UnknownNodeReference");
}

TEST_CASE("lattice orientation and numbering") {
    LatticeSpec spec{2, 3};
    CHECK(spec.speed_consistent());
    auto g = generate_lattice(spec);
    REQUIRE(g.size() == 6);
    // rows count upward: (0,0) points up and its base is the lattice edge
    auto n0 = g.neighbors(g.index_of(lattice_id(spec, 0, 0)));
    std::set<int> ids0;
    for (auto k : n0) ids0.insert(g.id(k));
    CHECK(ids0 == std::set<int>{2});
    // (0,1) points down and shares its top edge with (1,1)
    std::set<int> ids1;
    for (auto k : g.neighbors(g.index_of(2))) ids1.insert(g.id(k));
    CHECK(ids1 == std::set<int>{1, 3, 5});
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.neighbors(i).size() <= 3);
}

TEST_CASE("shortest hops avoid blocked nodes") {
    // 1 - 2 - 3 - 4 and 1 - 5 - 6 - 7 - 4
    RasterGraph g({1, 2, 3, 4, 5, 6, 7}, {{2, 5}, {1, 3}, {2, 4}, {3, 7}, {1, 6}, {5, 7}, {6, 4}}, {});
    CHECK(shortest_hops(g, 1, {4}) == 3);
    RasterGraph b({1, 2, 3, 4, 5, 6, 7}, {{2, 5}, {1, 3}, {2, 4}, {3, 7}, {1, 6}, {5, 7}, {6, 4}}, {3});
    CHECK(shortest_hops(b, 1, {4}) == 4);
    CHECK(code_of([&] { shortest_hops(b, 3, {4}); }) == "BlockedOrigin");
    RasterGraph cut({1, 2, 3}, {{2}, {1, 3}, {2}}, {2});
    CHECK_FALSE(shortest_hops(cut, 1, {3}).has_value());
}

TEST_CASE("json round trip") {
    auto g = generate_lattice({3, 4}, {5});
    auto h = load_raster_graph(raster_graph_to_json(g));
    CHECK(h.ids() == g.ids());
    CHECK(h.blocked_ids() == g.blocked_ids());
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(h.neighbors(i) == g.neighbors(i));
}

TEST_CASE("property: BFS distances equal Floyd-Warshall") {
    std::mt19937_64 rng(21);
    for (int inst = 0; inst < 100; ++inst) {
        auto g = oracle::random_graph(rng, 4 + static_cast<std::size_t>(inst % 12), 0.25, 0.15);
        auto fw = oracle::floyd_warshall(g);
        for (std::size_t t = 0; t < g.size(); ++t) {
            if (g.blocked(t)) continue;
            auto d = g.distances_to({t});
            for (std::size_t s = 0; s < g.size(); ++s) {
                if (g.blocked(s)) continue;
                CHECK(d[s] == fw[s][t]);
                auto h = shortest_hops(g, g.id(s), {g.id(t)});
                CHECK(h.value_or(-1) == fw[s][t]);
            }
        }
    }
}

TEST_CASE("property: lattice distances equal Floyd-Warshall") {
    std::mt19937_64 rng(22);
    LatticeSpec spec{6, 9};
    std::vector<int> blocked;
    std::uniform_int_distribution<int> pick(1, 54);
    for (int k = 0; k < 6; ++k) blocked.push_back(pick(rng));
    std::sort(blocked.begin(), blocked.end());
    blocked.erase(std::unique(blocked.begin(), blocked.end()), blocked.end());
    auto g = generate_lattice(spec, blocked);
    auto fw = oracle::floyd_warshall(g);
    for (std::size_t t = 0; t < g.size(); t += 7) {
        if (g.blocked(t)) continue;
        auto d = g.distances_to({t});
        for (std::size_t s = 0; s < g.size(); ++s)
            if (!g.blocked(s)) CHECK(d[s] == fw[s][t]);
    }
}

TEST_CASE("shipped graph: 191 is nine hops from Oahu") {
    auto doc = nlohmann::json::parse(std::ifstream(std::string(SENTINEL_SCENARIO_DIR) + "/pearl_harbor.json"));
    auto g = load_raster_graph(doc["graph"]);
    std::vector<int> oahu = doc["graph"]["trapping_sets"]["OAHU"].get<std::vector<int>>();
    CHECK(shortest_hops(g, 191, oahu) == 9);
    auto fw = oracle::floyd_warshall(g);
    int best = -1;
    for (int o : oahu) {
        const int d = fw[g.index_of(191)][g.index_of(o)];
        if (d >= 0 && (best < 0 || d < best)) best = d;
    }
    CHECK(best == 9);
}
