#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles/oracles.hpp"
#include "sentinel/error.hpp"
#include "sentinel/scenario.hpp"

using namespace sentinel;

TEST_CASE("two-state chain is geometric") {
    for (double h : {0.0, 0.3, 0.9}) {
        Eigen::MatrixXd P(2, 2);
        P << h, 1 - h, 0, 1;
        auto m = oracle::model_from_dense(P, {false, true});
        Eigen::VectorXd x0(2);
        x0 << 1, 0;
        auto fp = first_passage({x0, 3}, m, 23);
        CHECK(fp.origin == 3);
        CHECK(fp.at(3) == 0.0);
        for (int k = 1; k <= 20; ++k) {
            const double expect = std::pow(h, k - 1) * (1 - h);
            CHECK(std::abs(fp.at(3 + k) - (expect < 1e-15 ? 0.0 : expect)) < 1e-15);
        }
        CHECK(fp.at(24) == 0.0);
        CHECK(std::abs(fp.residual - std::pow(h, 20)) < 1e-15);
    }
}

TEST_CASE("mass starting in the trapping set is dropped") {
    Eigen::MatrixXd P(2, 2);
    P << 0.5, 0.5, 0, 1;
    auto m = oracle::model_from_dense(P, {false, true});
    Eigen::VectorXd x0(2);
    x0 << 0.4, 0.6;
    auto fp = first_passage({x0, 0}, m, 50);
    CHECK(fp.total() + fp.residual == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(fp.at(1) == doctest::Approx(0.2));
}

TEST_CASE("bad arguments") {
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2);
    auto m = oracle::model_from_dense(P);
    CHECK_THROWS(first_passage({Eigen::VectorXd::Ones(3) / 3, 0}, m, 5));
    CHECK_THROWS(first_passage({Eigen::VectorXd::Ones(2) / 2, 5}, m, 5));
}

TEST_CASE("property: recursion equals explicit matrix powers") {
    std::mt19937_64 rng(41);
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t n = 3 + static_cast<std::size_t>(inst % 8);
        auto P = oracle::random_stochastic(rng, n);
        std::vector<bool> trap(n, false);
        trap[0] = true;
        if (inst % 3 == 0) trap[n - 1] = true;
        for (std::size_t k = 0; k < n; ++k)
            if (trap[k]) {
                P.row(static_cast<Eigen::Index>(k)).setZero();
                P(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
            }
        auto p0 = oracle::random_row(rng, n);
        Eigen::VectorXd x0 = Eigen::Map<Eigen::VectorXd>(p0.data(), static_cast<Eigen::Index>(n));
        auto fp = first_passage({x0, 0}, oracle::model_from_dense(P, trap), 25);
        auto ref = oracle::first_passage_by_powers(x0, P, trap, 25);
        double mass = 0.0;
        for (int t = 1; t <= 25; ++t) {
            CHECK(std::abs(fp.at(t) - ref[static_cast<std::size_t>(t - 1)]) < 1e-12);
            mass += fp.at(t);
        }
        double transient = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (!trap[k]) transient += x0[static_cast<Eigen::Index>(k)];
        CHECK(std::abs(mass + fp.residual - transient) < 1e-12);
    }
}

TEST_CASE("property: recursion agrees with Monte Carlo") {
    std::mt19937_64 rng(42);
    const long paths = 200000;
    for (int inst = 0; inst < 5; ++inst) {
        const std::size_t n = 4 + static_cast<std::size_t>(inst);
        auto P = oracle::random_stochastic(rng, n, false);
        std::vector<bool> trap(n, false);
        trap[0] = true;
        P.row(0).setZero();
        P(0, 0) = 1.0;
        Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        x0[static_cast<Eigen::Index>(n - 1)] = 1.0;
        auto fp = first_passage({x0, 0}, oracle::model_from_dense(P, trap), 10);
        auto mc = oracle::first_passage_monte_carlo(x0, P, trap, 10, paths, 1000 + static_cast<std::uint64_t>(inst));
        for (int t = 1; t <= 10; ++t) {
            const double p = fp.at(t);
            const double se = std::sqrt(std::max(p * (1 - p), 1e-12) / static_cast<double>(paths));
            CHECK(std::abs(mc[static_cast<std::size_t>(t - 1)] - p) <= 3 * se + 1e-12);
        }
    }
}

TEST_CASE("property: lower holding dominates higher holding") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.0, 0.9);
    for (int inst = 0; inst < 60; ++inst) {
        auto g = oracle::random_graph(rng, 6 + static_cast<std::size_t>(inst % 15), 0.3, 0.05);
        std::size_t t0 = 0;
        while (t0 < g.size() && g.blocked(t0)) ++t0;
        if (t0 + 1 >= g.size()) continue;
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        auto fast = build_transition_matrix(g, {g.id(t0)}, a);
        auto slow = build_transition_matrix(g, {g.id(t0)}, b);
        Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
        for (std::size_t k = 0; k < g.size(); ++k)
            if (!g.blocked(k)) x0[static_cast<Eigen::Index>(k)] = 1.0;
        x0 /= x0.sum();
        auto f = first_passage({x0, 0}, fast, 30);
        auto s = first_passage({x0, 0}, slow, 30);
        for (int t = 1; t <= 30; ++t) CHECK(f.cumulative(t) >= s.cumulative(t) - 1e-12);
    }
}

TEST_CASE("marginal attack distribution sums realizations per target") {
    FirstPassageDistribution a{0, 3, {0.1, 0.2, 0.3}, 0.4, ""}, b{0, 3, {0.5, 0.0, 0.0}, 0.5, ""};
    auto m = marginal_attack_distribution({0.25, 0.75}, {a, b}, {"X", "X"}, {"Y", "X"});
    CHECK(m.targets == std::vector<std::string>{"Y", "X"});
    CHECK(m.at(m.target_index("X"), 1) == doctest::Approx(0.025 + 0.375));
    CHECK(m.cumulative(m.target_index("Y"), 3) == 0.0);
    CHECK(m.cumulative(1, 3) == doctest::Approx(0.25 * 0.6 + 0.75 * 0.5));
    FirstPassageDistribution c{1, 3, {0.1, 0.1}, 0.8, ""};
    CHECK_THROWS_AS(marginal_attack_distribution({0.5, 0.5}, {a, c}, {"X", "X"}), Error);
    CHECK_THROWS(marginal_attack_distribution({0.5, 0.6}, {a, b}, {"X", "X"}));
}

TEST_CASE("shipped scenario: IMMEDIATE dominates DELAYED for every target") {
    auto sc = load_scenario_file(std::string(SENTINEL_SCENARIO_DIR) + "/pearl_harbor.json");
    for (const auto& target : sc->targets) {
        auto fi = first_passage(sc->p0, sc->models[sc->realization_index(target + "/IMMEDIATE")], 60);
        auto fd = first_passage(sc->p0, sc->models[sc->realization_index(target + "/DELAYED")], 60);
        for (int t = 1; t <= 60; ++t) CHECK(fi.cumulative(t) >= fd.cumulative(t) - 1e-12);
    }
}
