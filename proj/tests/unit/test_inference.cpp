#include <doctest.h>

#include <cmath>
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

Observation obs_of(const oracle::ToyFilter& f, int period, std::size_t value) {
    return {period, {{"sig", f.signal.values()[value], {"S0", "S1"}}}};
}

BeliefState run(const oracle::ToyFilter& f, const std::vector<std::size_t>& values) {
    auto b = init_belief({f.p0, 0}, f.prior_d, f.space.prior());
    for (std::size_t t = 0; t < values.size(); ++t)
        b = advance_belief(b, f.models, {f.signal}, f.space, obs_of(f, static_cast<int>(t + 1), values[t]));
    return b;
}

}  // namespace

TEST_CASE("credibility space enumerates last source fastest") {
    CredibilitySpace s({{"A", {"F", "NF"}, {0.7, 0.3}}, {"B", {"F", "NF"}, {0.9, 0.1}}});
    REQUIRE(s.size() == 4);
    CHECK(s.label(1) == "A=F;B=NF");
    CHECK(s.prior()[1] == doctest::Approx(0.07));
    CHECK(s.prior()[2] == doctest::Approx(0.27));
    CHECK(s.source_index("B") == 1u);
    CHECK_FALSE(s.source_index("C").has_value());
}

TEST_CASE("first matching rule wins and default rows fill unlisted classes") {
    CredibilitySpace s({{"A", {"F", "NF"}, {0.5, 0.5}}, {"B", {"F", "NF"}, {0.5, 0.5}}});
    LikelihoodRule both_down{{{"A", "NF"}, {"B", "NF"}}, {}, std::vector<double>{0.5, 0.5}};
    LikelihoodRule normal{{}, {{"home", {0.8, 0.2}}}, std::vector<double>{0.3, 0.7}};
    SignalModel m("R", {"S", "I"}, {"home", "away"}, {0, 1, 1}, {both_down, normal}, s);
    CHECK(m.likelihood(0, 0, 0) == 0.8);
    CHECK(m.likelihood(0, 1, 1) == 0.3);
    CHECK(m.likelihood(0, 0, 3) == 0.5);
    CHECK(m.emission(0, 1)[0] == doctest::Approx(0.2));
    CHECK(m.emission(0, 1)[2] == doctest::Approx(0.7));
    LikelihoodRule bad{{}, {{"home", {0.8, 0.3}}}, std::vector<double>{0.5, 0.5}};
    CHECK_THROWS(SignalModel("R", {"S", "I"}, {"home", "away"}, {0, 1, 1}, {bad}, s));
    LikelihoodRule partial{{{"A", "F"}}, {{"home", {0.8, 0.2}}}, std::nullopt};
    CHECK_THROWS(SignalModel("R", {"S", "I"}, {"home", "away"}, {0, 1, 1}, {partial}, s));
}

TEST_CASE("observation errors leave the belief untouched") {
    std::mt19937_64 rng(51);
    auto f = oracle::random_toy_filter(rng, 3, 2, 2);
    auto b = init_belief({f.p0, 0}, f.prior_d, f.space.prior());
    CHECK(code_of([&] { advance_belief(b, f.models, {f.signal}, f.space, obs_of(f, 2, 0)); }) == "NonConsecutivePeriod");
    Observation bad{1, {{"other", "v0", {"S0"}}}};
    CHECK(code_of([&] { advance_belief(b, f.models, {f.signal}, f.space, bad); }) == "UnregisteredSignalType");
    bad = {1, {{"sig", "v0", {"S9"}}}};
    CHECK(code_of([&] { advance_belief(b, f.models, {f.signal}, f.space, bad); }) == "UnknownSource");
    bad = {1, {{"sig", "nope", {"S0"}}}};
    CHECK(code_of([&] { advance_belief(b, f.models, {f.signal}, f.space, bad); }) == "UnknownSignalValue");
    CHECK(b.period == 0);
}

TEST_CASE("impossible observation is reported") {
    CredibilitySpace s({{"A", {"F"}, {1.0}}});
    LikelihoodRule r{{}, {}, std::vector<double>{1.0, 0.0}};
    SignalModel m("R", {"S", "I"}, {"all"}, {0, 0}, {r}, s);
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2);
    auto b = init_belief({Eigen::Vector2d(0.5, 0.5), 0}, {1.0}, s.prior());
    Observation o{1, {{"R", "I", {"A"}}}};
    CHECK(code_of([&] { advance_belief(b, {oracle::model_from_dense(P)}, {m}, s, o); }) == "ImpossibleObservation");
}

TEST_CASE("empty observation only propagates") {
    std::mt19937_64 rng(52);
    auto f = oracle::random_toy_filter(rng, 4, 2, 2);
    auto b0 = init_belief({f.p0, 0}, f.prior_d, f.space.prior());
    auto b1 = advance_belief(b0, f.models, {f.signal}, f.space, {1, {}});
    CHECK(b1.log_likelihood == doctest::Approx(0.0));
    auto m = belief_marginals(b1);
    for (std::size_t j = 0; j < 2; ++j) CHECK(m.p_d[j] == doctest::Approx(f.prior_d[j]));
}

TEST_CASE("property: filter equals path enumeration") {
    std::mt19937_64 rng(53);
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t n = 2 + static_cast<std::size_t>(inst % 3);
        auto f = oracle::random_toy_filter(rng, n, 2, 3);
        std::uniform_int_distribution<std::size_t> val(0, 2);
        std::vector<std::size_t> values;
        for (int t = 0, T = 1 + inst % 3; t < T; ++t) values.push_back(val(rng));
        auto truth = oracle::enumerate_filter(f, values);
        auto b = run(f, values);
        auto m = belief_marginals(b);
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) CHECK(std::abs(m.pi[k] - truth.pi[k]) < 1e-12);
        for (std::size_t j = 0; j < m.p_d.size(); ++j) CHECK(std::abs(m.p_d[j] - truth.p_d[j]) < 1e-12);
        for (std::size_t r = 0; r < m.p_r.size(); ++r) CHECK(std::abs(m.p_r[r] - truth.p_r[r]) < 1e-12);
        CHECK(std::abs(b.log_likelihood - truth.log_likelihood) < 1e-10);
    }
}

TEST_CASE("property: filter equals the re-run forward recursion") {
    std::mt19937_64 rng(54);
    for (int inst = 0; inst < 50; ++inst) {
        auto f = oracle::random_toy_filter(rng, 6, 3, 2);
        std::uniform_int_distribution<std::size_t> val(0, 1);
        std::vector<std::size_t> values;
        for (int t = 0; t < 12; ++t) values.push_back(val(rng));
        auto ref = oracle::reiterated_forward(f, values);
        auto m = belief_marginals(run(f, values));
        for (Eigen::Index k = 0; k < 6; ++k) CHECK(std::abs(m.pi[k] - ref.pi[k]) < 1e-10);
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(m.p_d[j] - ref.p_d[j]) < 1e-10);
    }
}

TEST_CASE("property: conditional states and weights stay normalized over long runs") {
    std::mt19937_64 rng(55);
    auto f = oracle::random_toy_filter(rng, 5, 2, 2);
    std::vector<std::size_t> values(300, 0);
    auto b = run(f, values);
    double s = 0.0;
    for (double w : b.weight) s += w;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& x : b.cond) CHECK(x.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isfinite(b.log_likelihood));
}
