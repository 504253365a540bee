#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <thread>

#include "sentinel/error.hpp"
#include "sentinel/replay.hpp"
#include "sentinel/session.hpp"

using namespace sentinel;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json shipped_doc() {
    std::ifstream in(std::string(SENTINEL_SCENARIO_DIR) + "/pearl_harbor.json");
    return json::parse(in);
}

std::shared_ptr<const Scenario> shipped() {
    static auto sc = load_scenario(shipped_doc());
    return sc;
}

std::string code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

fs::path temp_root(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("sentinel-test-" + tag + "-" + std::to_string(std::random_device{}()));
    fs::remove_all(p);
    return p;
}

Session stepped(int periods) {
    auto s = new_session(shipped(), "x");
    for (int t = 0; t < periods; ++t) s = step_session(s, shipped()->script[static_cast<std::size_t>(t)]).first;
    return s;
}

}  // namespace

TEST_CASE("a fresh session carries the prior and a recommendation") {
    auto s = new_session(shipped(), "a");
    CHECK(s.period() == 0);
    REQUIRE(s.recommendations.size() == 1);
    REQUIRE(s.latest.has_value());
    auto m = belief_marginals(s.belief);
    for (std::size_t j = 0; j < m.p_d.size(); ++j) CHECK(m.p_d[j] == doctest::Approx(shipped()->prior_d[j]));
}

TEST_CASE("stepping is pure and rejects gaps") {
    auto s = new_session(shipped(), "a");
    auto [next, res] = step_session(s, shipped()->script[0]);
    CHECK(s.period() == 0);
    CHECK(next.period() == 1);
    CHECK(res.recommendation.has_value());
    CHECK(code_of([&] { step_session(next, shipped()->script[2]); }) == "NonConsecutivePeriod");
}

TEST_CASE("session agrees with replay") {
    auto r = run_replay(shipped(), {});
    auto s = stepped(20);
    REQUIRE(s.recommendations.size() == r.recommendations.size());
    for (std::size_t k = 0; k < s.recommendations.size(); ++k) {
        CHECK(s.recommendations[k].alert_type == r.recommendations[k].alert_type);
        CHECK(s.recommendations[k].tau == r.recommendations[k].tau);
        CHECK(s.recommendations[k].expected_disutility == r.recommendations[k].expected_disutility);
    }
}

TEST_CASE("attack_within is a cumulative projection") {
    auto s = stepped(3);
    auto a = attack_within(*shipped(), s.belief, 14);
    auto proj = session_projection(s, s.period() + 14);
    for (std::size_t t = 0; t < a.size(); ++t)
        CHECK(a[t] == doctest::Approx(proj.cumulative(t, s.period() + 14)).epsilon(1e-12));
}

TEST_CASE("empty override reproduces the parent") {
    auto parent = stepped(6);
    auto b = what_if(parent, Overrides{}, "b");
    CHECK(b.belief.weight == parent.belief.weight);
    CHECK(b.belief.log_likelihood == parent.belief.log_likelihood);
    REQUIRE(b.recommendations.size() == parent.recommendations.size());
    for (std::size_t k = 0; k < b.recommendations.size(); ++k) {
        CHECK(b.recommendations[k].tau == parent.recommendations[k].tau);
        CHECK(b.recommendations[k].expected_disutility == parent.recommendations[k].expected_disutility);
    }
}

TEST_CASE("branch from an earlier period with hypothetical observations") {
    auto parent = stepped(6);
    Overrides ov;
    ov.at_period = 3;
    ov.observations.push_back(parse_observation(json{{"period", 4}, {"signal", "RADIO"}, {"value", "INTERCEPT"}, {"sources", {"COM14", "COM16"}}}));
    auto b = what_if(parent, ov, "b");
    CHECK(b.period() == 4);
    CHECK(b.branch_period == 3);
    CHECK(b.observations.back().reports[0].value == "INTERCEPT");
    CHECK(parent.period() == 6);
    CHECK(parent.observations[3].reports[0].value == "SILENCE");
    Overrides gap;
    gap.observations.push_back(parse_observation(json{{"period", 9}, {"reports", json::array()}}));
    CHECK(code_of([&] { what_if(parent, gap, "c"); }) == "InvalidOverride");
    Overrides late;
    late.at_period = 7;
    CHECK(code_of([&] { what_if(parent, late, "c"); }) == "InvalidOverride");
}

TEST_CASE("cost overrides") {
    auto parent = stepped(2);
    Overrides ov;
    ov.costs = json{{"scale", 1000.0}};
    auto b = what_if(parent, ov, "b");
    REQUIRE(b.latest.has_value());
    CHECK(b.latest->alert_type == parent.latest->alert_type);
    CHECK(b.latest->tau == parent.latest->tau);
    CHECK(b.latest->expected_disutility == doctest::Approx(1000.0 * parent.latest->expected_disutility).epsilon(1e-12));
    for (std::size_t k = 0; k < b.recommendations.size(); ++k) CHECK(b.recommendations[k].tau == parent.recommendations[k].tau);

    CHECK(code_of([&] { apply_cost_overrides(*shipped(), shipped()->costs, json{{"scale", -1}}); }) == "InvalidOverride");
    CHECK(code_of([&] { apply_cost_overrides(*shipped(), shipped()->costs, json{{"alert_costs", {{"NOPE", 1}}}}); }) ==
          "InvalidOverride");
    CHECK(code_of([&] { apply_cost_overrides(*shipped(), shipped()->costs, json{{"failure_costs", {{"NOPE", 1}}}}); }) ==
          "InvalidOverride");
    auto cm = apply_cost_overrides(*shipped(), shipped()->costs, json{{"failure_costs", {{"OAHU", 5.0}}}});
    CHECK(cm.failure_costs[shipped()->realization_index("OAHU/DELAYED")] == 5.0);
    CHECK(code_of([] { parse_overrides(json{{"bogus", 1}}); }) == "InvalidOverride");
}

TEST_CASE("service persists sessions and reloads them identically") {
    const auto root = temp_root("persist");
    std::string sid, bid;
    json belief_before, history_before, branch_belief;
    {
        SessionService svc(root, 3);
        const auto scid = svc.upload_scenario(shipped_doc())["id"].get<std::string>();
        sid = svc.create_session(scid)["id"];
        for (int t = 1; t <= 7; ++t) svc.observe(sid, observation_to_json(shipped()->script[static_cast<std::size_t>(t - 1)]));
        belief_before = svc.belief(sid);
        history_before = svc.history(sid);
        bid = svc.branch(sid, json{{"at_period", 5}, {"costs", {{"scale", 2.0}}}, {"description", "what if"}})["id"];
        branch_belief = svc.belief(bid);
        CHECK(fs::exists(root / "sessions" / sid / "snapshot.json"));
    }
    SessionService again(root, 3);
    CHECK(again.belief(sid) == belief_before);
    CHECK(again.history(sid)["recommendations"] == history_before["recommendations"]);
    CHECK(again.belief(bid) == branch_belief);
    CHECK(again.history(bid)["parent"] == sid);
    CHECK(again.history(bid)["description"] == "what if");
    // new ids never collide with stored ones
    const auto fresh = again.create_session(shipped()->hash)["id"].get<std::string>();
    CHECK(fresh != sid);
    CHECK(fresh != bid);
    // continuing after the reload matches continuing in memory
    auto next = again.observe(sid, json{{"signal", "RADIO"}, {"value", "SILENCE"}, {"sources", {"COM14", "COM16"}}});
    CHECK(next["belief"]["period"] == 8);
    auto mem = stepped(8);
    CHECK(again.recommendation(sid)["expected_disutility"].get<double>() == mem.latest->expected_disutility);
    fs::remove_all(root);
}

TEST_CASE("service errors") {
    SessionService svc;
    CHECK(code_of([&] { svc.belief("s999999"); }) == "NotFound");
    CHECK(code_of([&] { svc.create_session("nope"); }) == "NotFound");
    const auto scid = svc.upload_scenario(shipped_doc())["id"].get<std::string>();
    const auto sid = svc.create_session(scid)["id"].get<std::string>();
    CHECK(code_of([&] { svc.observe(sid, json{{"period", 3}, {"reports", json::array()}}); }) == "NonConsecutivePeriod");
    CHECK(svc.belief(sid)["period"] == 0);
}

TEST_CASE("concurrent sessions do not interfere") {
    SessionService svc;
    const auto scid = svc.upload_scenario(shipped_doc())["id"].get<std::string>();
    std::vector<std::string> ids;
    for (int k = 0; k < 4; ++k) ids.push_back(svc.create_session(scid)["id"]);
    std::vector<std::thread> pool;
    for (const auto& id : ids)
        pool.emplace_back([&svc, id] {
            for (int t = 1; t <= 5; ++t) svc.observe(id, json{{"signal", "RADIO"}, {"value", "SILENCE"}, {"sources", {"COM14"}}});
        });
    for (auto& th : pool) th.join();
    for (const auto& id : ids) {
        CHECK(svc.belief(id)["period"] == 5);
        CHECK(svc.belief(id)["p_target"] == svc.belief(ids[0])["p_target"]);
    }
}
