#include <doctest.h>

#include <fstream>
#include <functional>

#include "sentinel/error.hpp"
#include "sentinel/scenario.hpp"

using namespace sentinel;
using nlohmann::json;

namespace {

json shipped() {
    std::ifstream in(std::string(SENTINEL_SCENARIO_DIR) + "/pearl_harbor.json");
    return json::parse(in);
}

Error error_of(const json& doc) {
    try {
        load_scenario(doc);
    } catch (const Error& e) {
        return e;
    }
    return Error("", "");
}

}  // namespace

TEST_CASE("shipped scenario loads") {
    auto sc = load_scenario(shipped());
    CHECK(sc->name == "pearl_harbor_1941");
    CHECK(sc->graph.size() == 260);
    CHECK(sc->realizations.size() == 12);
    CHECK(sc->models.size() == 12);
    CHECK(sc->script.size() == 20);
    CHECK(sc->costs.alert_types.size() == 6);
    CHECK(sc->network.has_value());
    double s = 0.0;
    for (double p : sc->prior_d) s += p;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sc->period_label(1) == "1941-11-27 AM");
    CHECK(sc->period_label(19) == "1941-12-06 AM");
    CHECK(sc->hash == load_scenario(shipped())->hash);
}

TEST_CASE("network posterior agrees with the canonical table") {
    auto sc = load_scenario(shipped());
    REQUIRE(sc->canonical_pd.has_value());
    for (std::size_t j = 0; j < sc->prior_d.size(); ++j)
        CHECK(std::abs(sc->prior_d[j] - (*sc->canonical_pd)[j]) < 1e-6);
}

TEST_CASE("validation errors name the field") {
    auto doc = shipped();
    doc["schema_version"] = "2.0";
    CHECK(error_of(doc).code() == "SchemaVersionMismatch");

    doc = shipped();
    doc["realizations"][0]["holding"] = 1.5;
    CHECK(error_of(doc).code() == "ValidationError");
    CHECK(error_of(doc).path().find("realizations") == 0);

    doc = shipped();
    doc["costs"]["failure_costs"]["ATLANTIS"] = 1.0;
    auto e = error_of(doc);
    CHECK(e.code() == "ValidationError");
    CHECK(std::string(e.what()).find("ATLANTIS") != std::string::npos);

    doc = shipped();
    doc["p0"] = json{{"191", 0.5}};
    CHECK(error_of(doc).path() == "p0");

    doc = shipped();
    doc["script"][3]["period"] = 9;
    CHECK(error_of(doc).path() == "script[3].period");

    doc = shipped();
    doc["graph"]["nodes"][0]["neighbors"].push_back(99999);
    CHECK(error_of(doc).code() == "UnknownNodeReference");
}

TEST_CASE("canonical table and network must agree") {
    auto doc = shipped();
    double a = doc["canonical_pd"]["OAHU/IMMEDIATE"], b = doc["canonical_pd"]["MANILA_BAY/IMMEDIATE"];
    doc["canonical_pd"]["OAHU/IMMEDIATE"] = b;
    doc["canonical_pd"]["MANILA_BAY/IMMEDIATE"] = a;
    CHECK(error_of(doc).code() == "CanonicalMismatch");
}

TEST_CASE("canonical table alone is enough") {
    auto doc = shipped();
    doc.erase("crisis_network");
    auto sc = load_scenario(doc);
    CHECK_FALSE(sc->network.has_value());
    CHECK(sc->prior_d[sc->realization_index("OAHU/IMMEDIATE")] ==
          doc["canonical_pd"]["OAHU/IMMEDIATE"].get<double>());
}

TEST_CASE("uniform start and cross-product realizations") {
    auto doc = shipped();
    doc["p0"] = "uniform";
    json targets = json::array();
    for (const auto& [t, _] : doc["graph"]["trapping_sets"].items()) targets.push_back(t);
    doc["realizations"] = {{"targets", targets},
                           {"immediacy", {{{"label", "IMMEDIATE"}, {"holding", 0.05}}, {{"label", "DELAYED"}, {"holding", 0.4}}}}};
    auto sc = load_scenario(doc);
    CHECK(sc->realizations.size() == 2 * targets.size());
    double s = sc->p0.p.sum();
    CHECK(s == doctest::Approx(1.0));
    for (std::size_t k = 0; k < sc->graph.size(); ++k)
        if (sc->graph.blocked(k)) CHECK(sc->p0.p[static_cast<Eigen::Index>(k)] == 0.0);
}

TEST_CASE("observation json round trip") {
    auto o = parse_observation(json{{"period", 3}, {"signal", "RADIO"}, {"value", "SILENCE"}, {"sources", {"COM14"}}});
    CHECK(o.period == 3);
    REQUIRE(o.reports.size() == 1);
    CHECK(o.reports[0].sources == std::vector<std::string>{"COM14"});
    auto back = parse_observation(observation_to_json(o));
    CHECK(back.reports[0].value == "SILENCE");
    CHECK_THROWS_AS(parse_observation(json::array()), Error);
}

TEST_CASE("fnv1a is stable") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
