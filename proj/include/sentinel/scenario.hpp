#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/alert.hpp"
#include "sentinel/crisis_network.hpp"
#include "sentinel/inference.hpp"
#include "sentinel/raster_graph.hpp"
#include "sentinel/transition.hpp"

namespace sentinel {

inline constexpr int kSchemaMajor = 1;

struct Realization {
    std::string label;
    std::string target;
    std::string immediacy;
    double holding = 0.0;
};

struct Scenario {
    nlohmann::json document;
    std::string hash;
    std::string name;
    int periods_per_day = 2;
    std::string start_date;  // YYYY-MM-DD of period 0, optional
    bool start_pm = false;

    RasterGraph graph;
    std::vector<std::string> targets;  // declaration order
    std::map<std::string, std::vector<int>> trapping_sets;
    std::vector<Realization> realizations;

    std::optional<CrisisNetwork> network;
    Evidence evidence;
    std::string d_variable;
    std::optional<std::vector<double>> canonical_pd;
    std::vector<double> prior_d;  // what the filter starts from

    CredibilitySpace credibility;
    std::vector<SignalModel> signals;
    StateDistribution p0;
    CostModel costs;
    std::vector<Observation> script;

    std::vector<TransitionModel> models;  // one per realization
    std::vector<std::string> warnings;

    std::vector<std::string> target_of_j() const;
    std::size_t realization_index(const std::string& label) const;
    // "1941-12-02 AM" style label when a start date is present
    std::string period_label(int period) const;
};

// Throws Error with code SchemaVersionMismatch or ValidationError (with a
// field path), or a component error prefixed with its location.
std::shared_ptr<const Scenario> load_scenario(const nlohmann::json& doc);
std::shared_ptr<const Scenario> load_scenario_file(const std::filesystem::path& path);

Observation parse_observation(const nlohmann::json& j);
nlohmann::json observation_to_json(const Observation& o);

std::string fnv1a_hex(const std::string& text);

}  // namespace sentinel
