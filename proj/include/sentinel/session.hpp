#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/alert.hpp"
#include "sentinel/first_passage.hpp"
#include "sentinel/inference.hpp"
#include "sentinel/scenario.hpp"

namespace sentinel {

struct RecommendationSummary {
    int period = 0;
    std::string alert_type;
    int tau = 0;
    bool issue_now = false;
    double expected_disutility = 0.0;
};

struct Session {
    std::string id;
    std::shared_ptr<const Scenario> scenario;
    CostModel costs;  // scenario costs unless a branch overrode them
    nlohmann::json cost_overrides = nlohmann::json::array();  // applied in order
    BeliefState belief;
    std::vector<Observation> observations;
    std::vector<RecommendationSummary> recommendations;  // one per period from 0
    std::optional<AlertRecommendation> latest;
    std::string parent_id;
    int branch_period = -1;
    std::string description;
    std::string created;
    std::string updated;

    int period() const { return belief.period; }
};

struct StepResult {
    BeliefMarginals marginals;
    AttackDistribution projection;
    std::optional<AlertRecommendation> recommendation;
};

Session new_session(std::shared_ptr<const Scenario> scenario, std::string id);

// Returns the advanced session; the input is left untouched.
std::pair<Session, StepResult> step_session(const Session& session, const Observation& obs);

// Recommendation at the current belief, or nothing once the horizon is reached.
std::optional<AlertRecommendation> current_recommendation(const Session& s);

AttackDistribution session_projection(const Session& s, int horizon);

// P(attack on each target within the next `periods` periods)
std::vector<double> attack_within(const Scenario& sc, const BeliefState& b, int periods);

struct Overrides {
    std::optional<int> at_period;            // branch from this earlier period
    std::vector<Observation> observations;   // hypothetical, applied in order
    nlohmann::json costs = nlohmann::json::object();  // {scale, alert_costs, failure_costs}
    std::string description;
};

Overrides parse_overrides(const nlohmann::json& j);
CostModel apply_cost_overrides(const Scenario& sc, const CostModel& base, const nlohmann::json& costs);
Session what_if(const Session& parent, const Overrides& ov, std::string new_id);

nlohmann::json belief_json(const Session& s);
nlohmann::json projection_json(const Session& s, int horizon);
nlohmann::json recommendation_json(const Session& s, const AlertRecommendation& rec);
nlohmann::json history_json(const Session& s);

// Thread-safe registry of scenarios and sessions, optionally backed by a
// data directory:
//   scenarios/<id>.json
//   sessions/<id>/events.jsonl      append-only
//   sessions/<id>/snapshot.json     belief at the latest snapshot period
class SessionService {
public:
    explicit SessionService(std::optional<std::filesystem::path> root = std::nullopt, int snapshot_every = 5);

    nlohmann::json upload_scenario(const nlohmann::json& doc);
    std::shared_ptr<const Scenario> scenario(const std::string& id);
    nlohmann::json create_session(const std::string& scenario_id);
    nlohmann::json observe(const std::string& id, const nlohmann::json& body);
    nlohmann::json belief(const std::string& id);
    nlohmann::json projection(const std::string& id, int horizon);
    nlohmann::json recommendation(const std::string& id);
    nlohmann::json branch(const std::string& id, const nlohmann::json& body);
    nlohmann::json history(const std::string& id);
    Session snapshot(const std::string& id);
    std::vector<std::string> session_ids();

    static std::filesystem::path default_root();

private:
    struct Entry {
        std::mutex m;
        Session s;
    };
    std::shared_ptr<Entry> entry(const std::string& id);
    std::string next_id();
    void persist_create(const Session& s, const nlohmann::json& event);
    void persist_step(const Session& s, const Observation& obs);
    std::shared_ptr<Entry> load_from_disk(const std::string& id);

    std::optional<std::filesystem::path> root_;
    int snapshot_every_;
    std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<const Scenario>> scenarios_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    long counter_ = 0;
};

nlohmann::json belief_snapshot_json(const BeliefState& b);
BeliefState belief_from_json(const nlohmann::json& j);

}  // namespace sentinel
