#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/scenario.hpp"
#include "sentinel/session.hpp"

namespace sentinel {

struct ReplayOptions {
    std::vector<int> projection_days{2, 4, 7};
    int joint_horizon = 60;
};

struct ReplayResult {
    std::vector<RecommendationSummary> recommendations;  // periods 0..n
    std::optional<RecommendationSummary> first_issue;
    std::vector<std::vector<double>> p_d;                 // [period][j]
    std::vector<std::vector<std::vector<double>>> projections;  // [period][day option][target]
    std::vector<std::string> files;
};

// Steps a fresh session through the scenario's script and writes
//   first_passage.csv    target,j,tau,probability,cumulative    (from p0)
//   attack_joint.csv     target,tau,probability,cumulative      (from p0)
//   belief.csv           period,j,target,immediacy,probability
//   credibility.csv      period,r,probability
//   projections.csv      period,target,days,probability
//   scan.csv             period,alert_type,tau,expected_disutility
//   recommendations.csv  period,label,alert_type,tau,issue_now,expected_disutility
//   summary.json
// Output directory may be empty to skip writing.
ReplayResult run_replay(std::shared_ptr<const Scenario> scenario, const std::filesystem::path& out,
                        const ReplayOptions& opt = {});

// period, j, r, weight  /  period, raster, pi
void write_belief_weights_csv(std::ostream& out, const Session& s);
void write_state_csv(std::ostream& out, const Session& s);

}  // namespace sentinel
