#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/first_passage.hpp"
#include "sentinel/inference.hpp"

namespace sentinel {

enum class DisutilityKind { Linear, Exponential };

// Which arrivals count as failures for an alert of type i issued at t' when
// the decision is taken at t.
//   LeadWindow: arrivals in [t', t' + l] only.
//   Exposure:   arrivals in (t, t' + l]; everything before the alert plus the
//               lead window.  Identical to LeadWindow for t' = t.
// A missing lead time means the alert does not cover that realization; the
// window then runs to the horizon.
enum class FailureWindow { LeadWindow, Exposure };

struct CostModel {
    std::vector<std::string> alert_types;
    std::vector<double> alert_costs;                       // q_i > 0
    std::vector<double> failure_costs;                     // v_j >= 0
    std::vector<std::vector<std::optional<int>>> lead_times;  // [i][j]
    double daily_discount_rate = 0.0;
    int periods_per_day = 1;
    DisutilityKind disutility = DisutilityKind::Linear;
    double risk_coefficient = 0.0;  // gamma, exponential only
    int horizon = 40;
    FailureWindow window = FailureWindow::Exposure;

    void validate(std::size_t n_realizations) const;
    double per_period_rate() const;
    double U(double x) const;
    double U_inv(double u) const;
    // largest failure cost among realizations alert i covers
    double covered_failure_cost(std::size_t i) const;
    CostModel scaled(double factor) const;
};

double present_value(double cost, int tau, const CostModel& cm);

// Certain equivalent of alert i at time t_alert against realization j, with
// fp the first-passage distribution for j from the decision period.
double certain_equivalent(std::size_t i, int t_alert, std::size_t j, const FirstPassageDistribution& fp,
                          const CostModel& cm, std::vector<std::string>* warnings = nullptr);

struct AlertRecommendation {
    int period = 0;
    std::size_t alert = 0;
    std::string alert_type;
    int tau = 0;
    bool issue_now = false;
    double expected_disutility = 0.0;
    std::vector<std::vector<double>> surface;  // [i][tau - period]
    std::vector<double> certain_equivalents;   // per j at (alert, tau)
    std::vector<std::string> warnings;
};

// Direct scan over every alert type and every tau in [t, T].  Ties (relative
// 1e-12) go to the earliest tau, then to the alert covering the larger
// failure cost, then to declaration order.
AlertRecommendation recommend_alert(int period, const std::vector<double>& p_d,
                                    const std::vector<FirstPassageDistribution>& fp, const CostModel& cm);

// First-passage distributions per realization from the current belief.
std::vector<FirstPassageDistribution> realization_first_passage(const BeliefState& belief,
                                                                const std::vector<TransitionModel>& models,
                                                                int horizon);

AlertRecommendation recommend_alert(const BeliefState& belief, const std::vector<TransitionModel>& models,
                                    const CostModel& cm);

// evaluation period, alert type, candidate tau, expected disutility
void write_scan_csv_header(std::ostream& out);
void write_scan_csv_rows(std::ostream& out, const AlertRecommendation& rec, const CostModel& cm);

}  // namespace sentinel
