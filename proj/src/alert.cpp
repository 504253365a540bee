#include "sentinel/alert.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sentinel/error.hpp"
#include "sentinel/util.hpp"

namespace sentinel {

void CostModel::validate(std::size_t n_realizations) const {
    const auto n_alerts = alert_types.size();
    if (n_alerts == 0) throw Error("ValidationError", "no alert types", "costs.alert_types");
    if (alert_costs.size() != n_alerts || lead_times.size() != n_alerts)
        throw Error("DimensionMismatch", "alert costs and lead times need one entry per alert type",
                    "costs.alert_types");
    if (failure_costs.size() != n_realizations)
        throw Error("DimensionMismatch", "one failure cost per realization needed", "costs.failure_costs");
    for (std::size_t i = 0; i < n_alerts; ++i) {
        const std::string at = "costs.alert_types[" + std::to_string(i) + "]";
        if (!(alert_costs[i] > 0.0) || !std::isfinite(alert_costs[i]))
            throw Error("ValidationError", "alert costs must be positive", at + ".cost");
        if (lead_times[i].size() != n_realizations)
            throw Error("DimensionMismatch", "lead times need one entry per realization", at + ".lead_times");
        for (const auto& l : lead_times[i])
            if (l && *l < 0) throw Error("ValidationError", "lead times must be nonnegative", at + ".lead_times");
    }
    for (double v : failure_costs)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw Error("ValidationError", "failure costs must be nonnegative", "costs.failure_costs");
    if (!(daily_discount_rate > -1.0)) throw Error("ValidationError", "discount rate must exceed -1", "costs.daily_discount_rate");
    if (periods_per_day < 1) throw Error("ValidationError", "periods_per_day must be >= 1", "costs.periods_per_day");
    if (disutility == DisutilityKind::Exponential && !(risk_coefficient > 0.0))
        throw Error("ValidationError", "exponential disutility needs a positive risk coefficient",
                    "costs.disutility.gamma");
    if (horizon < 1) throw Error("ValidationError", "horizon must be positive", "costs.horizon");
}

double CostModel::per_period_rate() const {
    return std::pow(1.0 + daily_discount_rate, 1.0 / periods_per_day) - 1.0;
}

double CostModel::U(double x) const {
    if (disutility == DisutilityKind::Linear) return x;
    return std::expm1(risk_coefficient * x) / risk_coefficient;
}

double CostModel::U_inv(double u) const {
    if (disutility == DisutilityKind::Linear) return u;
    return std::log1p(risk_coefficient * u) / risk_coefficient;
}

double CostModel::covered_failure_cost(std::size_t i) const {
    double best = 0.0;
    for (std::size_t j = 0; j < failure_costs.size(); ++j)
        if (lead_times[i][j]) best = std::max(best, failure_costs[j]);
    return best;
}

CostModel CostModel::scaled(double factor) const {
    CostModel out = *this;
    for (auto& q : out.alert_costs) q *= factor;
    for (auto& v : out.failure_costs) v *= factor;
    return out;
}

double present_value(double cost, int tau, const CostModel& cm) {
    if (tau < 0) throw Error("InvalidArgument", "period must be nonnegative");
    // (1 + r)^(-tau) with (1 + r)^ppd = 1 + alpha
    return cost * std::pow(1.0 + cm.daily_discount_rate, -static_cast<double>(tau) / cm.periods_per_day);
}

double certain_equivalent(std::size_t i, int t_alert, std::size_t j, const FirstPassageDistribution& fp,
                          const CostModel& cm, std::vector<std::string>* warnings) {
    if (t_alert < fp.origin || t_alert > cm.horizon)
        throw Error("InvalidArgument", "alert time outside [decision period, horizon]");
    const auto& lead = cm.lead_times[i][j];
    int lo = cm.window == FailureWindow::Exposure ? fp.origin + 1 : t_alert;
    int hi = cm.horizon;
    if (lead) {
        const long end = static_cast<long>(t_alert) + *lead;
        if (end > cm.horizon) {
            if (warnings)
                warnings->push_back("LeadTimeBeyondHorizon: alert " + cm.alert_types[i] + " at " +
                                    std::to_string(t_alert) + " needs " + std::to_string(*lead) +
                                    " periods; window truncated at " + std::to_string(cm.horizon));
        } else {
            hi = static_cast<int>(end);
        }
    }
    double expected = 0.0;
    for (int s = std::max(lo, fp.origin + 1); s <= std::min(hi, fp.horizon); ++s) {
        const double p = fp.at(s);
        if (p > 0.0) expected += p * cm.U(present_value(cm.failure_costs[j], s, cm));
    }
    return present_value(cm.alert_costs[i], t_alert, cm) + cm.U_inv(expected);
}

AlertRecommendation recommend_alert(int period, const std::vector<double>& p_d,
                                    const std::vector<FirstPassageDistribution>& fp, const CostModel& cm) {
    cm.validate(p_d.size());
    if (fp.size() != p_d.size()) throw Error("DimensionMismatch", "one first-passage distribution per realization");
    if (period >= cm.horizon)
        throw Error("HorizonExceeded", "decision period " + std::to_string(period) + " is not before the horizon",
                    "costs.horizon");
    for (const auto& f : fp)
        if (f.origin != period || f.horizon < cm.horizon)
            throw Error("InconsistentHorizons", "first-passage distributions must start at the decision period "
                                                "and reach the horizon");

    AlertRecommendation rec;
    rec.period = period;
    const auto n_alerts = cm.alert_types.size();
    const auto width = static_cast<std::size_t>(cm.horizon - period + 1);
    rec.surface.assign(n_alerts, std::vector<double>(width, 0.0));
    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < n_alerts; ++i) {
        for (int tau = period; tau <= cm.horizon; ++tau) {
            double ed = 0.0;
            for (std::size_t j = 0; j < p_d.size(); ++j) {
                if (p_d[j] == 0.0) continue;
                ed += p_d[j] * cm.U(certain_equivalent(i, tau, j, fp[j], cm, &warnings));
            }
            rec.surface[i][static_cast<std::size_t>(tau - period)] = ed;
        }
    }

    double best = rec.surface[0][0];
    for (const auto& row : rec.surface)
        for (double x : row) best = std::min(best, x);
    const double tol = 1e-12 * std::max(std::abs(best), 1e-300);
    bool found = false;
    for (std::size_t k = 0; k < width && !found; ++k) {
        for (std::size_t i = 0; i < n_alerts; ++i) {
            if (rec.surface[i][k] - best > tol) continue;
            if (!found || cm.covered_failure_cost(i) > cm.covered_failure_cost(rec.alert)) {
                rec.alert = i;
                rec.tau = period + static_cast<int>(k);
                found = true;
            }
        }
    }
    rec.alert_type = cm.alert_types[rec.alert];
    rec.issue_now = rec.tau == period;
    rec.expected_disutility = rec.surface[rec.alert][static_cast<std::size_t>(rec.tau - period)];
    for (std::size_t j = 0; j < p_d.size(); ++j) rec.certain_equivalents.push_back(certain_equivalent(rec.alert, rec.tau, j, fp[j], cm));

    // one line per distinct truncation message is plenty
    std::sort(warnings.begin(), warnings.end());
    warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
    if (!warnings.empty())
        rec.warnings.push_back(std::to_string(warnings.size()) +
                               " (alert, time) pairs have lead windows truncated at the horizon");
    return rec;
}

std::vector<FirstPassageDistribution> realization_first_passage(const BeliefState& belief,
                                                                const std::vector<TransitionModel>& models,
                                                                int horizon) {
    if (models.size() != belief.n_d) throw Error("DimensionMismatch", "one transition model per realization needed");
    std::vector<FirstPassageDistribution> out;
    for (std::size_t j = 0; j < belief.n_d; ++j) {
        StateDistribution s{belief.state_given_d(j), belief.period};
        out.push_back(first_passage(s, models[j], horizon));
    }
    return out;
}

AlertRecommendation recommend_alert(const BeliefState& belief, const std::vector<TransitionModel>& models,
                                    const CostModel& cm) {
    if (belief.period >= cm.horizon)
        throw Error("HorizonExceeded", "decision period " + std::to_string(belief.period) +
                                           " is not before the horizon", "costs.horizon");
    auto fp = realization_first_passage(belief, models, cm.horizon);
    return recommend_alert(belief.period, belief_marginals(belief).p_d, fp, cm);
}

void write_scan_csv_header(std::ostream& out) { out << "period,alert_type,tau,expected_disutility\n"; }

void write_scan_csv_rows(std::ostream& out, const AlertRecommendation& rec, const CostModel& cm) {
    for (std::size_t i = 0; i < rec.surface.size(); ++i)
        for (std::size_t k = 0; k < rec.surface[i].size(); ++k)
            out << rec.period << ',' << cm.alert_types[i] << ',' << rec.period + static_cast<int>(k) << ','
                << fmt_double(rec.surface[i][k]) << '\n';
}

}  // namespace sentinel
