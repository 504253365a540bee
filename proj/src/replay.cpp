#include "sentinel/replay.hpp"

#include <fstream>

#include "sentinel/error.hpp"
#include "sentinel/util.hpp"

namespace sentinel {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class CsvFile {
public:
    CsvFile(const fs::path& dir, const std::string& name, const char* header, std::vector<std::string>& files)
        : enabled_(!dir.empty()) {
        if (!enabled_) return;
        out_.open(dir / name);
        if (!out_) throw Error("IoError", "cannot write " + (dir / name).string());
        out_ << header << '\n';
        files.push_back(name);
    }
    std::ostream* stream() { return enabled_ ? &out_ : nullptr; }
    template <class T>
    CsvFile& operator<<(const T& x) {
        if (enabled_) out_ << x;
        return *this;
    }

private:
    bool enabled_;
    std::ofstream out_;
};

}  // namespace

ReplayResult run_replay(std::shared_ptr<const Scenario> scenario, const fs::path& out, const ReplayOptions& opt) {
    const auto& sc = *scenario;
    if (sc.script.empty()) throw Error("ValidationError", "scenario has no scripted observations", "script");
    if (!out.empty()) fs::create_directories(out);
    ReplayResult res;

    Session s = new_session(scenario, "replay");
    const auto targets = sc.target_of_j();

    // from p0, before any signal
    {
        std::vector<std::string> labels;
        for (const auto& r : sc.realizations) labels.push_back(r.label);
        auto fp = realization_first_passage(s.belief, sc.models, sc.costs.horizon);
        if (!out.empty()) {
            std::ofstream f(out / "first_passage.csv");
            write_first_passage_csv(f, targets, labels, fp);
            res.files.push_back("first_passage.csv");
        }
        auto fpj = realization_first_passage(s.belief, sc.models, opt.joint_horizon);
        auto joint = marginal_attack_distribution(belief_marginals(s.belief).p_d, fpj, targets, sc.targets);
        CsvFile f(out, "attack_joint.csv", "target,tau,probability,cumulative", res.files);
        for (std::size_t t = 0; t < joint.targets.size(); ++t) {
            double cum = 0.0;
            for (int tau = joint.origin + 1; tau <= joint.horizon; ++tau) {
                cum += joint.at(t, tau);
                f << joint.targets[t] << ',' << tau << ',' << fmt_double(joint.at(t, tau)) << ',' << fmt_double(cum) << '\n';
            }
        }
    }

    CsvFile belief(out, "belief.csv", "period,j,target,immediacy,probability", res.files);
    CsvFile cred(out, "credibility.csv", "period,r,probability", res.files);
    CsvFile proj(out, "projections.csv", "period,target,days,probability", res.files);
    CsvFile scan(out, "scan.csv", "period,alert_type,tau,expected_disutility", res.files);
    CsvFile recs(out, "recommendations.csv", "period,label,alert_type,tau,issue_now,expected_disutility", res.files);

    auto record = [&](const Session& cur) {
        const auto m = belief_marginals(cur.belief);
        const int t = cur.period();
        res.p_d.push_back(m.p_d);
        for (std::size_t j = 0; j < m.p_d.size(); ++j)
            belief << t << ',' << sc.realizations[j].label << ',' << sc.realizations[j].target << ','
                   << sc.realizations[j].immediacy << ',' << fmt_double(m.p_d[j]) << '\n';
        for (std::size_t r = 0; r < m.p_r.size(); ++r)
            cred << t << ',' << sc.credibility.label(r) << ',' << fmt_double(m.p_r[r]) << '\n';
        std::vector<std::vector<double>> per_day;
        for (int days : opt.projection_days) {
            auto within = attack_within(sc, cur.belief, days * sc.periods_per_day);
            for (std::size_t k = 0; k < within.size(); ++k)
                proj << t << ',' << sc.targets[k] << ',' << days << ',' << fmt_double(within[k]) << '\n';
            per_day.push_back(std::move(within));
        }
        res.projections.push_back(std::move(per_day));
        if (cur.latest) {
            const auto& rec = *cur.latest;
            if (auto* os = scan.stream()) write_scan_csv_rows(*os, rec, cur.costs);
            recs << t << ',' << sc.period_label(t) << ',' << rec.alert_type << ',' << rec.tau << ','
                 << (rec.issue_now ? 1 : 0) << ',' << fmt_double(rec.expected_disutility) << '\n';
            const auto summary = cur.recommendations.back();
            res.recommendations.push_back(summary);
            if (rec.issue_now && !res.first_issue) res.first_issue = summary;
        }
    };

    record(s);
    for (const auto& obs : sc.script) {
        s = step_session(s, obs).first;
        record(s);
    }

    if (!out.empty()) {
        json summary{{"scenario", sc.name},
                     {"scenario_hash", sc.hash},
                     {"periods", sc.script.size()},
                     {"horizon", sc.costs.horizon},
                     {"final_log_likelihood", s.belief.log_likelihood},
                     {"first_issue_now", nullptr},
                     {"files", res.files},
                     {"warnings", sc.warnings}};
        if (res.first_issue) {
            summary["first_issue_now"] = {{"period", res.first_issue->period},
                                          {"label", sc.period_label(res.first_issue->period)},
                                          {"alert_type", res.first_issue->alert_type},
                                          {"expected_disutility", res.first_issue->expected_disutility}};
        }
        const auto& last = res.recommendations.back();
        summary["final_recommendation"] = {{"period", last.period}, {"alert_type", last.alert_type}, {"tau", last.tau},
                                           {"issue_now", last.issue_now}};
        std::ofstream f(out / "summary.json");
        f << summary.dump(2) << '\n';
        res.files.push_back("summary.json");
    }
    return res;
}

void write_belief_weights_csv(std::ostream& out, const Session& s) {
    out << "period,j,r,weight\n";
    const auto& sc = *s.scenario;
    for (std::size_t j = 0; j < s.belief.n_d; ++j)
        for (std::size_t r = 0; r < s.belief.n_r; ++r)
            out << s.period() << ',' << sc.realizations[j].label << ',' << sc.credibility.label(r) << ','
                << fmt_double(s.belief.w(j, r)) << '\n';
}

void write_state_csv(std::ostream& out, const Session& s) {
    out << "period,raster,pi\n";
    const auto m = belief_marginals(s.belief);
    for (Eigen::Index k = 0; k < m.pi.size(); ++k)
        out << s.period() << ',' << s.scenario->graph.id(static_cast<std::size_t>(k)) << ',' << fmt_double(m.pi[k]) << '\n';
}

}  // namespace sentinel
