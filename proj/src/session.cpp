#include "sentinel/session.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "sentinel/error.hpp"

namespace sentinel {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string now_utc() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RecommendationSummary summarize(const AlertRecommendation& r) {
    return {r.period, r.alert_type, r.tau, r.issue_now, r.expected_disutility};
}

json summary_json(const RecommendationSummary& r) {
    return {{"period", r.period},
            {"alert_type", r.alert_type},
            {"tau", r.tau},
            {"issue_now", r.issue_now},
            {"expected_disutility", r.expected_disutility}};
}

RecommendationSummary summary_from_json(const json& j) {
    return {j.at("period").get<int>(), j.at("alert_type").get<std::string>(), j.at("tau").get<int>(),
            j.at("issue_now").get<bool>(), j.at("expected_disutility").get<double>()};
}

void record_recommendation(Session& s) {
    s.latest = current_recommendation(s);
    if (s.latest) s.recommendations.push_back(summarize(*s.latest));
}

}  // namespace

Session new_session(std::shared_ptr<const Scenario> scenario, std::string id) {
    if (!scenario) throw Error("InvalidArgument", "no scenario");
    Session s;
    s.id = std::move(id);
    s.costs = scenario->costs;
    s.belief = init_belief(scenario->p0, scenario->prior_d, scenario->credibility.prior());
    s.scenario = std::move(scenario);
    s.created = s.updated = now_utc();
    record_recommendation(s);
    return s;
}

std::optional<AlertRecommendation> current_recommendation(const Session& s) {
    if (s.belief.period >= s.costs.horizon) return std::nullopt;
    return recommend_alert(s.belief, s.scenario->models, s.costs);
}

std::pair<Session, StepResult> step_session(const Session& session, const Observation& obs) {
    Session next = session;
    const auto& sc = *session.scenario;
    next.belief = advance_belief(session.belief, sc.models, sc.signals, sc.credibility, obs);
    next.observations.push_back(obs);
    next.updated = now_utc();
    record_recommendation(next);

    StepResult r;
    r.marginals = belief_marginals(next.belief);
    r.projection = session_projection(next, std::max(next.costs.horizon, next.period() + 1));
    r.recommendation = next.latest;
    return {std::move(next), std::move(r)};
}

AttackDistribution session_projection(const Session& s, int horizon) {
    const auto& sc = *s.scenario;
    if (horizon <= s.period()) throw Error("InvalidArgument", "projection horizon must exceed the current period", "horizon");
    auto fp = realization_first_passage(s.belief, sc.models, horizon);
    return marginal_attack_distribution(belief_marginals(s.belief).p_d, fp, sc.target_of_j(), sc.targets);
}

std::vector<double> attack_within(const Scenario& sc, const BeliefState& b, int periods) {
    auto fp = realization_first_passage(b, sc.models, b.period + periods);
    auto joint = marginal_attack_distribution(belief_marginals(b).p_d, fp, sc.target_of_j(), sc.targets);
    std::vector<double> out;
    for (std::size_t t = 0; t < joint.targets.size(); ++t) out.push_back(joint.cumulative(t, b.period + periods));
    return out;
}

Overrides parse_overrides(const json& j) {
    Overrides ov;
    if (j.is_null()) return ov;
    if (!j.is_object()) throw Error("InvalidOverride", "overrides must be an object");
    for (const auto& [k, v] : j.items())
        if (k != "at_period" && k != "observations" && k != "costs" && k != "description")
            throw Error("InvalidOverride", "unknown override '" + k + "'", k);
    if (j.contains("at_period")) {
        if (!j["at_period"].is_number_integer()) throw Error("InvalidOverride", "at_period must be an integer", "at_period");
        ov.at_period = j["at_period"].get<int>();
    }
    if (j.contains("observations")) {
        const auto& obs = j["observations"];
        if (!obs.is_array()) throw Error("InvalidOverride", "observations must be a list", "observations");
        for (std::size_t k = 0; k < obs.size(); ++k) {
            try {
                ov.observations.push_back(parse_observation(obs[k]));
            } catch (const Error& e) {
                throw Error("InvalidOverride", e.what(), "observations[" + std::to_string(k) + "]" +
                                                             (e.path().empty() ? "" : "." + e.path()));
            }
        }
    }
    if (j.contains("costs")) {
        if (!j["costs"].is_object()) throw Error("InvalidOverride", "costs must be an object", "costs");
        ov.costs = j["costs"];
    }
    ov.description = j.value("description", std::string{});
    return ov;
}

CostModel apply_cost_overrides(const Scenario& sc, const CostModel& base, const json& costs) {
    CostModel cm = base;
    for (const auto& [k, v] : costs.items()) {
        if (k == "scale") {
            if (!v.is_number() || !(v.get<double>() > 0.0))
                throw Error("InvalidOverride", "scale must be a positive number", "costs.scale");
            cm = cm.scaled(v.get<double>());
        } else if (k == "alert_costs") {
            for (const auto& [id, q] : v.items()) {
                auto it = std::find(cm.alert_types.begin(), cm.alert_types.end(), id);
                if (it == cm.alert_types.end())
                    throw Error("InvalidOverride", "unknown alert type '" + id + "'", "costs.alert_costs." + id);
                if (!q.is_number()) throw Error("InvalidOverride", "cost must be a number", "costs.alert_costs." + id);
                cm.alert_costs[static_cast<std::size_t>(it - cm.alert_types.begin())] = q.get<double>();
            }
        } else if (k == "failure_costs") {
            for (const auto& [key, fv] : v.items()) {
                bool hit = false;
                if (!fv.is_number()) throw Error("InvalidOverride", "cost must be a number", "costs.failure_costs." + key);
                for (std::size_t j = 0; j < sc.realizations.size(); ++j)
                    if (sc.realizations[j].label == key || sc.realizations[j].target == key) {
                        cm.failure_costs[j] = fv.get<double>();
                        hit = true;
                    }
                if (!hit) throw Error("InvalidOverride", "unknown target '" + key + "'", "costs.failure_costs." + key);
            }
        } else {
            throw Error("InvalidOverride", "unknown cost override '" + k + "'", "costs." + k);
        }
    }
    try {
        cm.validate(sc.realizations.size());
    } catch (const Error& e) {
        throw Error("InvalidOverride", e.what(), e.path());
    }
    return cm;
}

Session what_if(const Session& parent, const Overrides& ov, std::string new_id) {
    // Branches are rebuilt from period 0 so that a branch reloaded from its
    // event log is bit-identical to the one created here.
    const int at = ov.at_period.value_or(parent.period());
    if (at < 0 || at > parent.period())
        throw Error("InvalidOverride", "at_period must lie in [0, current period]", "at_period");
    Session b = new_session(parent.scenario, std::move(new_id));
    b.cost_overrides = parent.cost_overrides;
    if (!ov.costs.empty()) b.cost_overrides.push_back(ov.costs);
    if (!b.cost_overrides.empty()) {
        for (const auto& c : b.cost_overrides) b.costs = apply_cost_overrides(*parent.scenario, b.costs, c);
        b.recommendations.clear();
        record_recommendation(b);
    }
    for (int t = 0; t < at; ++t) b = step_session(b, parent.observations[static_cast<std::size_t>(t)]).first;
    for (std::size_t k = 0; k < ov.observations.size(); ++k) {
        try {
            b = step_session(b, ov.observations[k]).first;
        } catch (const Error& e) {
            throw Error(e.code() == "NonConsecutivePeriod" ? "InvalidOverride" : e.code(), e.what(),
                        "observations[" + std::to_string(k) + "]" + (e.path().empty() ? "" : "." + e.path()));
        }
    }
    b.parent_id = parent.id;
    b.branch_period = ov.at_period.value_or(parent.period());
    b.description = ov.description;
    b.created = b.updated = now_utc();
    return b;
}

json belief_json(const Session& s) {
    const auto& sc = *s.scenario;
    const auto m = belief_marginals(s.belief);
    json pi = json::array();
    for (Eigen::Index k = 0; k < m.pi.size(); ++k)
        pi.push_back({{"raster", sc.graph.id(static_cast<std::size_t>(k))}, {"p", m.pi[k]}});
    json pd = json::array();
    json pt = json::object();
    for (const auto& t : sc.targets) pt[t] = 0.0;
    for (std::size_t j = 0; j < sc.realizations.size(); ++j) {
        const auto& r = sc.realizations[j];
        pd.push_back({{"label", r.label}, {"target", r.target}, {"immediacy", r.immediacy}, {"p", m.p_d[j]}});
        pt[r.target] = pt[r.target].get<double>() + m.p_d[j];
    }
    json pr = json::array();
    for (std::size_t r = 0; r < m.p_r.size(); ++r) pr.push_back({{"label", sc.credibility.label(r)}, {"p", m.p_r[r]}});
    return {{"session", s.id},
            {"period", s.period()},
            {"period_label", sc.period_label(s.period())},
            {"log_likelihood", s.belief.log_likelihood},
            {"pi", pi},
            {"p_d", pd},
            {"p_target", pt},
            {"p_r", pr}};
}

json projection_json(const Session& s, int horizon) {
    auto a = session_projection(s, horizon);
    json targets = json::array();
    for (std::size_t t = 0; t < a.targets.size(); ++t) {
        std::vector<double> cum;
        double c = 0.0;
        for (double p : a.prob[t]) cum.push_back(c += p);
        targets.push_back({{"target", a.targets[t]}, {"probability", a.prob[t]}, {"cumulative", cum}});
    }
    return {{"session", s.id}, {"period", s.period()}, {"origin", a.origin}, {"horizon", a.horizon}, {"targets", targets}};
}

json recommendation_json(const Session& s, const AlertRecommendation& rec) {
    const auto& sc = *s.scenario;
    json surface = json::array();
    for (std::size_t i = 0; i < rec.surface.size(); ++i)
        surface.push_back({{"alert_type", s.costs.alert_types[i]}, {"values", rec.surface[i]}});
    json ce = json::object();
    for (std::size_t j = 0; j < rec.certain_equivalents.size(); ++j)
        ce[sc.realizations[j].label] = rec.certain_equivalents[j];
    return {{"session", s.id},
            {"period", rec.period},
            {"alert_type", rec.alert_type},
            {"tau", rec.tau},
            {"tau_label", sc.period_label(rec.tau)},
            {"issue_now", rec.issue_now},
            {"expected_disutility", rec.expected_disutility},
            {"tau_range", {rec.period, rec.period + static_cast<int>(rec.surface.empty() ? 0 : rec.surface[0].size()) - 1}},
            {"surface", surface},
            {"certain_equivalents", ce},
            {"warnings", rec.warnings}};
}

json history_json(const Session& s) {
    json obs = json::array();
    for (const auto& o : s.observations) obs.push_back(observation_to_json(o));
    json recs = json::array();
    for (const auto& r : s.recommendations) recs.push_back(summary_json(r));
    return {{"session", s.id},
            {"scenario", s.scenario->hash},
            {"parent", s.parent_id.empty() ? json(nullptr) : json(s.parent_id)},
            {"branch_period", s.branch_period},
            {"description", s.description},
            {"period", s.period()},
            {"created", s.created},
            {"updated", s.updated},
            {"observations", obs},
            {"recommendations", recs}};
}

json belief_snapshot_json(const BeliefState& b) {
    json cond = json::array();
    for (const auto& v : b.cond) cond.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return {{"period", b.period}, {"n_d", b.n_d}, {"n_r", b.n_r}, {"weight", b.weight},
            {"cond", cond}, {"log_likelihood", b.log_likelihood}};
}

BeliefState belief_from_json(const json& j) {
    BeliefState b;
    b.period = j.at("period").get<int>();
    b.n_d = j.at("n_d").get<std::size_t>();
    b.n_r = j.at("n_r").get<std::size_t>();
    b.weight = j.at("weight").get<std::vector<double>>();
    for (const auto& c : j.at("cond")) {
        auto v = c.get<std::vector<double>>();
        b.cond.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    b.log_likelihood = j.at("log_likelihood").get<double>();
    return b;
}

// ---------------------------------------------------------------------------

SessionService::SessionService(std::optional<fs::path> root, int snapshot_every)
    : root_(std::move(root)), snapshot_every_(std::max(1, snapshot_every)) {
    if (!root_) return;
    fs::create_directories(*root_ / "scenarios");
    fs::create_directories(*root_ / "sessions");
    for (const auto& e : fs::directory_iterator(*root_ / "sessions")) {
        const auto name = e.path().filename().string();
        if (name.size() > 1 && name[0] == 's') counter_ = std::max(counter_, std::strtol(name.c_str() + 1, nullptr, 10));
    }
}

fs::path SessionService::default_root() {
    if (const char* env = std::getenv("SENTINEL_DATA_DIR"); env && *env) return env;
    return fs::path("sentinel-data");
}

std::string SessionService::next_id() {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%06ld", ++counter_);
    return buf;
}

json SessionService::upload_scenario(const json& doc) {
    auto sc = load_scenario(doc);
    {
        std::unique_lock lock(mu_);
        scenarios_[sc->hash] = sc;
    }
    if (root_) {
        std::ofstream out(*root_ / "scenarios" / (sc->hash + ".json"));
        out << doc.dump() << '\n';
    }
    json reals = json::array();
    for (const auto& r : sc->realizations) reals.push_back(r.label);
    return {{"id", sc->hash}, {"name", sc->name}, {"realizations", reals}, {"alert_types", sc->costs.alert_types},
            {"signals", [&] {
                 json a = json::array();
                 for (const auto& s : sc->signals) a.push_back({{"id", s.id()}, {"values", s.values()}});
                 return a;
             }()},
            {"sources", [&] {
                 json a = json::array();
                 for (const auto& s : sc->credibility.sources()) a.push_back(s.id);
                 return a;
             }()},
            {"script_length", sc->script.size()}, {"warnings", sc->warnings}};
}

std::shared_ptr<const Scenario> SessionService::scenario(const std::string& id) {
    {
        std::shared_lock lock(mu_);
        auto it = scenarios_.find(id);
        if (it != scenarios_.end()) return it->second;
    }
    if (root_) {
        const auto path = *root_ / "scenarios" / (id + ".json");
        if (fs::exists(path)) {
            auto sc = load_scenario_file(path);
            std::unique_lock lock(mu_);
            scenarios_[id] = sc;
            return sc;
        }
    }
    throw Error("NotFound", "no scenario '" + id + "'", "scenario_id");
}

void SessionService::persist_create(const Session& s, const json& event) {
    if (!root_) return;
    const auto dir = *root_ / "sessions" / s.id;
    fs::create_directories(dir);
    std::ofstream out(dir / "events.jsonl", std::ios::app);
    out << event.dump() << '\n';
}

void SessionService::persist_step(const Session& s, const Observation& obs) {
    if (!root_) return;
    const auto dir = *root_ / "sessions" / s.id;
    {
        std::ofstream out(dir / "events.jsonl", std::ios::app);
        out << json{{"type", "observe"}, {"observation", observation_to_json(obs)}, {"at", s.updated}}.dump() << '\n';
    }
    if (s.period() % snapshot_every_ == 0) {
        json recs = json::array();
        for (const auto& r : s.recommendations) recs.push_back(summary_json(r));
        json snap{{"period", s.period()}, {"belief", belief_snapshot_json(s.belief)}, {"recommendations", recs}};
        const auto tmp = dir / "snapshot.json.tmp";
        {
            std::ofstream out(tmp);
            out << snap.dump() << '\n';
        }
        fs::rename(tmp, dir / "snapshot.json");
    }
}

std::shared_ptr<SessionService::Entry> SessionService::load_from_disk(const std::string& id) {
    if (!root_) return nullptr;
    const auto dir = *root_ / "sessions" / id;
    std::ifstream in(dir / "events.jsonl");
    if (!in) return nullptr;
    std::string line;
    std::vector<json> events;
    while (std::getline(in, line))
        if (!line.empty()) events.push_back(json::parse(line));
    if (events.empty() || events[0].value("type", "") != "create") throw Error("CorruptSession", "session log has no create event", id);

    const auto& c = events[0];
    auto sc = scenario(c.at("scenario").get<std::string>());
    std::vector<Observation> obs;
    for (const auto& o : c.value("observations", json::array())) obs.push_back(parse_observation(o));
    for (std::size_t k = 1; k < events.size(); ++k) obs.push_back(parse_observation(events[k].at("observation")));

    Session s = new_session(sc, id);
    if (c.contains("cost_overrides") && c["cost_overrides"].is_array() && !c["cost_overrides"].empty()) {
        for (const auto& ov : c["cost_overrides"]) s.costs = apply_cost_overrides(*sc, s.costs, ov);
        s.cost_overrides = c["cost_overrides"];
        s.recommendations.clear();
        record_recommendation(s);
    }
    std::size_t start = 0;
    if (fs::exists(dir / "snapshot.json")) {
        std::ifstream sin(dir / "snapshot.json");
        const json snap = json::parse(sin);
        const int p = snap.at("period").get<int>();
        if (p >= 0 && static_cast<std::size_t>(p) <= obs.size()) {
            s.belief = belief_from_json(snap.at("belief"));
            s.recommendations.clear();
            for (const auto& r : snap.at("recommendations")) s.recommendations.push_back(summary_from_json(r));
            s.observations.assign(obs.begin(), obs.begin() + p);
            s.latest = current_recommendation(s);
            start = static_cast<std::size_t>(p);
        }
    }
    for (std::size_t k = start; k < obs.size(); ++k) s = step_session(s, obs[k]).first;
    s.parent_id = c.value("parent", json(nullptr)).is_null() ? "" : c["parent"].get<std::string>();
    s.branch_period = c.value("branch_period", -1);
    s.description = c.value("description", std::string{});
    s.created = c.value("created", std::string{});
    s.updated = events.back().value("at", s.created);

    auto e = std::make_shared<Entry>();
    e->s = std::move(s);
    return e;
}

std::shared_ptr<SessionService::Entry> SessionService::entry(const std::string& id) {
    {
        std::shared_lock lock(mu_);
        auto it = sessions_.find(id);
        if (it != sessions_.end()) return it->second;
    }
    auto e = load_from_disk(id);
    if (!e) throw Error("NotFound", "no session '" + id + "'", "session_id");
    std::unique_lock lock(mu_);
    return sessions_.emplace(id, e).first->second;
}

json SessionService::create_session(const std::string& scenario_id) {
    auto sc = scenario(scenario_id);
    auto e = std::make_shared<Entry>();
    {
        std::unique_lock lock(mu_);
        e->s = new_session(sc, next_id());
        sessions_[e->s.id] = e;
    }
    std::lock_guard g(e->m);
    persist_create(e->s, {{"type", "create"}, {"id", e->s.id}, {"scenario", sc->hash}, {"parent", nullptr},
                          {"observations", json::array()}, {"created", e->s.created}});
    return {{"id", e->s.id}, {"scenario", sc->hash}, {"period", e->s.period()}};
}

json SessionService::observe(const std::string& id, const json& body) {
    auto e = entry(id);
    std::lock_guard g(e->m);
    json b = body;
    if (b.is_object() && !b.contains("period")) b["period"] = e->s.period() + 1;
    auto [next, step] = step_session(e->s, parse_observation(b));
    persist_step(next, next.observations.back());
    e->s = std::move(next);
    json out{{"belief", belief_json(e->s)}, {"projection", projection_json(e->s, std::max(e->s.costs.horizon, e->s.period() + 1))}};
    out["recommendation"] = step.recommendation ? recommendation_json(e->s, *step.recommendation) : json(nullptr);
    return out;
}

json SessionService::belief(const std::string& id) {
    auto e = entry(id);
    std::lock_guard g(e->m);
    return belief_json(e->s);
}

json SessionService::projection(const std::string& id, int horizon) {
    auto e = entry(id);
    std::lock_guard g(e->m);
    return projection_json(e->s, horizon > 0 ? horizon : std::max(e->s.costs.horizon, e->s.period() + 1));
}

json SessionService::recommendation(const std::string& id) {
    auto e = entry(id);
    std::lock_guard g(e->m);
    if (!e->s.latest) throw Error("HorizonExceeded", "session is at or past the decision horizon", "costs.horizon");
    return recommendation_json(e->s, *e->s.latest);
}

json SessionService::branch(const std::string& id, const json& body) {
    auto parent = snapshot(id);
    auto ov = parse_overrides(body.is_object() && body.contains("overrides") ? body["overrides"] : body);
    std::string bid;
    {
        std::unique_lock lock(mu_);
        bid = next_id();
    }
    Session b = what_if(parent, ov, bid);
    json inherited = json::array();
    for (const auto& o : b.observations) inherited.push_back(observation_to_json(o));
    persist_create(b, {{"type", "create"}, {"id", b.id}, {"scenario", b.scenario->hash}, {"parent", parent.id},
                       {"branch_period", b.branch_period}, {"description", b.description},
                       {"cost_overrides", b.cost_overrides},
                       {"observations", inherited}, {"created", b.created}});
    auto e = std::make_shared<Entry>();
    e->s = std::move(b);
    json out{{"id", e->s.id}, {"parent", parent.id}, {"period", e->s.period()}, {"description", e->s.description}};
    std::unique_lock lock(mu_);
    sessions_[e->s.id] = e;
    return out;
}

json SessionService::history(const std::string& id) {
    auto e = entry(id);
    std::lock_guard g(e->m);
    return history_json(e->s);
}

Session SessionService::snapshot(const std::string& id) {
    auto e = entry(id);
    std::lock_guard g(e->m);
    return e->s;
}

std::vector<std::string> SessionService::session_ids() {
    std::vector<std::string> out;
    std::shared_lock lock(mu_);
    for (const auto& [id, _] : sessions_) out.push_back(id);
    return out;
}

}  // namespace sentinel
