#include "sentinel/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sentinel/error.hpp"

namespace sentinel {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& msg) {
    throw Error("ValidationError", msg, path);
}

const json& need(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) invalid(path.empty() ? key : path + "." + key, "missing field");
    return obj[key];
}

template <class T>
T as(const json& v, const std::string& path) {
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        invalid(path, std::string("wrong type: ") + e.what());
    }
}

double probability(const json& v, const std::string& path) {
    if (!v.is_number()) invalid(path, "expected a number");
    double p = v.get<double>();
    if (!(p >= 0.0 && p <= 1.0)) invalid(path, "probability outside [0,1]");
    return p;
}

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }
std::string idx(const std::string& a, std::size_t i) { return a + "[" + std::to_string(i) + "]"; }

// Runs a component constructor and re-anchors its error path.
template <class F>
auto located(const std::string& where, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw e.with_prefix(where);
    }
}

void parse_metadata(Scenario& s, const json& doc) {
    const json meta = doc.value("metadata", json::object());
    s.name = meta.value("name", std::string("unnamed"));
    s.periods_per_day = meta.value("periods_per_day", 2);
    s.start_date = meta.value("start_date", std::string{});
    s.start_pm = meta.value("start_half", std::string("AM")) == "PM";
    if (s.periods_per_day < 1) invalid("metadata.periods_per_day", "must be >= 1");
}

void parse_graph(Scenario& s, const json& doc) {
    const auto& g = need(doc, "graph", "");
    s.graph = located("graph", [&] { return load_raster_graph(g); });
    const auto& ts = need(g, "trapping_sets", "graph");
    if (!ts.is_object() || ts.empty()) invalid("graph.trapping_sets", "expected a non-empty object");
    for (const auto& [label, ids] : ts.items()) {
        const std::string at = "graph.trapping_sets." + label;
        auto list = as<std::vector<int>>(ids, at);
        if (list.empty()) invalid(at, "empty trapping set");
        for (int id : list)
            if (!s.graph.contains(id)) invalid(at, "raster " + std::to_string(id) + " does not exist");
        s.targets.push_back(label);
        s.trapping_sets[label] = std::move(list);
    }
}

void parse_realizations(Scenario& s, const json& doc) {
    const auto& r = need(doc, "realizations", "");
    auto add = [&](Realization x, const std::string& at) {
        if (!s.trapping_sets.count(x.target)) invalid(at + ".target", "target '" + x.target + "' has no trapping set");
        if (!(x.holding >= 0.0 && x.holding < 1.0)) invalid(at + ".holding", "holding probability must lie in [0,1)");
        if (x.label.empty()) x.label = x.target + "/" + x.immediacy;
        for (const auto& y : s.realizations)
            if (y.label == x.label) invalid(at, "duplicate realization '" + x.label + "'");
        s.realizations.push_back(std::move(x));
    };
    if (r.is_array()) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            const std::string at = idx("realizations", i);
            Realization x;
            x.target = as<std::string>(need(r[i], "target", at), at + ".target");
            x.immediacy = r[i].value("immediacy", std::string("DEFAULT"));
            x.label = r[i].value("label", std::string{});
            x.holding = as<double>(need(r[i], "holding", at), at + ".holding");
            add(std::move(x), at);
        }
    } else if (r.is_object()) {
        // cross product of targets and immediacy levels
        auto targets = as<std::vector<std::string>>(need(r, "targets", "realizations"), "realizations.targets");
        const auto& levels = need(r, "immediacy", "realizations");
        for (const auto& t : targets)
            for (std::size_t k = 0; k < levels.size(); ++k) {
                const std::string at = idx("realizations.immediacy", k);
                Realization x;
                x.target = t;
                x.immediacy = as<std::string>(need(levels[k], "label", at), at + ".label");
                x.holding = as<double>(need(levels[k], "holding", at), at + ".holding");
                add(std::move(x), "realizations");
            }
    } else {
        invalid("realizations", "expected a list or a cross-product object");
    }
    if (s.realizations.empty()) invalid("realizations", "no realizations");
}

std::vector<double> by_label(const Scenario& s, const json& obj, const std::string& at) {
    if (!obj.is_object()) invalid(at, "expected an object keyed by realization label");
    std::vector<double> p(s.realizations.size(), 0.0);
    for (const auto& [label, v] : obj.items()) {
        auto it = std::find_if(s.realizations.begin(), s.realizations.end(),
                               [&](const Realization& r) { return r.label == label; });
        if (it == s.realizations.end()) invalid(at + "." + label, "unknown realization '" + label + "'");
        p[static_cast<std::size_t>(it - s.realizations.begin())] = probability(v, at + "." + label);
    }
    double sum = 0.0;
    for (double x : p) sum += x;
    if (std::abs(sum - 1.0) > 1e-9) invalid(at, "probabilities sum to " + std::to_string(sum));
    return p;
}

void parse_crisis(Scenario& s, const json& doc) {
    if (doc.contains("canonical_pd")) s.canonical_pd = by_label(s, doc["canonical_pd"], "canonical_pd");
    if (doc.contains("crisis_network")) {
        const auto& n = doc["crisis_network"];
        const std::string base = "crisis_network";
        std::vector<DiscreteVariable> vars;
        const auto& jv = need(n, "variables", base);
        for (std::size_t i = 0; i < jv.size(); ++i) {
            const std::string at = idx(base + ".variables", i);
            DiscreteVariable v;
            v.name = as<std::string>(need(jv[i], "name", at), at + ".name");
            v.outcomes = as<std::vector<std::string>>(need(jv[i], "outcomes", at), at + ".outcomes");
            const auto kind = jv[i].value("kind", std::string("chance"));
            if (kind == "deterministic")
                v.kind = VariableKind::Deterministic;
            else if (kind != "chance")
                invalid(at + ".kind", "kind must be chance or deterministic");
            vars.push_back(std::move(v));
        }
        std::vector<Edge> edges;
        const auto& je = n.value("edges", json::array());
        for (std::size_t i = 0; i < je.size(); ++i) {
            auto e = as<std::vector<std::string>>(je[i], idx(base + ".edges", i));
            if (e.size() != 2) invalid(idx(base + ".edges", i), "edge must be [parent, child]");
            edges.emplace_back(e[0], e[1]);
        }
        std::vector<ConditionalTable> tables;
        const auto& jt = need(n, "tables", base);
        for (std::size_t i = 0; i < jt.size(); ++i) {
            const std::string at = idx(base + ".tables", i);
            ConditionalTable t;
            t.child = as<std::string>(need(jt[i], "child", at), at + ".child");
            t.parents = jt[i].value("parents", std::vector<std::string>{});
            // rows may come in any order; place each by its parent assignment
            std::vector<std::size_t> card;
            for (const auto& p : t.parents) {
                auto it = std::find_if(vars.begin(), vars.end(), [&](const DiscreteVariable& v) { return v.name == p; });
                if (it == vars.end()) throw Error("DanglingParent", "unknown parent '" + p + "'", at + ".parents");
                card.push_back(it->outcomes.size());
            }
            std::size_t n_rows = 1;
            for (auto c : card) n_rows *= c;
            t.rows.assign(n_rows, {});
            std::vector<bool> filled(n_rows, false);
            const auto& rows = need(jt[i], "rows", at);
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const std::string rat = idx(at + ".rows", k);
                const json given = rows[k].value("given", json::object());
                std::size_t o = 0;
                for (std::size_t q = 0; q < t.parents.size(); ++q) {
                    if (!given.contains(t.parents[q])) invalid(rat + ".given", "missing parent '" + t.parents[q] + "'");
                    const auto label = as<std::string>(given[t.parents[q]], rat + ".given");
                    const auto& oc = std::find_if(vars.begin(), vars.end(), [&](const DiscreteVariable& v) {
                                         return v.name == t.parents[q];
                                     })->outcomes;
                    auto it = std::find(oc.begin(), oc.end(), label);
                    if (it == oc.end()) invalid(rat + ".given", "unknown outcome '" + label + "'");
                    o = o * card[q] + static_cast<std::size_t>(it - oc.begin());
                }
                if (given.size() != t.parents.size()) invalid(rat + ".given", "assignment names non-parents");
                if (filled[o]) invalid(rat, "duplicate parent assignment");
                filled[o] = true;
                t.rows[o] = as<std::vector<double>>(need(rows[k], "p", rat), rat + ".p");
            }
            for (std::size_t k = 0; k < n_rows; ++k)
                if (!filled[k]) invalid(at + ".rows", "a parent assignment has no row");
            tables.push_back(std::move(t));
        }
        s.network = located(base, [&] { return build_network(std::move(vars), edges, std::move(tables)); });
        if (n.contains("evidence"))
            s.evidence = as<std::map<std::string, std::string>>(n["evidence"], base + ".evidence");
        s.d_variable = n.value("d_variable", std::string("D"));

        auto post = located(base, [&] { return posterior_query(*s.network, {s.d_variable}, s.evidence); });
        const auto& oc = post.outcomes[0];
        if (oc.size() != s.realizations.size())
            invalid(base + ".d_variable", "D outcomes must match the realization labels");
        s.prior_d.assign(s.realizations.size(), 0.0);
        for (std::size_t k = 0; k < oc.size(); ++k)
            s.prior_d[s.realization_index(oc[k])] = post.p[k];
        if (s.canonical_pd) {
            for (std::size_t j = 0; j < s.prior_d.size(); ++j)
                if (std::abs(s.prior_d[j] - (*s.canonical_pd)[j]) > 1e-6)
                    throw Error("CanonicalMismatch",
                                "network posterior for " + s.realizations[j].label + " differs from canonical_pd",
                                "canonical_pd." + s.realizations[j].label);
        }
    } else if (s.canonical_pd) {
        s.prior_d = *s.canonical_pd;
    } else {
        invalid("canonical_pd", "either crisis_network or canonical_pd is required");
    }
}

void parse_signals(Scenario& s, const json& doc) {
    std::vector<SourceModel> sources;
    const auto& js = doc.value("sources", json::array());
    for (std::size_t i = 0; i < js.size(); ++i) {
        const std::string at = idx("sources", i);
        SourceModel m;
        m.id = as<std::string>(need(js[i], "id", at), at + ".id");
        m.outcomes = as<std::vector<std::string>>(need(js[i], "outcomes", at), at + ".outcomes");
        m.prior = as<std::vector<double>>(need(js[i], "prior", at), at + ".prior");
        sources.push_back(std::move(m));
    }
    s.credibility = located("", [&] { return CredibilitySpace(std::move(sources)); });

    const auto& jsig = doc.value("signals", json::array());
    for (std::size_t i = 0; i < jsig.size(); ++i) {
        const std::string at = idx("signals", i);
        const auto& sig = jsig[i];
        const auto id = as<std::string>(need(sig, "id", at), at + ".id");
        const auto values = as<std::vector<std::string>>(need(sig, "values", at), at + ".values");
        const auto fallback_class = sig.value("default_class", std::string("default"));

        std::vector<std::string> classes;
        std::vector<std::size_t> node_class(s.graph.size(), SIZE_MAX);
        const auto& jc = sig.value("classes", json::array());
        for (std::size_t c = 0; c < jc.size(); ++c) {
            const std::string cat = idx(at + ".classes", c);
            classes.push_back(as<std::string>(need(jc[c], "name", cat), cat + ".name"));
            for (int id_ : as<std::vector<int>>(need(jc[c], "rasters", cat), cat + ".rasters")) {
                if (!s.graph.contains(id_)) invalid(cat + ".rasters", "raster " + std::to_string(id_) + " does not exist");
                auto& slot = node_class[s.graph.index_of(id_)];
                if (slot == SIZE_MAX) slot = c;  // first listed class wins
            }
        }
        bool need_fallback = std::count(node_class.begin(), node_class.end(), SIZE_MAX) > 0;
        if (need_fallback) {
            classes.push_back(fallback_class);
            for (auto& slot : node_class)
                if (slot == SIZE_MAX) slot = classes.size() - 1;
        }

        auto row = [&](const json& m, const std::string& rat) {
            std::vector<double> out(values.size(), 0.0);
            if (!m.is_object()) invalid(rat, "expected {value: probability}");
            for (const auto& [v, p] : m.items()) {
                auto it = std::find(values.begin(), values.end(), v);
                if (it == values.end()) invalid(rat + "." + v, "unknown signal value '" + v + "'");
                out[static_cast<std::size_t>(it - values.begin())] = probability(p, rat + "." + v);
            }
            return out;
        };
        std::vector<LikelihoodRule> rules;
        const auto& jr = need(sig, "rules", at);
        for (std::size_t k = 0; k < jr.size(); ++k) {
            const std::string rat = idx(at + ".rules", k);
            LikelihoodRule rule;
            if (jr[k].contains("when"))
                rule.when = as<std::map<std::string, std::string>>(jr[k]["when"], rat + ".when");
            if (jr[k].contains("likelihoods"))
                for (const auto& [cls, m] : jr[k]["likelihoods"].items())
                    rule.per_class[cls] = row(m, rat + ".likelihoods." + cls);
            if (jr[k].contains("default")) rule.fallback = row(jr[k]["default"], rat + ".default");
            rules.push_back(std::move(rule));
        }
        s.signals.push_back(located(at, [&] {
            return SignalModel(id, values, classes, node_class, rules, s.credibility);
        }));
    }
}

void parse_p0(Scenario& s, const json& doc) {
    const auto& p = need(doc, "p0", "");
    const auto n = static_cast<Eigen::Index>(s.graph.size());
    s.p0.period = 0;
    if (p.is_string() && p.get<std::string>() == "uniform") {
        std::size_t open = 0;
        for (std::size_t k = 0; k < s.graph.size(); ++k) open += !s.graph.blocked(k);
        s.p0.p = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < s.graph.size(); ++k)
            if (!s.graph.blocked(k)) s.p0.p[static_cast<Eigen::Index>(k)] = 1.0 / static_cast<double>(open);
        return;
    }
    if (!p.is_object()) invalid("p0", "expected {raster id: probability} or \"uniform\"");
    s.p0.p = Eigen::VectorXd::Zero(n);
    for (const auto& [key, v] : p.items()) {
        int id = 0;
        try {
            id = std::stoi(key);
        } catch (...) {
            invalid("p0." + key, "keys must be raster ids");
        }
        if (!s.graph.contains(id)) invalid("p0." + key, "raster does not exist");
        const auto k = s.graph.index_of(id);
        if (s.graph.blocked(k)) invalid("p0." + key, "initial mass on a blocked raster");
        s.p0.p[static_cast<Eigen::Index>(k)] = probability(v, "p0." + key);
    }
    if (std::abs(s.p0.p.sum() - 1.0) > 1e-10) invalid("p0", "probabilities do not sum to 1");
}

void parse_costs(Scenario& s, const json& doc) {
    const auto& c = need(doc, "costs", "");
    CostModel& cm = s.costs;
    const auto nj = s.realizations.size();
    cm.daily_discount_rate = as<double>(need(c, "daily_discount_rate", "costs"), "costs.daily_discount_rate");
    cm.periods_per_day = c.value("periods_per_day", s.periods_per_day);
    cm.horizon = c.value("horizon", 40);
    const auto window = c.value("failure_window", std::string("exposure"));
    if (window == "exposure")
        cm.window = FailureWindow::Exposure;
    else if (window == "lead_window")
        cm.window = FailureWindow::LeadWindow;
    else
        invalid("costs.failure_window", "expected exposure or lead_window");
    const json dis = c.value("disutility", json{{"kind", "linear"}});
    const auto kind = dis.value("kind", std::string("linear"));
    if (kind == "exponential") {
        cm.disutility = DisutilityKind::Exponential;
        cm.risk_coefficient = as<double>(need(dis, "gamma", "costs.disutility"), "costs.disutility.gamma");
    } else if (kind != "linear") {
        invalid("costs.disutility.kind", "expected linear or exponential");
    }

    // keys are either realization labels or target labels (all immediacies)
    auto expand = [&](const std::string& key, const std::string& at) {
        std::vector<std::size_t> js;
        for (std::size_t j = 0; j < nj; ++j)
            if (s.realizations[j].label == key || s.realizations[j].target == key) js.push_back(j);
        if (js.empty()) invalid(at, "unknown target or realization label '" + key + "'");
        return js;
    };

    cm.failure_costs.assign(nj, 0.0);
    const auto& fc = need(c, "failure_costs", "costs");
    if (!fc.is_object()) invalid("costs.failure_costs", "expected an object");
    for (const auto& [key, v] : fc.items())
        for (auto j : expand(key, "costs.failure_costs." + key))
            cm.failure_costs[j] = as<double>(v, "costs.failure_costs." + key);

    const auto& at = need(c, "alert_types", "costs");
    for (std::size_t i = 0; i < at.size(); ++i) {
        const std::string p = idx("costs.alert_types", i);
        cm.alert_types.push_back(as<std::string>(need(at[i], "id", p), p + ".id"));
        cm.alert_costs.push_back(as<double>(need(at[i], "cost", p), p + ".cost"));
        std::vector<std::optional<int>> lead(nj);
        const json lt = at[i].value("lead_times", json::object());
        for (const auto& [key, v] : lt.items())
            for (auto j : expand(key, p + ".lead_times." + key)) lead[j] = as<int>(v, p + ".lead_times." + key);
        cm.lead_times.push_back(std::move(lead));
    }
    cm.validate(nj);
}

}  // namespace

std::vector<std::string> Scenario::target_of_j() const {
    std::vector<std::string> out;
    for (const auto& r : realizations) out.push_back(r.target);
    return out;
}

std::size_t Scenario::realization_index(const std::string& label) const {
    for (std::size_t j = 0; j < realizations.size(); ++j)
        if (realizations[j].label == label) return j;
    throw Error("ValidationError", "unknown realization '" + label + "'", label);
}

std::string Scenario::period_label(int period) const {
    if (start_date.size() != 10 || periods_per_day != 2) return "period " + std::to_string(period);
    using namespace std::chrono;
    const int y = std::stoi(start_date.substr(0, 4));
    const unsigned m = static_cast<unsigned>(std::stoi(start_date.substr(5, 2)));
    const unsigned d = static_cast<unsigned>(std::stoi(start_date.substr(8, 2)));
    const int half = period + (start_pm ? 1 : 0);
    const sys_days when = sys_days(year{y} / month{m} / day{d}) + days{half / 2};
    const year_month_day ymd{when};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %s", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), half % 2 ? "PM" : "AM");
    return buf;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Observation parse_observation(const json& j) {
    Observation o;
    if (!j.is_object()) invalid("", "observation must be an object");
    o.period = as<int>(need(j, "period", ""), "period");
    auto report = [&](const json& r, const std::string& at) {
        Report rep;
        rep.signal = as<std::string>(need(r, "signal", at), join(at, "signal"));
        rep.value = as<std::string>(need(r, "value", at), join(at, "value"));
        rep.sources = r.value("sources", std::vector<std::string>{});
        return rep;
    };
    if (j.contains("reports")) {
        const auto& rs = j["reports"];
        if (!rs.is_array()) invalid("reports", "expected a list");
        for (std::size_t k = 0; k < rs.size(); ++k) o.reports.push_back(report(rs[k], idx("reports", k)));
    } else if (j.contains("signal")) {
        o.reports.push_back(report(j, ""));
    }
    return o;
}

json observation_to_json(const Observation& o) {
    json reps = json::array();
    for (const auto& r : o.reports) reps.push_back({{"signal", r.signal}, {"value", r.value}, {"sources", r.sources}});
    return json{{"period", o.period}, {"reports", reps}};
}

std::shared_ptr<const Scenario> load_scenario(const json& doc) {
    if (!doc.is_object()) invalid("", "scenario must be a JSON object");
    const auto version = as<std::string>(need(doc, "schema_version", ""), "schema_version");
    int major = -1;
    try {
        major = std::stoi(version.substr(0, version.find('.')));
    } catch (...) {
        invalid("schema_version", "unreadable version '" + version + "'");
    }
    if (major != kSchemaMajor)
        throw Error("SchemaVersionMismatch",
                    "schema major version " + std::to_string(major) + " is not supported (expected " +
                        std::to_string(kSchemaMajor) + ")",
                    "schema_version");

    auto s = std::make_shared<Scenario>();
    s->document = doc;
    s->hash = fnv1a_hex(doc.dump());
    parse_metadata(*s, doc);
    parse_graph(*s, doc);
    parse_realizations(*s, doc);
    parse_crisis(*s, doc);
    parse_signals(*s, doc);
    parse_p0(*s, doc);
    parse_costs(*s, doc);

    const auto& script = doc.value("script", json::array());
    for (std::size_t k = 0; k < script.size(); ++k) {
        auto o = located(idx("script", k), [&] { return parse_observation(script[k]); });
        if (o.period != static_cast<int>(k) + 1) invalid(idx("script", k) + ".period", "script periods must run 1, 2, ...");
        for (std::size_t q = 0; q < o.reports.size(); ++q) {
            const auto& r = o.reports[q];
            const std::string at = idx(idx("script", k) + ".reports", q);
            auto it = std::find_if(s->signals.begin(), s->signals.end(), [&](const SignalModel& m) { return m.id() == r.signal; });
            if (it == s->signals.end()) invalid(at + ".signal", "unregistered signal '" + r.signal + "'");
            located(at, [&] { return it->value_index(r.value); });
        }
        s->script.push_back(std::move(o));
    }

    for (std::size_t j = 0; j < s->realizations.size(); ++j) {
        const auto& r = s->realizations[j];
        auto m = build_transition_matrix(s->graph, s->trapping_sets.at(r.target), r.holding);
        for (const auto& w : m.warnings) s->warnings.push_back(r.label + ": " + w);
        s->models.push_back(std::move(m));
    }
    for (const auto& t : s->targets) {
        std::vector<std::size_t> set;
        for (int id : s->trapping_sets.at(t)) set.push_back(s->graph.index_of(id));
        const auto dist = s->graph.distances_to(set);
        for (Eigen::Index k = 0; k < s->p0.p.size(); ++k)
            if (s->p0.p[k] > 0.0 && dist[static_cast<std::size_t>(k)] < 0)
                s->warnings.push_back("Unreachable: target " + t + " cannot be reached from raster " +
                                      std::to_string(s->graph.id(static_cast<std::size_t>(k))));
    }
    return s;
}

std::shared_ptr<const Scenario> load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("IoError", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("ParseError", e.what());
    }
    return load_scenario(doc);
}

}  // namespace sentinel
