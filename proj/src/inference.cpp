#include "sentinel/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "sentinel/error.hpp"

namespace sentinel {

namespace {

void check_distribution(const std::vector<double>& p, const std::string& what) {
    double s = 0.0;
    for (double x : p) {
        if (!(x >= 0.0 && x <= 1.0)) throw Error("InvalidDistribution", what + " has an entry outside [0,1]", what);
        s += x;
    }
    if (std::abs(s - 1.0) > 1e-9) throw Error("InvalidDistribution", what + " does not sum to 1", what);
}

}  // namespace

CredibilitySpace::CredibilitySpace(std::vector<SourceModel> sources) : sources_(std::move(sources)) {
    std::set<std::string> ids;
    for (std::size_t s = 0; s < sources_.size(); ++s) {
        const auto& src = sources_[s];
        const std::string at = "sources[" + std::to_string(s) + "]";
        if (!ids.insert(src.id).second) throw Error("ValidationError", "duplicate source '" + src.id + "'", at);
        if (src.outcomes.empty() || src.outcomes.size() != src.prior.size())
            throw Error("ValidationError", "source '" + src.id + "' needs one prior per outcome", at);
        check_distribution(src.prior, at + ".prior");
    }
    real_.push_back({});
    prior_.push_back(1.0);
    for (const auto& src : sources_) {
        std::vector<std::vector<std::size_t>> next;
        std::vector<double> np;
        for (std::size_t r = 0; r < real_.size(); ++r)
            for (std::size_t o = 0; o < src.outcomes.size(); ++o) {
                auto a = real_[r];
                a.push_back(o);
                next.push_back(std::move(a));
                np.push_back(prior_[r] * src.prior[o]);
            }
        real_ = std::move(next);
        prior_ = std::move(np);
    }
}

std::string CredibilitySpace::label(std::size_t r) const {
    std::string out;
    for (std::size_t s = 0; s < sources_.size(); ++s) {
        if (s) out += ';';
        out += sources_[s].id + "=" + sources_[s].outcomes[real_[r][s]];
    }
    return out.empty() ? "-" : out;
}

std::optional<std::size_t> CredibilitySpace::source_index(const std::string& id) const {
    for (std::size_t s = 0; s < sources_.size(); ++s)
        if (sources_[s].id == id) return s;
    return std::nullopt;
}

SignalModel::SignalModel(std::string id, std::vector<std::string> values, std::vector<std::string> classes,
                         std::vector<std::size_t> node_class, const std::vector<LikelihoodRule>& rules,
                         const CredibilitySpace& space)
    : id_(std::move(id)), values_(std::move(values)), classes_(std::move(classes)),
      node_class_(std::move(node_class)) {
    if (values_.empty()) throw Error("ValidationError", "signal '" + id_ + "' has no values", "values");
    for (auto c : node_class_)
        if (c >= classes_.size()) throw Error("ValidationError", "node class out of range", "classes");

    // resolve rule conditions once
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> conds;
    for (std::size_t k = 0; k < rules.size(); ++k) {
        const std::string at = "rules[" + std::to_string(k) + "]";
        std::vector<std::pair<std::size_t, std::size_t>> c;
        for (const auto& [src, outcome] : rules[k].when) {
            auto s = space.source_index(src);
            if (!s) throw Error("ValidationError", "rule names unknown source '" + src + "'", at + ".when");
            const auto& oc = space.sources()[*s].outcomes;
            auto it = std::find(oc.begin(), oc.end(), outcome);
            if (it == oc.end())
                throw Error("ValidationError", "source '" + src + "' has no outcome '" + outcome + "'", at + ".when");
            c.emplace_back(*s, static_cast<std::size_t>(it - oc.begin()));
        }
        for (const auto& [cls, row] : rules[k].per_class)
            if (std::find(classes_.begin(), classes_.end(), cls) == classes_.end())
                throw Error("ValidationError", "rule names unknown class '" + cls + "'", at + ".likelihoods");
        conds.push_back(std::move(c));
    }

    lik_.assign(space.size(), std::vector<std::vector<double>>(classes_.size()));
    for (std::size_t r = 0; r < space.size(); ++r) {
        const auto& real = space.realization(r);
        for (std::size_t c = 0; c < classes_.size(); ++c) {
            const std::vector<double>* row = nullptr;
            std::size_t used = 0;
            for (std::size_t k = 0; k < rules.size() && !row; ++k) {
                bool match = std::all_of(conds[k].begin(), conds[k].end(),
                                         [&](const auto& sc) { return real[sc.first] == sc.second; });
                if (!match) continue;
                auto it = rules[k].per_class.find(classes_[c]);
                if (it != rules[k].per_class.end())
                    row = &it->second;
                else if (rules[k].fallback)
                    row = &*rules[k].fallback;
                used = k;
            }
            const std::string where = "signal " + id_ + ", class " + classes_[c] + ", " + space.label(r);
            if (!row) throw Error("ValidationError", "no likelihood rule covers " + where, "rules");
            if (row->size() != values_.size())
                throw Error("ValidationError", "likelihood row width differs from value count for " + where,
                            "rules[" + std::to_string(used) + "]");
            double s = 0.0;
            for (double x : *row) {
                if (!(x >= 0.0 && x <= 1.0))
                    throw Error("ValidationError", "likelihood outside [0,1] for " + where,
                                "rules[" + std::to_string(used) + "]");
                s += x;
            }
            if (std::abs(s - 1.0) > 1e-12)
                throw Error("UnnormalizedRow", "likelihoods do not sum to 1 for " + where,
                            "rules[" + std::to_string(used) + "]");
            lik_[r][c] = *row;
        }
    }

    const auto n = static_cast<Eigen::Index>(node_class_.size());
    emit_.assign(space.size(), std::vector<Eigen::VectorXd>(values_.size(), Eigen::VectorXd(n)));
    for (std::size_t r = 0; r < space.size(); ++r)
        for (std::size_t v = 0; v < values_.size(); ++v)
            for (Eigen::Index k = 0; k < n; ++k)
                emit_[r][v][k] = lik_[r][node_class_[static_cast<std::size_t>(k)]][v];
}

std::size_t SignalModel::value_index(const std::string& v) const {
    auto it = std::find(values_.begin(), values_.end(), v);
    if (it == values_.end())
        throw Error("UnknownSignalValue", "signal '" + id_ + "' has no value '" + v + "'", "value");
    return static_cast<std::size_t>(it - values_.begin());
}

Eigen::VectorXd BeliefState::state_given_d(std::size_t j) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(cond[0].size());
    double wj = 0.0;
    for (std::size_t r = 0; r < n_r; ++r) wj += w(j, r);
    if (wj > 0.0) {
        for (std::size_t r = 0; r < n_r; ++r) out += (w(j, r) / wj) * x(j, r);
    } else {
        for (std::size_t r = 0; r < n_r; ++r) out += x(j, r) / static_cast<double>(n_r);
    }
    return out;
}

BeliefState init_belief(const StateDistribution& p0, const std::vector<double>& prior_d,
                        const std::vector<double>& prior_r) {
    if (prior_d.empty() || prior_r.empty()) throw Error("DimensionMismatch", "empty prior");
    check_distribution(prior_d, "prior_d");
    check_distribution(prior_r, "prior_r");
    if (p0.p.size() == 0) throw Error("DimensionMismatch", "empty initial state distribution");
    if ((p0.p.array() < 0.0).any() || std::abs(p0.p.sum() - 1.0) > 1e-10)
        throw Error("InvalidDistribution", "p0 is not a probability vector", "p0");
    BeliefState b;
    b.period = p0.period;
    b.n_d = prior_d.size();
    b.n_r = prior_r.size();
    for (std::size_t j = 0; j < b.n_d; ++j)
        for (std::size_t r = 0; r < b.n_r; ++r) {
            b.weight.push_back(prior_d[j] * prior_r[r]);
            b.cond.push_back(p0.p);
        }
    return b;
}

BeliefState advance_belief(const BeliefState& belief, const std::vector<TransitionModel>& models,
                           const std::vector<SignalModel>& signals, const CredibilitySpace& space,
                           const Observation& obs) {
    if (obs.period != belief.period + 1)
        throw Error("NonConsecutivePeriod",
                    "observation period " + std::to_string(obs.period) + " does not follow " +
                        std::to_string(belief.period),
                    "period");
    if (models.size() != belief.n_d) throw Error("DimensionMismatch", "one transition model per realization needed");
    if (space.size() != belief.n_r) throw Error("DimensionMismatch", "credibility space differs from belief");

    // resolve the reports up front so a bad report leaves nothing half-done
    std::vector<std::pair<const SignalModel*, std::size_t>> resolved;
    for (std::size_t k = 0; k < obs.reports.size(); ++k) {
        const auto& rep = obs.reports[k];
        auto it = std::find_if(signals.begin(), signals.end(), [&](const SignalModel& s) { return s.id() == rep.signal; });
        if (it == signals.end())
            throw Error("UnregisteredSignalType", "signal type '" + rep.signal + "' is not registered",
                        "reports[" + std::to_string(k) + "].signal");
        for (const auto& s : rep.sources)
            if (!space.source_index(s))
                throw Error("UnknownSource", "source '" + s + "' is not registered",
                            "reports[" + std::to_string(k) + "].sources");
        try {
            resolved.emplace_back(&*it, it->value_index(rep.value));
        } catch (const Error& e) {
            throw e.with_prefix("reports[" + std::to_string(k) + "]");
        }
    }

    BeliefState next = belief;
    next.period = obs.period;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> logw(belief.weight.size(), neg_inf);
    for (std::size_t j = 0; j < belief.n_d; ++j) {
        for (std::size_t r = 0; r < belief.n_r; ++r) {
            const auto idx = j * belief.n_r + r;
            Eigen::VectorXd v = models[j].step(belief.cond[idx]);
            Eigen::VectorXd e = v;
            for (const auto& [sig, value] : resolved) e.array() *= sig->emission(r, value).array();
            const double z = e.sum();
            if (z > 0.0) {
                next.cond[idx] = e / z;
                if (belief.weight[idx] > 0.0) logw[idx] = std::log(belief.weight[idx]) + std::log(z);
            } else {
                // excluded by the evidence; keep a valid state vector anyway
                const double s = v.sum();
                next.cond[idx] = s > 0.0 ? Eigen::VectorXd(v / s) : v;
            }
        }
    }
    const double m = *std::max_element(logw.begin(), logw.end());
    if (m == neg_inf)
        throw Error("ImpossibleObservation", "observation has zero likelihood under every realization", "reports");
    double s = 0.0;
    for (double lw : logw) s += lw == neg_inf ? 0.0 : std::exp(lw - m);
    next.log_likelihood = belief.log_likelihood + m + std::log(s);
    for (std::size_t k = 0; k < logw.size(); ++k)
        next.weight[k] = logw[k] == neg_inf ? 0.0 : std::exp(logw[k] - m) / s;
    return next;
}

BeliefMarginals belief_marginals(const BeliefState& belief) {
    BeliefMarginals out;
    out.pi = Eigen::VectorXd::Zero(belief.cond.empty() ? 0 : belief.cond[0].size());
    out.p_d.assign(belief.n_d, 0.0);
    out.p_r.assign(belief.n_r, 0.0);
    for (std::size_t j = 0; j < belief.n_d; ++j)
        for (std::size_t r = 0; r < belief.n_r; ++r) {
            const double w = belief.w(j, r);
            out.p_d[j] += w;
            out.p_r[r] += w;
            out.pi += w * belief.x(j, r);
        }
    return out;
}

}  // namespace sentinel
