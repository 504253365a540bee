#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sentinel/first_passage.hpp"
#include "sentinel/transition.hpp"

namespace sentinel {

struct SourceModel {
    std::string id;
    std::vector<std::string> outcomes;
    std::vector<double> prior;
};

// Joint realizations of the credibility vector, last source varying fastest.
class CredibilitySpace {
public:
    CredibilitySpace() = default;
    explicit CredibilitySpace(std::vector<SourceModel> sources);

    std::size_t size() const { return prior_.size(); }
    const std::vector<SourceModel>& sources() const { return sources_; }
    const std::vector<double>& prior() const { return prior_; }
    // outcome index of each source in realization r
    const std::vector<std::size_t>& realization(std::size_t r) const { return real_[r]; }
    std::string label(std::size_t r) const;
    std::optional<std::size_t> source_index(const std::string& id) const;

private:
    std::vector<SourceModel> sources_;
    std::vector<std::vector<std::size_t>> real_;
    std::vector<double> prior_;
};

// A rule applies to every credibility realization that agrees with all of
// its listed source outcomes.  The first applicable rule wins.  Classes not
// listed in a rule fall back to the rule's default row, if it has one.
struct LikelihoodRule {
    std::map<std::string, std::string> when;
    std::map<std::string, std::vector<double>> per_class;
    std::optional<std::vector<double>> fallback;
};

class SignalModel {
public:
    SignalModel() = default;
    SignalModel(std::string id, std::vector<std::string> values, std::vector<std::string> classes,
                std::vector<std::size_t> node_class, const std::vector<LikelihoodRule>& rules,
                const CredibilitySpace& space);

    const std::string& id() const { return id_; }
    const std::vector<std::string>& values() const { return values_; }
    const std::vector<std::string>& classes() const { return classes_; }
    std::size_t node_class(std::size_t node) const { return node_class_[node]; }
    std::size_t value_index(const std::string& v) const;
    double likelihood(std::size_t value, std::size_t cls, std::size_t r) const { return lik_[r][cls][value]; }
    // per-node likelihood of a value under credibility realization r
    const Eigen::VectorXd& emission(std::size_t r, std::size_t value) const { return emit_[r][value]; }

private:
    std::string id_;
    std::vector<std::string> values_;
    std::vector<std::string> classes_;
    std::vector<std::size_t> node_class_;
    std::vector<std::vector<std::vector<double>>> lik_;  // [r][class][value]
    std::vector<std::vector<Eigen::VectorXd>> emit_;     // [r][value]
};

struct Report {
    std::string signal;
    std::string value;
    std::vector<std::string> sources;
};

struct Observation {
    int period = 0;
    std::vector<Report> reports;
};

struct BeliefState {
    int period = 0;
    std::size_t n_d = 0;
    std::size_t n_r = 0;
    std::vector<double> weight;          // [j * n_r + r] = P(D=j, R=r | signals)
    std::vector<Eigen::VectorXd> cond;   // [j * n_r + r] = P(X_t | D=j, R=r, signals)
    double log_likelihood = 0.0;

    double w(std::size_t j, std::size_t r) const { return weight[j * n_r + r]; }
    const Eigen::VectorXd& x(std::size_t j, std::size_t r) const { return cond[j * n_r + r]; }
    // P(X_t | D=j, signals)
    Eigen::VectorXd state_given_d(std::size_t j) const;
};

struct BeliefMarginals {
    Eigen::VectorXd pi;
    std::vector<double> p_d;
    std::vector<double> p_r;
};

BeliefState init_belief(const StateDistribution& p0, const std::vector<double>& prior_d,
                        const std::vector<double>& prior_r);

BeliefState advance_belief(const BeliefState& belief, const std::vector<TransitionModel>& models,
                           const std::vector<SignalModel>& signals, const CredibilitySpace& space,
                           const Observation& obs);

BeliefMarginals belief_marginals(const BeliefState& belief);

}  // namespace sentinel
