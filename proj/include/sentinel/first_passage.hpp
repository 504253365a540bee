#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sentinel/transition.hpp"

namespace sentinel {

struct StateDistribution {
    Eigen::VectorXd p;
    int period = 0;
};

struct FirstPassageDistribution {
    int origin = 0;
    int horizon = 0;
    std::vector<double> prob;  // prob[k] = P(H = origin + 1 + k)
    double residual = 0.0;     // transient mass still out at the horizon
    std::string conditioning;

    // zero outside (origin, horizon]
    double at(int tau) const;
    double cumulative(int tau) const;
    double total() const;
};

// Mass already in the trapping set at the origin is dropped, then the
// transient part is pushed one step at a time and the inflow into the
// trapping set is recorded.
FirstPassageDistribution first_passage(const StateDistribution& start, const TransitionModel& model, int horizon);

struct AttackDistribution {
    int origin = 0;
    int horizon = 0;
    std::vector<std::string> targets;
    std::vector<std::vector<double>> prob;  // [target][tau - origin - 1]

    double at(std::size_t target, int tau) const;
    double cumulative(std::size_t target, int tau) const;
    std::size_t target_index(const std::string& label) const;
};

// joint[target, tau] = sum over realizations j hitting that target of w_j P_j(H = tau)
AttackDistribution marginal_attack_distribution(const std::vector<double>& weights,
                                                const std::vector<FirstPassageDistribution>& per_j,
                                                const std::vector<std::string>& target_of_j,
                                                const std::vector<std::string>& target_order = {});

// target, j, tau, probability, cumulative
void write_first_passage_csv(std::ostream& out, const std::vector<std::string>& targets,
                             const std::vector<std::string>& labels,
                             const std::vector<FirstPassageDistribution>& per_j);

}  // namespace sentinel
