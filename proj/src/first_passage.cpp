#include "sentinel/first_passage.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sentinel/error.hpp"
#include "sentinel/util.hpp"

namespace sentinel {

namespace {
constexpr double kClamp = 1e-15;
}

double FirstPassageDistribution::at(int tau) const {
    if (tau <= origin || tau > horizon) return 0.0;
    return prob[static_cast<std::size_t>(tau - origin - 1)];
}

double FirstPassageDistribution::cumulative(int tau) const {
    double s = 0.0;
    for (int t = origin + 1; t <= std::min(tau, horizon); ++t) s += prob[static_cast<std::size_t>(t - origin - 1)];
    return s;
}

double FirstPassageDistribution::total() const {
    double s = 0.0;
    for (double x : prob) s += x;
    return s;
}

FirstPassageDistribution first_passage(const StateDistribution& start, const TransitionModel& model, int horizon) {
    if (static_cast<std::size_t>(start.p.size()) != model.size())
        throw Error("DimensionMismatch", "start distribution and transition model differ in size");
    if (horizon <= start.period)
        throw Error("InvalidArgument", "horizon must exceed the start period", "horizon");
    FirstPassageDistribution out;
    out.origin = start.period;
    out.horizon = horizon;
    out.prob.reserve(static_cast<std::size_t>(horizon - start.period));

    Eigen::VectorXd x = start.p;
    const auto n = static_cast<Eigen::Index>(model.size());
    for (Eigen::Index k = 0; k < n; ++k)
        if (model.trapping[static_cast<std::size_t>(k)]) x[k] = 0.0;
    for (int tau = start.period + 1; tau <= horizon; ++tau) {
        x = model.step(x);
        double inflow = 0.0;
        for (Eigen::Index k = 0; k < n; ++k)
            if (model.trapping[static_cast<std::size_t>(k)]) {
                inflow += x[k];
                x[k] = 0.0;
            }
        out.prob.push_back(inflow < kClamp ? 0.0 : inflow);
    }
    out.residual = std::max(0.0, x.sum());
    return out;
}

double AttackDistribution::at(std::size_t target, int tau) const {
    if (tau <= origin || tau > horizon) return 0.0;
    return prob[target][static_cast<std::size_t>(tau - origin - 1)];
}

double AttackDistribution::cumulative(std::size_t target, int tau) const {
    double s = 0.0;
    for (int t = origin + 1; t <= std::min(tau, horizon); ++t) s += at(target, t);
    return s;
}

std::size_t AttackDistribution::target_index(const std::string& label) const {
    auto it = std::find(targets.begin(), targets.end(), label);
    if (it == targets.end()) throw Error("UnknownTarget", "no target '" + label + "'", label);
    return static_cast<std::size_t>(it - targets.begin());
}

AttackDistribution marginal_attack_distribution(const std::vector<double>& weights,
                                                const std::vector<FirstPassageDistribution>& per_j,
                                                const std::vector<std::string>& target_of_j,
                                                const std::vector<std::string>& target_order) {
    if (weights.size() != per_j.size() || target_of_j.size() != per_j.size())
        throw Error("DimensionMismatch", "weights, distributions and targets differ in length");
    if (per_j.empty()) throw Error("InvalidArgument", "no realizations");
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw Error("InvalidArgument", "negative realization weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw Error("InvalidArgument", "realization weights do not sum to 1");
    for (const auto& f : per_j)
        if (f.origin != per_j[0].origin || f.horizon != per_j[0].horizon)
            throw Error("InconsistentHorizons", "per-realization distributions differ in origin or horizon");

    AttackDistribution out;
    out.origin = per_j[0].origin;
    out.horizon = per_j[0].horizon;
    out.targets = target_order;
    for (const auto& t : target_of_j)
        if (std::find(out.targets.begin(), out.targets.end(), t) == out.targets.end()) out.targets.push_back(t);
    const auto len = per_j[0].prob.size();
    out.prob.assign(out.targets.size(), std::vector<double>(len, 0.0));
    for (std::size_t j = 0; j < per_j.size(); ++j) {
        auto& row = out.prob[out.target_index(target_of_j[j])];
        for (std::size_t k = 0; k < len; ++k) row[k] += weights[j] * per_j[j].prob[k];
    }
    return out;
}

void write_first_passage_csv(std::ostream& out, const std::vector<std::string>& targets,
                             const std::vector<std::string>& labels,
                             const std::vector<FirstPassageDistribution>& per_j) {
    out << "target,j,tau,probability,cumulative\n";
    for (std::size_t j = 0; j < per_j.size(); ++j) {
        double cum = 0.0;
        const auto& f = per_j[j];
        for (int tau = f.origin + 1; tau <= f.horizon; ++tau) {
            cum += f.at(tau);
            out << targets[j] << ',' << labels[j] << ',' << tau << ',' << fmt_double(f.at(tau)) << ','
                << fmt_double(cum) << '\n';
        }
    }
}

}  // namespace sentinel
