#include "sentinel/transition.hpp"

#include <cmath>
#include <ostream>

#include "sentinel/error.hpp"
#include "sentinel/util.hpp"

namespace sentinel {

Eigen::VectorXd TransitionModel::step(const Eigen::VectorXd& x) const {
    return (x.transpose() * sparse).transpose();
}

TransitionModel build_transition_matrix(const RasterGraph& g, const std::vector<int>& trapping_ids,
                                        double holding) {
    if (!(holding >= 0.0 && holding < 1.0))
        throw Error("InvalidArgument", "holding probability must lie in [0,1)", "holding");
    const auto n = g.size();
    TransitionModel m;
    m.holding = holding;
    m.trapping.assign(n, false);
    std::vector<std::size_t> targets;
    for (int id : trapping_ids) {
        auto k = g.index_of(id);
        m.trapping[k] = true;
        targets.push_back(k);
    }
    const auto dist = g.distances_to(targets);

    m.P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::size_t unreachable = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        if (m.trapping[k] || g.blocked(k)) {
            m.P(kk, kk) = 1.0;
            continue;
        }
        std::vector<std::size_t> nb;
        for (auto j : g.neighbors(k))
            if (!g.blocked(j)) nb.push_back(j);
        if (nb.empty()) {
            m.P(kk, kk) = 1.0;
            m.warnings.push_back("NoAdjacentNonBlocked: raster " + std::to_string(g.id(k)) +
                                 " has no usable neighbor; row is pure holding");
            continue;
        }
        std::vector<double> w(nb.size());
        if (dist[k] < 0) {
            ++unreachable;
            std::fill(w.begin(), w.end(), 1.0);
        } else {
            for (std::size_t a = 0; a < nb.size(); ++a)
                w[a] = dist[nb[a]] < 0 ? 0.0 : std::exp(-(dist[nb[a]] + 1.0));
        }
        double total = 0.0;
        for (double x : w) total += x;
        m.P(kk, kk) = holding;
        for (std::size_t a = 0; a < nb.size(); ++a)
            m.P(kk, static_cast<Eigen::Index>(nb[a])) += (1.0 - holding) * w[a] / total;
    }
    if (unreachable > 0)
        m.warnings.push_back(std::to_string(unreachable) +
                             " rasters cannot reach the trapping set; their moves are uniform");
    m.sparse = m.P.sparseView();
    m.sparse.makeCompressed();
    return m;
}

void write_transition_csv(std::ostream& out, const RasterGraph& g, const TransitionModel& m) {
    out << "row,column,probability\n";
    for (Eigen::Index r = 0; r < m.sparse.outerSize(); ++r)
        for (SparseRowMatrix::InnerIterator it(m.sparse, r); it; ++it)
            out << g.id(static_cast<std::size_t>(r)) << ',' << g.id(static_cast<std::size_t>(it.col())) << ','
                << fmt_double(it.value()) << '\n';
}

}  // namespace sentinel
