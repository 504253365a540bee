#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "sentinel/raster_graph.hpp"

namespace sentinel {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct TransitionModel {
    Eigen::MatrixXd P;             // dense, row-stochastic
    SparseRowMatrix sparse;        // same entries, used for propagation
    std::vector<bool> trapping;    // per node index
    double holding = 0.0;
    std::vector<std::string> warnings;

    std::size_t size() const { return trapping.size(); }
    // row vector x -> x P
    Eigen::VectorXd step(const Eigen::VectorXd& x) const;
};

// Off-diagonal weight from transient k to adjacent, unblocked m is
// exp(-(d(m) + 1)) with d the hop distance from m to the trapping set; the
// weights are scaled to 1 - holding.  Trapping and blocked rows are absorbing.
TransitionModel build_transition_matrix(const RasterGraph& g, const std::vector<int>& trapping_ids,
                                        double holding);

// row id, column id, probability; nonzero entries only
void write_transition_csv(std::ostream& out, const RasterGraph& g, const TransitionModel& m);

}  // namespace sentinel
