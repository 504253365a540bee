#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace sentinel {

enum class VariableKind { Chance, Deterministic };

struct DiscreteVariable {
    std::string name;
    std::vector<std::string> outcomes;
    VariableKind kind = VariableKind::Chance;
};

// One row per parent assignment.  Rows are stored in mixed-radix order over
// the parents, last parent varying fastest.
struct ConditionalTable {
    std::string child;
    std::vector<std::string> parents;
    std::vector<std::vector<double>> rows;
};

using Edge = std::pair<std::string, std::string>;
using Evidence = std::map<std::string, std::string>;

class CrisisNetwork {
public:
    std::size_t size() const { return vars_.size(); }
    const DiscreteVariable& variable(std::size_t i) const { return vars_[i]; }
    const ConditionalTable& table(std::size_t i) const { return tables_[i]; }
    const std::vector<std::size_t>& parents(std::size_t i) const { return parents_[i]; }
    const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }
    std::size_t index_of(const std::string& name) const;
    bool has(const std::string& name) const { return index_.count(name) != 0; }
    std::size_t outcome_index(std::size_t var, const std::string& label) const;

private:
    friend CrisisNetwork build_network(std::vector<DiscreteVariable>, const std::vector<Edge>&,
                                       std::vector<ConditionalTable>);
    std::vector<DiscreteVariable> vars_;
    std::vector<ConditionalTable> tables_;  // aligned with vars_
    std::vector<std::vector<std::size_t>> parents_;  // table order
    std::vector<std::vector<std::size_t>> children_;
    std::map<std::string, std::size_t> index_;
};

// Tables may come in any order.  A table's parent list fixes its row layout
// and must name exactly the variable's in-edges.
CrisisNetwork build_network(std::vector<DiscreteVariable> variables, const std::vector<Edge>& edges,
                            std::vector<ConditionalTable> tables);

struct JointDistribution {
    std::vector<std::string> variables;
    std::vector<std::vector<std::string>> outcomes;
    std::vector<double> p;  // mixed radix, last variable fastest

    double at(const std::vector<std::string>& labels) const;
    // Marginal over one of the query variables.
    std::vector<double> marginal(const std::string& variable) const;
};

JointDistribution posterior_query(const CrisisNetwork& net, const std::vector<std::string>& query,
                                  const Evidence& evidence);

bool d_separated(const CrisisNetwork& net, const std::string& x, const std::string& y,
                 const std::vector<std::string>& given);

}  // namespace sentinel
