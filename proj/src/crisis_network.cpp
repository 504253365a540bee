#include "sentinel/crisis_network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "sentinel/error.hpp"

namespace sentinel {

std::size_t CrisisNetwork::index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("UnknownVariable", "unknown variable '" + name + "'", name);
    return it->second;
}

std::size_t CrisisNetwork::outcome_index(std::size_t var, const std::string& label) const {
    const auto& oc = vars_[var].outcomes;
    auto it = std::find(oc.begin(), oc.end(), label);
    if (it == oc.end())
        throw Error("UnknownOutcome",
                    "variable '" + vars_[var].name + "' has no outcome '" + label + "'",
                    vars_[var].name);
    return static_cast<std::size_t>(it - oc.begin());
}

CrisisNetwork build_network(std::vector<DiscreteVariable> variables, const std::vector<Edge>& edges,
                            std::vector<ConditionalTable> tables) {
    CrisisNetwork net;
    const std::size_t n = variables.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& v = variables[i];
        if (v.name.empty()) throw Error("InvalidVariable", "variable without a name");
        if (v.outcomes.empty())
            throw Error("InvalidVariable", "variable '" + v.name + "' has no outcomes", v.name);
        std::set<std::string> seen(v.outcomes.begin(), v.outcomes.end());
        if (seen.size() != v.outcomes.size())
            throw Error("InvalidVariable", "duplicate outcome label in '" + v.name + "'", v.name);
        if (!net.index_.emplace(v.name, i).second)
            throw Error("InvalidVariable", "duplicate variable '" + v.name + "'", v.name);
    }
    net.vars_ = std::move(variables);

    std::vector<std::set<std::size_t>> in(n);
    net.children_.assign(n, {});
    for (const auto& [from, to] : edges) {
        auto a = net.index_.find(from);
        auto b = net.index_.find(to);
        if (a == net.index_.end() || b == net.index_.end())
            throw Error("DanglingParent", "edge " + from + " -> " + to + " names an unknown variable",
                        a == net.index_.end() ? from : to);
        if (a->second == b->second)
            throw Error("CycleDetected", "self-loop on '" + from + "'", from);
        if (in[b->second].insert(a->second).second) net.children_[a->second].push_back(b->second);
    }

    // Kahn's algorithm; anything left over sits on a cycle
    std::vector<std::size_t> indeg(n);
    for (std::size_t i = 0; i < n; ++i) indeg[i] = in[i].size();
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] == 0) stack.push_back(i);
    std::size_t visited = 0;
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        ++visited;
        for (auto c : net.children_[u])
            if (--indeg[c] == 0) stack.push_back(c);
    }
    if (visited != n) {
        for (std::size_t i = 0; i < n; ++i)
            if (indeg[i] > 0)
                throw Error("CycleDetected", "edge set has a cycle through '" + net.vars_[i].name + "'",
                            net.vars_[i].name);
    }

    net.tables_.assign(n, {});
    net.parents_.assign(n, {});
    std::vector<bool> have(n, false);
    for (auto& t : tables) {
        auto it = net.index_.find(t.child);
        if (it == net.index_.end())
            throw Error("DanglingParent", "table for unknown variable '" + t.child + "'", t.child);
        const std::size_t c = it->second;
        if (have[c]) throw Error("InvalidTable", "two tables for '" + t.child + "'", t.child);
        have[c] = true;

        std::set<std::size_t> listed;
        std::size_t rows = 1;
        for (const auto& p : t.parents) {
            auto pit = net.index_.find(p);
            if (pit == net.index_.end() || !in[c].count(pit->second))
                throw Error("DanglingParent",
                            "table '" + t.child + "' lists parent '" + p + "' without a matching edge",
                            t.child + ".parents");
            listed.insert(pit->second);
            net.parents_[c].push_back(pit->second);
            rows *= net.vars_[pit->second].outcomes.size();
        }
        if (listed != in[c] || listed.size() != t.parents.size())
            throw Error("DanglingParent", "table '" + t.child + "' parents differ from its in-edges",
                        t.child + ".parents");
        if (t.rows.size() != rows)
            throw Error("InvalidTable",
                        "table '" + t.child + "' has " + std::to_string(t.rows.size()) +
                            " rows, expected " + std::to_string(rows),
                        t.child + ".rows");
        const auto card = net.vars_[c].outcomes.size();
        for (std::size_t r = 0; r < rows; ++r) {
            const auto& row = t.rows[r];
            const std::string where = t.child + ".rows[" + std::to_string(r) + "]";
            if (row.size() != card)
                throw Error("InvalidTable", "row width differs from outcome count", where);
            double sum = 0.0;
            for (double x : row) {
                if (!(x >= 0.0 && x <= 1.0))
                    throw Error("UnnormalizedRow", "entry outside [0,1] in " + where, where);
                sum += x;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw Error("UnnormalizedRow", where + " sums to " + std::to_string(sum), where);
            if (net.vars_[c].kind == VariableKind::Deterministic &&
                std::count(row.begin(), row.end(), 1.0) != 1)
                throw Error("NonDeterministicRow", where + " of a deterministic variable is not one-hot",
                            where);
        }
        net.tables_[c] = std::move(t);
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!have[i])
            throw Error("InvalidTable", "no table for '" + net.vars_[i].name + "'", net.vars_[i].name);
    return net;
}

namespace {

// Dense factor over sorted variable indices, last variable fastest.
struct Factor {
    std::vector<std::size_t> vars;
    std::vector<std::size_t> card;
    std::vector<double> vals;
};

std::size_t volume(const std::vector<std::size_t>& card) {
    return std::accumulate(card.begin(), card.end(), std::size_t{1}, std::multiplies<>());
}

// Odometer over an assignment; returns false after the last state.
bool advance(std::vector<std::size_t>& a, const std::vector<std::size_t>& card) {
    for (std::size_t k = a.size(); k-- > 0;) {
        if (++a[k] < card[k]) return true;
        a[k] = 0;
    }
    return false;
}

std::size_t offset(const std::vector<std::size_t>& a, const std::vector<std::size_t>& card) {
    std::size_t o = 0;
    for (std::size_t k = 0; k < a.size(); ++k) o = o * card[k] + a[k];
    return o;
}

Factor from_table(const CrisisNetwork& net, std::size_t v) {
    // table layout: parents (table order) then child fastest
    std::vector<std::size_t> order = net.parents(v);
    order.push_back(v);
    std::vector<std::size_t> tcard;
    for (auto u : order) tcard.push_back(net.variable(u).outcomes.size());

    Factor f;
    f.vars = order;
    std::sort(f.vars.begin(), f.vars.end());
    for (auto u : f.vars) f.card.push_back(net.variable(u).outcomes.size());
    f.vals.assign(volume(f.card), 0.0);

    std::vector<std::size_t> pos(order.size());
    for (std::size_t k = 0; k < order.size(); ++k)
        pos[k] = static_cast<std::size_t>(std::find(f.vars.begin(), f.vars.end(), order[k]) - f.vars.begin());

    const auto& rows = net.table(v).rows;
    std::vector<std::size_t> a(order.size(), 0), b(order.size());
    do {
        std::size_t row = 0;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) row = row * tcard[k] + a[k];
        for (std::size_t k = 0; k < order.size(); ++k) b[pos[k]] = a[k];
        f.vals[offset(b, f.card)] = rows[row][a.back()];
    } while (advance(a, tcard));
    return f;
}

Factor multiply(const Factor& x, const Factor& y) {
    Factor f;
    std::set_union(x.vars.begin(), x.vars.end(), y.vars.begin(), y.vars.end(), std::back_inserter(f.vars));
    for (auto u : f.vars) {
        auto ix = std::find(x.vars.begin(), x.vars.end(), u);
        f.card.push_back(ix != x.vars.end() ? x.card[ix - x.vars.begin()]
                                            : y.card[std::find(y.vars.begin(), y.vars.end(), u) - y.vars.begin()]);
    }
    f.vals.assign(volume(f.card), 0.0);
    auto project = [&](const Factor& g) {
        std::vector<std::size_t> map;
        for (auto u : g.vars) map.push_back(std::find(f.vars.begin(), f.vars.end(), u) - f.vars.begin());
        return map;
    };
    auto mx = project(x), my = project(y);
    std::vector<std::size_t> a(f.vars.size(), 0), ax(x.vars.size()), ay(y.vars.size());
    std::size_t o = 0;
    do {
        for (std::size_t k = 0; k < mx.size(); ++k) ax[k] = a[mx[k]];
        for (std::size_t k = 0; k < my.size(); ++k) ay[k] = a[my[k]];
        f.vals[o++] = x.vals[offset(ax, x.card)] * y.vals[offset(ay, y.card)];
    } while (advance(a, f.card));
    return f;
}

Factor sum_out(const Factor& x, std::size_t v) {
    auto k = static_cast<std::size_t>(std::find(x.vars.begin(), x.vars.end(), v) - x.vars.begin());
    Factor f;
    for (std::size_t i = 0; i < x.vars.size(); ++i)
        if (i != k) {
            f.vars.push_back(x.vars[i]);
            f.card.push_back(x.card[i]);
        }
    f.vals.assign(volume(f.card), 0.0);
    std::vector<std::size_t> a(x.vars.size(), 0), b(f.vars.size());
    std::size_t o = 0;
    do {
        for (std::size_t i = 0, j = 0; i < a.size(); ++i)
            if (i != k) b[j++] = a[i];
        f.vals[offset(b, f.card)] += x.vals[o++];
    } while (advance(a, x.card));
    return f;
}

Factor restrict(const Factor& x, std::size_t v, std::size_t value) {
    auto k = static_cast<std::size_t>(std::find(x.vars.begin(), x.vars.end(), v) - x.vars.begin());
    if (k == x.vars.size()) return x;
    Factor f;
    for (std::size_t i = 0; i < x.vars.size(); ++i)
        if (i != k) {
            f.vars.push_back(x.vars[i]);
            f.card.push_back(x.card[i]);
        }
    f.vals.assign(volume(f.card), 0.0);
    std::vector<std::size_t> a(x.vars.size(), 0), b(f.vars.size());
    std::size_t o = 0;
    do {
        if (a[k] == value) {
            for (std::size_t i = 0, j = 0; i < a.size(); ++i)
                if (i != k) b[j++] = a[i];
            f.vals[offset(b, f.card)] = x.vals[o];
        }
        ++o;
    } while (advance(a, x.card));
    return f;
}

}  // namespace

double JointDistribution::at(const std::vector<std::string>& labels) const {
    if (labels.size() != variables.size())
        throw Error("DimensionMismatch", "label count differs from query size");
    std::size_t o = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        auto it = std::find(outcomes[k].begin(), outcomes[k].end(), labels[k]);
        if (it == outcomes[k].end())
            throw Error("UnknownOutcome", "no outcome '" + labels[k] + "'", variables[k]);
        o = o * outcomes[k].size() + static_cast<std::size_t>(it - outcomes[k].begin());
    }
    return p[o];
}

std::vector<double> JointDistribution::marginal(const std::string& variable) const {
    auto it = std::find(variables.begin(), variables.end(), variable);
    if (it == variables.end()) throw Error("UnknownVariable", "'" + variable + "' not in query", variable);
    const auto k = static_cast<std::size_t>(it - variables.begin());
    std::vector<std::size_t> card;
    for (const auto& oc : outcomes) card.push_back(oc.size());
    std::vector<double> m(card[k], 0.0);
    std::vector<std::size_t> a(card.size(), 0);
    std::size_t o = 0;
    do {
        m[a[k]] += p[o++];
    } while (advance(a, card));
    return m;
}

JointDistribution posterior_query(const CrisisNetwork& net, const std::vector<std::string>& query,
                                  const Evidence& evidence) {
    if (query.empty()) throw Error("InvalidQuery", "query is empty");
    std::vector<std::size_t> q;
    for (const auto& name : query) {
        auto v = net.index_of(name);
        if (std::find(q.begin(), q.end(), v) != q.end())
            throw Error("InvalidQuery", "variable '" + name + "' queried twice", name);
        q.push_back(v);
    }
    std::map<std::size_t, std::size_t> ev;
    for (const auto& [name, label] : evidence) {
        auto v = net.index_of(name);
        ev[v] = net.outcome_index(v, label);
    }

    std::vector<Factor> factors;
    for (std::size_t v = 0; v < net.size(); ++v) {
        Factor f = from_table(net, v);
        for (const auto& [u, val] : ev) f = restrict(f, u, val);
        factors.push_back(std::move(f));
    }

    std::set<std::size_t> keep;
    for (auto v : q)
        if (!ev.count(v)) keep.insert(v);
    std::set<std::size_t> pending;
    for (std::size_t v = 0; v < net.size(); ++v)
        if (!keep.count(v) && !ev.count(v)) pending.insert(v);

    while (!pending.empty()) {
        // min-degree in the current interaction graph, ties by name
        std::size_t best = *pending.begin();
        std::size_t best_deg = SIZE_MAX;
        for (auto v : pending) {
            std::set<std::size_t> nb;
            for (const auto& f : factors)
                if (std::binary_search(f.vars.begin(), f.vars.end(), v)) nb.insert(f.vars.begin(), f.vars.end());
            nb.erase(v);
            if (nb.size() < best_deg ||
                (nb.size() == best_deg && net.variable(v).name < net.variable(best).name)) {
                best = v;
                best_deg = nb.size();
            }
        }
        pending.erase(best);
        std::vector<Factor> rest;
        Factor prod{{}, {}, {1.0}};
        for (auto& f : factors) {
            if (std::binary_search(f.vars.begin(), f.vars.end(), best))
                prod = multiply(prod, f);
            else
                rest.push_back(std::move(f));
        }
        rest.push_back(sum_out(prod, best));
        factors = std::move(rest);
    }

    Factor joint{{}, {}, {1.0}};
    for (const auto& f : factors) joint = multiply(joint, f);
    double z = std::accumulate(joint.vals.begin(), joint.vals.end(), 0.0);
    if (!(z > 0.0)) throw Error("ZeroProbabilityEvidence", "evidence has probability zero under the network");

    JointDistribution out;
    std::vector<std::size_t> card;
    for (auto v : q) {
        out.variables.push_back(net.variable(v).name);
        out.outcomes.push_back(net.variable(v).outcomes);
        card.push_back(net.variable(v).outcomes.size());
    }
    out.p.assign(volume(card), 0.0);
    std::vector<std::size_t> a(q.size(), 0), b(joint.vars.size());
    std::size_t o = 0;
    do {
        bool consistent = true;
        std::size_t bi = 0;
        for (std::size_t k = 0; k < q.size(); ++k) {
            auto e = ev.find(q[k]);
            if (e != ev.end()) {
                if (a[k] != e->second) consistent = false;
            }
        }
        if (consistent) {
            for (auto u : joint.vars) {
                auto k = static_cast<std::size_t>(std::find(q.begin(), q.end(), u) - q.begin());
                b[bi++] = a[k];
            }
            out.p[o] = joint.vals[offset(b, joint.card)] / z;
        }
        ++o;
    } while (advance(a, card));
    return out;
}

bool d_separated(const CrisisNetwork& net, const std::string& x, const std::string& y,
                 const std::vector<std::string>& given) {
    const auto xs = net.index_of(x);
    const auto ys = net.index_of(y);
    std::vector<bool> observed(net.size(), false);
    for (const auto& g : given) observed[net.index_of(g)] = true;
    if (observed[xs] || observed[ys]) return true;
    if (xs == ys) return false;

    // ancestors of the conditioning set decide whether a collider is open
    std::vector<bool> anc(net.size(), false);
    std::vector<std::size_t> work;
    for (std::size_t i = 0; i < net.size(); ++i)
        if (observed[i]) work.push_back(i);
    while (!work.empty()) {
        auto u = work.back();
        work.pop_back();
        if (anc[u]) continue;
        anc[u] = true;
        for (auto p : net.parents(u)) work.push_back(p);
    }

    // ball passing: direction true = arriving from a child (moving up)
    std::set<std::pair<std::size_t, bool>> seen;
    std::vector<std::pair<std::size_t, bool>> queue{{xs, true}};
    while (!queue.empty()) {
        auto [u, up] = queue.back();
        queue.pop_back();
        if (!seen.insert({u, up}).second) continue;
        if (!observed[u] && u == ys) return false;
        if (up && !observed[u]) {
            for (auto p : net.parents(u)) queue.push_back({p, true});
            for (auto c : net.children(u)) queue.push_back({c, false});
        } else if (!up) {
            if (!observed[u])
                for (auto c : net.children(u)) queue.push_back({c, false});
            if (anc[u])
                for (auto p : net.parents(u)) queue.push_back({p, true});
        }
    }
    return true;
}

}  // namespace sentinel
