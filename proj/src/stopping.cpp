#include "snell/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "snell/common.hpp"

namespace snell {

namespace {

// A rule carrying decision rows wider than the filtration it claims to be
// adapted to was built against a different space.
template <typename Rows>
void check_rule_shape(const CoupledSpace& space, const std::string& observable,
                      const Rows& rows) {
    const FiltrationIndex& fi = space.filtration(observable);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (k >= fi.levels.size() || rows[k].size() > fi.levels[k].atoms.size())
            throw std::logic_error("stopping rule does not fit the filtration of " + observable);
    }
}

// decisions[k][atom] lookups tolerate rules that stored fewer levels or
// atoms than the filtration has; missing entries mean "continue".
bool decided_stop(const StoppingRule& rule, int k, int atom) {
    if (static_cast<std::size_t>(k) >= rule.decisions.size()) return false;
    const auto& row = rule.decisions[static_cast<std::size_t>(k)];
    if (static_cast<std::size_t>(atom) >= row.size()) return false;
    return row[static_cast<std::size_t>(atom)] != 0;
}

double stop_probability(const RandomizedStoppingRule& rule, int k, int atom) {
    if (static_cast<std::size_t>(k) >= rule.stop_prob.size()) return 0.0;
    const auto& row = rule.stop_prob[static_cast<std::size_t>(k)];
    if (static_cast<std::size_t>(atom) >= row.size()) return 0.0;
    const double p = row[static_cast<std::size_t>(atom)];
    if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("RandomizedStoppingRule: stop probability outside [0, 1]");
    return p;
}

}  // namespace

int horizon_index(const ScenarioTree& tree, double bound) {
    const std::vector<double>& pts = tree.times().points();
    int k = -1;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (pts[i] <= bound + kTimeTol) k = static_cast<int>(i);
    if (k < 0) throw std::invalid_argument("no grid time at or below the bound");
    return k;
}

std::vector<int> realized_indices(const CoupledSpace& space, const StoppingRule& rule) {
    const ScenarioTree& tree = space.tree();
    const FiltrationIndex& fi = space.filtration(rule.observable);
    check_rule_shape(space, rule.observable, rule.decisions);
    const int kl = horizon_index(tree, rule.bound);
    std::vector<int> out(static_cast<std::size_t>(tree.leaf_count()), kl);
    for (int li = 0; li < tree.leaf_count(); ++li) {
        const std::vector<int> chain = tree.path_nodes(li);
        for (int k = 0; k < kl; ++k) {
            const int atom =
                fi.levels[static_cast<std::size_t>(k)].atom_of_node[static_cast<std::size_t>(chain[static_cast<std::size_t>(k)])];
            if (decided_stop(rule, k, atom)) {
                out[static_cast<std::size_t>(li)] = k;
                break;
            }
        }
    }
    return out;
}

double realized_time(const CoupledSpace& space, const StoppingRule& rule, int leaf_index) {
    const std::vector<int> idx = realized_indices(space, rule);
    return space.tree().times()[static_cast<std::size_t>(idx.at(static_cast<std::size_t>(leaf_index)))];
}

StoppingRule rule_from_realized_indices(const CoupledSpace& space, const std::string& observable,
                                        const std::vector<int>& stop_index, double bound) {
    const ScenarioTree& tree = space.tree();
    if (stop_index.size() != static_cast<std::size_t>(tree.leaf_count()))
        throw std::invalid_argument("rule_from_realized_indices: one index per leaf required");
    const FiltrationIndex& fi = space.filtration(observable);
    const int kl = horizon_index(tree, bound);
    for (int v : stop_index)
        if (v < 0 || v > kl)
            throw std::invalid_argument("rule_from_realized_indices: index beyond the bound");

    StoppingRule rule;
    rule.observable = observable;
    rule.bound = bound;
    rule.decisions.resize(static_cast<std::size_t>(kl));
    for (int k = 0; k < kl; ++k) {
        const FiltrationLevel& level = fi.levels[static_cast<std::size_t>(k)];
        auto& row = rule.decisions[static_cast<std::size_t>(k)];
        row.assign(level.atoms.size(), 0);
        for (std::size_t a = 0; a < level.atoms.size(); ++a) {
            // {tau <= t_k} must be a union of atoms: constant within each.
            bool first = true, stopped = false;
            for (int li : level.atoms[a].leaves) {
                const bool s = stop_index[static_cast<std::size_t>(li)] <= k;
                if (first) {
                    stopped = s;
                    first = false;
                } else if (s != stopped) {
                    throw std::logic_error(
                        "rule_from_realized_indices: stopping indices not adapted to " + observable);
                }
            }
            row[a] = stopped ? 1 : 0;
        }
    }
    return rule;
}

StoppingRule stop_at_root(const CoupledSpace& space, const std::string& observable, double bound) {
    return rule_from_realized_indices(
        space, observable, std::vector<int>(static_cast<std::size_t>(space.tree().leaf_count()), 0),
        bound);
}

StoppingRule never_stop_early(const CoupledSpace& space, const std::string& observable,
                              double bound) {
    const int kl = horizon_index(space.tree(), bound);
    return rule_from_realized_indices(
        space, observable, std::vector<int>(static_cast<std::size_t>(space.tree().leaf_count()), kl),
        bound);
}

StoppingRule lemma_tn(const CoupledSpace& space, const StoppingRule& tau,
                      const std::string& target) {
    const ScenarioTree& tree = space.tree();
    if (!space.has_observable(target)) throw std::out_of_range("unknown observable: " + target);
    const std::vector<int> realized = realized_indices(space, tau);

    std::vector<int> taken(realized.begin(), realized.end());
    std::sort(taken.begin(), taken.end());
    taken.erase(std::unique(taken.begin(), taken.end()), taken.end());
    const int fallback = taken.back();

    const std::size_t n_leaves = static_cast<std::size_t>(tree.leaf_count());
    std::vector<int> out(n_leaves, fallback);
    std::vector<std::uint8_t> selected(n_leaves, 0);
    for (int kj : taken) {
        std::vector<double> indicator(n_leaves, 0.0);
        for (std::size_t li = 0; li < n_leaves; ++li)
            if (realized[li] == kj) indicator[li] = 1.0;
        const std::vector<double> h = cond_expectation(space, indicator, target, kj);
        for (std::size_t li = 0; li < n_leaves; ++li) {
            if (!selected[li] && h[li] > 0.5) {  // strict: ties are not selected
                out[li] = kj;
                selected[li] = 1;
            }
        }
    }
    return rule_from_realized_indices(space, target, out, tau.bound);
}

StoppingRule grid_round_up(const CoupledSpace& space, const StoppingRule& tau,
                           const TimeGrid& grid) {
    const ScenarioTree& tree = space.tree();
    if (!grid.index_of(tau.bound, kTimeTol))
        throw std::invalid_argument("grid_round_up: the bound must belong to the grid");
    std::vector<int> grid_tree_index;
    for (double t : grid.points()) {
        auto idx = tree.times().index_of(t, kTimeTol);
        if (!idx) throw std::invalid_argument("grid_round_up: grid point off the tree times");
        grid_tree_index.push_back(static_cast<int>(*idx));
    }
    const std::vector<int> realized = realized_indices(space, tau);
    std::vector<int> rounded(realized.size());
    for (std::size_t li = 0; li < realized.size(); ++li) {
        int up = -1;
        for (int g : grid_tree_index) {
            if (g >= realized[li]) {
                up = g;
                break;
            }
        }
        if (up < 0) throw std::logic_error("grid_round_up: no grid point above a realized time");
        rounded[li] = up;
    }
    return rule_from_realized_indices(space, tau.observable, rounded, tau.bound);
}

StoppingRule sample_randomized(const CoupledSpace& space, const RandomizedStoppingRule& rule,
                               double v) {
    if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("sample_randomized: v must lie in [0, 1]");
    const ScenarioTree& tree = space.tree();
    const FiltrationIndex& fi = space.filtration(rule.observable);
    check_rule_shape(space, rule.observable, rule.stop_prob);
    const int kl = horizon_index(tree, rule.bound);
    std::vector<int> stop_index(static_cast<std::size_t>(tree.leaf_count()), kl);
    for (int li = 0; li < tree.leaf_count(); ++li) {
        const std::vector<int> chain = tree.path_nodes(li);
        double cum = 0.0;
        for (int k = 0; k < kl; ++k) {
            const int atom =
                fi.levels[static_cast<std::size_t>(k)].atom_of_node[static_cast<std::size_t>(chain[static_cast<std::size_t>(k)])];
            cum += (1.0 - cum) * stop_probability(rule, k, atom);
            const bool hit = (v > 0.0) ? (cum >= v) : (cum > 0.0);
            if (hit) {
                stop_index[static_cast<std::size_t>(li)] = k;
                break;
            }
        }
    }
    return rule_from_realized_indices(space, rule.observable, stop_index, rule.bound);
}

RandomizedStoppingRule randomized_from_pure(const CoupledSpace& space, const StoppingRule& rule) {
    RandomizedStoppingRule out;
    out.observable = rule.observable;
    out.bound = rule.bound;
    const FiltrationIndex& fi = space.filtration(rule.observable);
    const int kl = horizon_index(space.tree(), rule.bound);
    out.stop_prob.resize(static_cast<std::size_t>(kl));
    for (int k = 0; k < kl; ++k) {
        const std::size_t n_atoms = fi.levels[static_cast<std::size_t>(k)].atoms.size();
        auto& row = out.stop_prob[static_cast<std::size_t>(k)];
        row.assign(n_atoms, 0.0);
        for (std::size_t a = 0; a < n_atoms; ++a)
            row[a] = decided_stop(rule, k, static_cast<int>(a)) ? 1.0 : 0.0;
    }
    return out;
}

std::vector<std::vector<double>> stop_mass_by_leaf(const CoupledSpace& space,
                                                   const RandomizedStoppingRule& rule) {
    const ScenarioTree& tree = space.tree();
    const FiltrationIndex& fi = space.filtration(rule.observable);
    check_rule_shape(space, rule.observable, rule.stop_prob);
    const int kl = horizon_index(tree, rule.bound);
    std::vector<std::vector<double>> mass(static_cast<std::size_t>(tree.leaf_count()));
    for (int li = 0; li < tree.leaf_count(); ++li) {
        const std::vector<int> chain = tree.path_nodes(li);
        auto& m = mass[static_cast<std::size_t>(li)];
        m.assign(static_cast<std::size_t>(kl) + 1, 0.0);
        double alive = 1.0;
        for (int k = 0; k < kl; ++k) {
            const int atom =
                fi.levels[static_cast<std::size_t>(k)].atom_of_node[static_cast<std::size_t>(chain[static_cast<std::size_t>(k)])];
            const double p = stop_probability(rule, k, atom);
            m[static_cast<std::size_t>(k)] = alive * p;
            alive *= (1.0 - p);
        }
        m[static_cast<std::size_t>(kl)] = alive;  // remaining mass stops at the bound
    }
    return mass;
}

}  // namespace snell
