#include "snell/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snell {

int ScenarioTree::Builder::add_root(double value) {
    if (!nodes_.empty()) throw std::invalid_argument("ScenarioTree: root already added");
    TreeNode n;
    n.parent = -1;
    n.time_index = 0;
    n.branch_prob = 1.0;
    n.value = value;
    nodes_.push_back(std::move(n));
    return 0;
}

int ScenarioTree::Builder::add_child(int parent, double branch_prob, double value) {
    if (parent < 0 || parent >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument("ScenarioTree: unknown parent");
    if (!(branch_prob > 0.0) || branch_prob > 1.0 + 1e-12)
        throw std::invalid_argument("ScenarioTree: branch probability must lie in (0, 1]");
    TreeNode n;
    n.parent = parent;
    n.time_index = nodes_[static_cast<std::size_t>(parent)].time_index + 1;
    n.branch_prob = branch_prob;
    n.value = value;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(n));
    nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
    return id;
}

ScenarioTree ScenarioTree::Builder::finalize(TimeGrid times) && {
    if (nodes_.empty()) throw std::invalid_argument("ScenarioTree: empty tree");
    return ScenarioTree(std::move(nodes_), std::move(times));
}

ScenarioTree::ScenarioTree(std::vector<TreeNode> nodes, TimeGrid times)
    : nodes_(std::move(nodes)), times_(std::move(times)) {
    const int d = depth();
    // Children probabilities must sum to 1 within 1e-12; renormalize exactly.
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        TreeNode& n = nodes_[id];
        if (n.children.empty()) {
            if (n.time_index != d)
                throw std::invalid_argument("ScenarioTree: leaf off the terminal time index");
            continue;
        }
        double s = 0.0;
        for (int c : n.children) s += nodes_[static_cast<std::size_t>(c)].branch_prob;
        if (std::abs(s - 1.0) > 1e-12)
            throw std::invalid_argument("ScenarioTree: branch probabilities must sum to 1");
        for (int c : n.children) nodes_[static_cast<std::size_t>(c)].branch_prob /= s;
    }
    weights_.resize(nodes_.size());
    weights_[0] = 1.0;
    for (std::size_t id = 1; id < nodes_.size(); ++id) {
        const TreeNode& n = nodes_[id];
        if (n.time_index != nodes_[static_cast<std::size_t>(n.parent)].time_index + 1)
            throw std::invalid_argument("ScenarioTree: time index must equal path depth");
        weights_[id] = weights_[static_cast<std::size_t>(n.parent)] * n.branch_prob;
    }
    double total = 0.0;
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
        if (nodes_[id].children.empty()) {
            leaves_.push_back(static_cast<int>(id));
            total += weights_[id];
        }
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("ScenarioTree: leaf weights must sum to 1");
}

int ScenarioTree::ancestor_at(int id, int time_index) const {
    const TreeNode* n = &node(id);
    if (time_index > n->time_index)
        throw std::invalid_argument("ScenarioTree: time index beyond node depth");
    while (n->time_index > time_index) {
        id = n->parent;
        n = &node(id);
    }
    return id;
}

std::vector<int> ScenarioTree::path_nodes(int leaf_index) const {
    std::vector<int> out(static_cast<std::size_t>(depth()) + 1);
    int id = leaves_.at(static_cast<std::size_t>(leaf_index));
    for (int k = depth(); k >= 0; --k) {
        out[static_cast<std::size_t>(k)] = id;
        id = node(id).parent;
    }
    return out;
}

CoupledSpace::CoupledSpace(ScenarioTree tree) : tree_(std::move(tree)) {}

CoupledSpace::CoupledSpace(ScenarioTree tree, std::map<std::string, std::vector<double>> observables)
    : tree_(std::move(tree)) {
    for (auto& [name, values] : observables) add_observable(name, std::move(values));
}

bool CoupledSpace::has_observable(const std::string& name) const {
    return observables_.count(name) > 0;
}

std::vector<std::string> CoupledSpace::observable_names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : observables_) out.push_back(name);
    return out;
}

const std::vector<double>& CoupledSpace::observable(const std::string& name) const {
    auto it = observables_.find(name);
    if (it == observables_.end()) throw std::out_of_range("unknown observable: " + name);
    return it->second;
}

const FiltrationIndex& CoupledSpace::filtration(const std::string& name) const {
    auto it = filtrations_.find(name);
    if (it == filtrations_.end()) throw std::out_of_range("unknown observable: " + name);
    return it->second;
}

CoupledSpace CoupledSpace::with_observable(const std::string& name,
                                           std::vector<double> node_values) const {
    CoupledSpace out(*this);
    out.add_observable(name, std::move(node_values));
    return out;
}

double CoupledSpace::value_at(const std::string& name, int leaf_index, int time_index) const {
    const std::vector<double>& values = observable(name);
    const int id = tree_.ancestor_at(tree_.leaves().at(static_cast<std::size_t>(leaf_index)), time_index);
    return values[static_cast<std::size_t>(id)];
}

void CoupledSpace::add_observable(const std::string& name, std::vector<double> node_values) {
    if (observables_.count(name))
        throw std::invalid_argument("observable already registered: " + name);
    if (node_values.size() != static_cast<std::size_t>(tree_.node_count()))
        throw std::invalid_argument("observable must be defined on every node: " + name);

    // Build the value-prefix filtration level by level; level k+1 refines
    // level k because nodes are grouped within their parent atom.
    FiltrationIndex fi;
    fi.levels.resize(static_cast<std::size_t>(tree_.depth()) + 1);

    // Leaf positions below each node, computed bottom-up once.
    std::vector<std::vector<int>> leaves_below(static_cast<std::size_t>(tree_.node_count()));
    for (int li = 0; li < tree_.leaf_count(); ++li)
        leaves_below[static_cast<std::size_t>(tree_.leaves()[static_cast<std::size_t>(li)])].push_back(li);
    for (int id = tree_.node_count() - 1; id >= 0; --id) {
        const TreeNode& n = tree_.node(id);
        for (int c : n.children) {
            auto& mine = leaves_below[static_cast<std::size_t>(id)];
            auto& theirs = leaves_below[static_cast<std::size_t>(c)];
            mine.insert(mine.end(), theirs.begin(), theirs.end());
        }
        std::sort(leaves_below[static_cast<std::size_t>(id)].begin(),
                  leaves_below[static_cast<std::size_t>(id)].end());
    }

    for (int k = 0; k <= tree_.depth(); ++k) {
        FiltrationLevel& level = fi.levels[static_cast<std::size_t>(k)];
        level.atom_of_node.assign(static_cast<std::size_t>(tree_.node_count()), -1);
        if (k == 0) {
            FiltrationAtom atom;
            atom.value = node_values[0];
            atom.weight = 1.0;
            atom.parent = -1;
            atom.nodes = {tree_.root()};
            atom.leaves = leaves_below[0];
            level.atom_of_node[0] = 0;
            level.atoms.push_back(std::move(atom));
            continue;
        }
        FiltrationLevel& prev = fi.levels[static_cast<std::size_t>(k - 1)];
        for (std::size_t pa = 0; pa < prev.atoms.size(); ++pa) {
            // Group the member nodes' children by exact value; first-seen order.
            std::vector<double> seen;
            std::vector<int> atom_for_value;
            for (int nid : prev.atoms[pa].nodes) {
                for (int c : tree_.node(nid).children) {
                    const double v = node_values[static_cast<std::size_t>(c)];
                    int ai = -1;
                    for (std::size_t s = 0; s < seen.size(); ++s) {
                        if (seen[s] == v) {
                            ai = atom_for_value[s];
                            break;
                        }
                    }
                    if (ai < 0) {
                        ai = static_cast<int>(level.atoms.size());
                        FiltrationAtom atom;
                        atom.value = v;
                        atom.parent = static_cast<int>(pa);
                        level.atoms.push_back(std::move(atom));
                        prev.atoms[pa].children.push_back(ai);
                        seen.push_back(v);
                        atom_for_value.push_back(ai);
                    }
                    FiltrationAtom& atom = level.atoms[static_cast<std::size_t>(ai)];
                    atom.nodes.push_back(c);
                    atom.weight += tree_.node_weight(c);
                    const auto& lb = leaves_below[static_cast<std::size_t>(c)];
                    atom.leaves.insert(atom.leaves.end(), lb.begin(), lb.end());
                    level.atom_of_node[static_cast<std::size_t>(c)] = ai;
                }
            }
        }
        for (FiltrationAtom& atom : level.atoms) std::sort(atom.leaves.begin(), atom.leaves.end());
    }

    observables_.emplace(name, std::move(node_values));
    filtrations_.emplace(name, std::move(fi));
}

std::vector<LeafScenario> leaf_scenarios(const CoupledSpace& space) {
    const ScenarioTree& tree = space.tree();
    std::vector<LeafScenario> out;
    out.reserve(static_cast<std::size_t>(tree.leaf_count()));
    const double horizon = tree.times().back();
    for (int li = 0; li < tree.leaf_count(); ++li) {
        LeafScenario sc;
        sc.leaf = tree.leaves()[static_cast<std::size_t>(li)];
        sc.weight = tree.leaf_weight(li);
        const std::vector<int> chain = tree.path_nodes(li);
        for (const std::string& name : space.observable_names()) {
            const std::vector<double>& values = space.observable(name);
            std::vector<double> samples(chain.size());
            for (std::size_t k = 0; k < chain.size(); ++k)
                samples[k] = values[static_cast<std::size_t>(chain[k])];
            sc.paths.emplace(name, StepPath::from_samples(tree.times().points(), samples, horizon));
        }
        out.push_back(std::move(sc));
    }
    return out;
}

AtomPartition atom_partition(const CoupledSpace& space, const std::string& observable,
                             int time_index) {
    if (time_index < 0 || time_index > space.depth())
        throw std::invalid_argument("atom_partition: time index out of range");
    const FiltrationLevel& level =
        space.filtration(observable).levels[static_cast<std::size_t>(time_index)];
    AtomPartition part;
    part.time_index = time_index;
    part.observable = observable;
    for (const FiltrationAtom& atom : level.atoms) {
        part.atoms.push_back(atom.leaves);
        part.weights.push_back(atom.weight);
    }
    return part;
}

std::vector<double> cond_expectation(const CoupledSpace& space, const std::vector<double>& f,
                                     const std::string& observable, int time_index) {
    if (time_index < 0 || time_index > space.depth())
        throw std::invalid_argument("cond_expectation: time index out of range");
    const ScenarioTree& tree = space.tree();
    if (f.size() != static_cast<std::size_t>(tree.leaf_count()))
        throw std::invalid_argument("cond_expectation: f must be defined on every leaf");
    const FiltrationLevel& level =
        space.filtration(observable).levels[static_cast<std::size_t>(time_index)];
    std::vector<double> out(f.size());
    for (const FiltrationAtom& atom : level.atoms) {
        double s = 0.0;
        for (int li : atom.leaves) s += tree.leaf_weight(li) * f[static_cast<std::size_t>(li)];
        const double avg = s / atom.weight;
        for (int li : atom.leaves) out[static_cast<std::size_t>(li)] = avg;
    }
    return out;
}

double expectation(const CoupledSpace& space, const std::vector<double>& f) {
    const ScenarioTree& tree = space.tree();
    if (f.size() != static_cast<std::size_t>(tree.leaf_count()))
        throw std::invalid_argument("expectation: f must be defined on every leaf");
    double s = 0.0;
    for (int li = 0; li < tree.leaf_count(); ++li)
        s += tree.leaf_weight(li) * f[static_cast<std::size_t>(li)];
    return s;
}

double expectation(const CoupledSpace& space, const std::function<double(int)>& f) {
    const ScenarioTree& tree = space.tree();
    double s = 0.0;
    for (int li = 0; li < tree.leaf_count(); ++li) s += tree.leaf_weight(li) * f(li);
    return s;
}

}  // namespace snell
