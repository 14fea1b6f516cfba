#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "snell/step_path.hpp"

namespace snell {

struct TreeNode {
    int parent = -1;  // -1 for the root
    int time_index = 0;
    double branch_prob = 1.0;  // probability of reaching this node from its parent
    double value = 0.0;        // driver outcome realized at this node
    std::vector<int> children;
};

// Finite filtered scenario space: a tree over discrete driver outcomes. Every
// root-to-leaf path has exactly depth()+1 nodes; node ids index into an arena.
// Child branch probabilities at every internal node must sum to 1 within
// 1e-12 and are renormalized exactly at construction. Immutable afterwards.
class ScenarioTree {
public:
    class Builder {
    public:
        // The root carries probability 1.
        int add_root(double value);
        int add_child(int parent, double branch_prob, double value);
        ScenarioTree finalize(TimeGrid times) &&;

    private:
        std::vector<TreeNode> nodes_;
    };

    int node_count() const { return static_cast<int>(nodes_.size()); }
    const TreeNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    const TimeGrid& times() const { return times_; }
    int depth() const { return static_cast<int>(times_.size()) - 1; }
    int root() const { return 0; }

    // Leaves in increasing node-id order; per-leaf quantities are indexed by
    // position in this list.
    const std::vector<int>& leaves() const { return leaves_; }
    int leaf_count() const { return static_cast<int>(leaves_.size()); }
    double leaf_weight(int leaf_index) const { return weights_[static_cast<std::size_t>(leaves_[static_cast<std::size_t>(leaf_index)])]; }
    double node_weight(int id) const { return weights_.at(static_cast<std::size_t>(id)); }

    // Ancestor of `id` at the given time index (walks parent links).
    int ancestor_at(int id, int time_index) const;
    // Node ids along the root-to-leaf chain, length depth()+1.
    std::vector<int> path_nodes(int leaf_index) const;

private:
    friend class Builder;
    ScenarioTree(std::vector<TreeNode> nodes, TimeGrid times);

    std::vector<TreeNode> nodes_;
    TimeGrid times_;
    std::vector<int> leaves_;
    std::vector<double> weights_;  // scenario weight per node (product of branch probs)
};

// One cell of a natural-filtration partition: the set of depth-k nodes (and
// the leaves below them) whose observable value history up to k coincides
// exactly.
struct FiltrationAtom {
    double weight = 0.0;
    double value = 0.0;  // observable value at this atom's time index
    int parent = -1;     // atom index at the previous level
    std::vector<int> nodes;     // member node ids at this depth
    std::vector<int> children;  // atom indices at the next level
    std::vector<int> leaves;    // leaf positions below the member nodes
};

struct FiltrationLevel {
    std::vector<FiltrationAtom> atoms;
    std::vector<int> atom_of_node;  // node id -> atom index (-1 off this level)
};

// Value-prefix atom partitions of one observable for every time index
// 0..depth; level k+1 refines level k by construction.
struct FiltrationIndex {
    std::vector<FiltrationLevel> levels;
};

// Leaf-set partition view at one time index.
struct AtomPartition {
    int time_index = 0;
    std::string observable;
    std::vector<std::vector<int>> atoms;  // leaf positions per atom
    std::vector<double> weights;          // total weight per atom
};

struct LeafScenario {
    int leaf = -1;  // node id
    double weight = 0.0;
    std::map<std::string, StepPath> paths;
};

// A scenario tree carrying named observable processes, each a function of
// the driver path prefix (one value per node). Every observable induces its
// own filtration via exact value-prefix atoms, built eagerly so all queries
// are const and thread-safe.
class CoupledSpace {
public:
    explicit CoupledSpace(ScenarioTree tree);
    CoupledSpace(ScenarioTree tree, std::map<std::string, std::vector<double>> observables);

    const ScenarioTree& tree() const { return tree_; }
    int depth() const { return tree_.depth(); }

    bool has_observable(const std::string& name) const;
    std::vector<std::string> observable_names() const;
    // Node-indexed values; throws std::out_of_range for unknown names.
    const std::vector<double>& observable(const std::string& name) const;
    const FiltrationIndex& filtration(const std::string& name) const;

    // Copy of this space with one more observable.
    CoupledSpace with_observable(const std::string& name, std::vector<double> node_values) const;

    // Observable value on the path of `leaf_index` at a time index.
    double value_at(const std::string& name, int leaf_index, int time_index) const;

private:
    void add_observable(const std::string& name, std::vector<double> node_values);

    ScenarioTree tree_;
    std::map<std::string, std::vector<double>> observables_;
    std::map<std::string, FiltrationIndex> filtrations_;
};

// One entry per leaf; weights sum to 1 within 1e-12; paths built from the
// observable values along the leaf's ancestor chain on the tree's time grid.
std::vector<LeafScenario> leaf_scenarios(const CoupledSpace& space);

AtomPartition atom_partition(const CoupledSpace& space, const std::string& observable,
                             int time_index);

// Exact conditional expectation with respect to the observable's filtration
// at a time index: on each atom, the weight-weighted average of f; returned
// per leaf (constant on atoms).
std::vector<double> cond_expectation(const CoupledSpace& space, const std::vector<double>& f,
                                     const std::string& observable, int time_index);

double expectation(const CoupledSpace& space, const std::vector<double>& f);

// Convenience: expectation of a leaf functional.
double expectation(const CoupledSpace& space, const std::function<double(int)>& f);

}  // namespace snell
