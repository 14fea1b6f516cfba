#include "snell/procgen.hpp"

#include <cmath>
#include <stdexcept>

#include "snell/common.hpp"

namespace snell {

void CrrParams::validate() const {
    if (!(s0 > 0.0)) throw std::invalid_argument("CrrParams: s0 must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("CrrParams: sigma must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("CrrParams: horizon must be positive");
    if (steps < 1) throw std::invalid_argument("CrrParams: steps must be >= 1");
    if (!(down_factor() > 0.0))
        throw std::invalid_argument("CrrParams: prices must stay positive (1 + lambda*T/n - sigma*sqrt(T/n) > 0)");
    if (!(up_factor() > 0.0))
        throw std::invalid_argument("CrrParams: prices must stay positive");
}

double CrrParams::up_factor() const {
    const double dt = horizon / steps;
    return 1.0 + lambda * dt + sigma * std::sqrt(dt);
}

double CrrParams::down_factor() const {
    const double dt = horizon / steps;
    return 1.0 + lambda * dt - sigma * std::sqrt(dt);
}

namespace {

TimeGrid uniform_grid(int steps, double horizon) {
    std::vector<double> pts(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) pts[static_cast<std::size_t>(k)] = k * horizon / steps;
    return TimeGrid(std::move(pts));
}

}  // namespace

CoupledSpace gen_crr(const CrrParams& p) {
    p.validate();
    if (p.steps > 20)
        throw std::invalid_argument("gen_crr: full tree limited to 20 steps; use crr_snell_value");
    const double h = std::sqrt(p.horizon / p.steps);
    const double u = p.up_factor(), d = p.down_factor();

    ScenarioTree::Builder builder;
    builder.add_root(0.0);
    std::vector<double> walk{0.0}, price{p.s0};
    std::vector<int> frontier{0};
    for (int k = 0; k < p.steps; ++k) {
        std::vector<int> next;
        for (int id : frontier) {
            for (int coin : {+1, -1}) {
                const int c = builder.add_child(id, 0.5, static_cast<double>(coin));
                walk.push_back(walk[static_cast<std::size_t>(id)] + coin * h);
                price.push_back(price[static_cast<std::size_t>(id)] * (coin > 0 ? u : d));
                next.push_back(c);
            }
        }
        frontier = std::move(next);
    }
    ScenarioTree tree = std::move(builder).finalize(uniform_grid(p.steps, p.horizon));
    return CoupledSpace(std::move(tree), {{"B", std::move(walk)}, {"S", std::move(price)}});
}

CoupledSpace gen_random_walk(int steps, double horizon) {
    if (steps < 1) throw std::invalid_argument("gen_random_walk: steps must be >= 1");
    if (steps > 20) throw std::invalid_argument("gen_random_walk: full tree limited to 20 steps");
    const double h = walk_increment(steps, horizon);
    ScenarioTree::Builder builder;
    builder.add_root(0.0);
    std::vector<double> walk{0.0};
    std::vector<int> frontier{0};
    for (int k = 0; k < steps; ++k) {
        std::vector<int> next;
        for (int id : frontier) {
            for (int coin : {+1, -1}) {
                const int c = builder.add_child(id, 0.5, static_cast<double>(coin));
                walk.push_back(walk[static_cast<std::size_t>(id)] + coin * h);
                next.push_back(c);
            }
        }
        frontier = std::move(next);
    }
    ScenarioTree tree = std::move(builder).finalize(uniform_grid(steps, horizon));
    return CoupledSpace(std::move(tree), {{"B", std::move(walk)}});
}

double walk_increment(int steps, double horizon) {
    if (steps < 1) throw std::invalid_argument("walk_increment: steps must be >= 1");
    return std::sqrt(horizon / steps);
}

CoupledSpace discretize_process(const CoupledSpace& space, const std::string& source,
                                const TimeGrid& grid, const std::string& new_name) {
    const ScenarioTree& tree = space.tree();
    const std::vector<double>& src = space.observable(source);

    // Map grid points onto tree time indices (snap within tolerance).
    std::vector<int> grid_indices;
    for (double t : grid.points()) {
        auto idx = tree.times().index_of(t, kTimeTol);
        if (!idx) throw std::invalid_argument("discretize_process: grid point off the tree times");
        grid_indices.push_back(static_cast<int>(*idx));
    }

    // last_grid[k] = tree index of the largest grid point <= times[k].
    std::vector<int> last_grid(tree.times().size());
    {
        std::size_t g = 0;
        for (std::size_t k = 0; k < tree.times().size(); ++k) {
            while (g + 1 < grid_indices.size() &&
                   static_cast<std::size_t>(grid_indices[g + 1]) <= k)
                ++g;
            last_grid[k] = grid_indices[g];
        }
    }

    std::vector<double> values(static_cast<std::size_t>(tree.node_count()));
    for (int id = 0; id < tree.node_count(); ++id) {
        const int k = tree.node(id).time_index;
        const int anc = tree.ancestor_at(id, last_grid[static_cast<std::size_t>(k)]);
        values[static_cast<std::size_t>(id)] = src[static_cast<std::size_t>(anc)];
    }
    return space.with_observable(new_name, std::move(values));
}

std::string discretized_name(const std::string& source, const TimeGrid& grid) {
    return source + "@" + std::to_string(grid.size()) + "pts";
}

std::pair<StepPath, StepPath> gen_counterexample(int n) {
    if (n < 3) throw std::invalid_argument("gen_counterexample: n must be >= 3");
    StepPath x({0.0, 0.5}, {0.0, 1.0}, 1.0);
    StepPath xn({0.0, 0.5 + 1.0 / n}, {0.0, 1.0}, 1.0);
    return {std::move(x), std::move(xn)};
}

CoupledSpace space_from_path(const StepPath& path, const TimeGrid& grid, const std::string& name) {
    if (grid.back() > path.horizon() + kTimeTol)
        throw std::invalid_argument("space_from_path: grid exceeds the path horizon");
    ScenarioTree::Builder builder;
    int id = builder.add_root(path.eval(grid[0]));
    std::vector<double> values{path.eval(grid[0])};
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double v = path.eval(grid[k]);
        id = builder.add_child(id, 1.0, v);
        values.push_back(v);
    }
    ScenarioTree tree = std::move(builder).finalize(grid);
    return CoupledSpace(std::move(tree), {{name, std::move(values)}});
}

}  // namespace snell
