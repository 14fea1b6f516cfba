#include "snell/convergence.hpp"

#include <cmath>
#include <stdexcept>

#include "snell/step_path.hpp"

namespace snell {

namespace {

std::vector<double> indicator_of(const std::vector<int>& leaves, int leaf_count) {
    std::vector<double> f(static_cast<std::size_t>(leaf_count), 0.0);
    for (int li : leaves) f.at(static_cast<std::size_t>(li)) = 1.0;
    return f;
}

StepPath martingale_path(const CoupledSpace& space,
                         const std::vector<std::vector<double>>& cond_by_level, int leaf_index) {
    const ScenarioTree& tree = space.tree();
    std::vector<double> samples(cond_by_level.size());
    for (std::size_t k = 0; k < cond_by_level.size(); ++k)
        samples[k] = cond_by_level[k][static_cast<std::size_t>(leaf_index)];
    return StepPath::from_samples(tree.times().points(), samples, tree.times().back());
}

}  // namespace

double paths_in_prob_gap(const CoupledSpace& space, const std::string& fine,
                         const std::string& coarse, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("paths_in_prob_gap: eps must be positive");
    const ScenarioTree& tree = space.tree();
    const std::vector<double>& vf = space.observable(fine);
    const std::vector<double>& vc = space.observable(coarse);
    const double horizon = tree.times().back();
    double gap = 0.0;
    for (int li = 0; li < tree.leaf_count(); ++li) {
        const std::vector<int> chain = tree.path_nodes(li);
        std::vector<double> sf(chain.size()), sc(chain.size());
        for (std::size_t k = 0; k < chain.size(); ++k) {
            sf[k] = vf[static_cast<std::size_t>(chain[k])];
            sc[k] = vc[static_cast<std::size_t>(chain[k])];
        }
        const double d = skorokhod_distance(StepPath::from_samples(tree.times().points(), sc, horizon),
                                            StepPath::from_samples(tree.times().points(), sf, horizon));
        if (d >= eps) gap += tree.leaf_weight(li);
    }
    return gap;
}

double sigma_field_gap(const CoupledSpace& space, const std::vector<int>& A_leaves,
                       const std::string& observable, int time_index, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("sigma_field_gap: eps must be positive");
    const ScenarioTree& tree = space.tree();
    const std::vector<double> ind = indicator_of(A_leaves, tree.leaf_count());
    const std::vector<double> h = cond_expectation(space, ind, observable, time_index);
    double gap = 0.0;
    for (int li = 0; li < tree.leaf_count(); ++li) {
        if (std::abs(h[static_cast<std::size_t>(li)] - ind[static_cast<std::size_t>(li)]) >= eps)
            gap += tree.leaf_weight(li);
    }
    return gap;
}

double filtration_weak_gap(const CoupledSpace& space, const std::vector<int>& A_leaves,
                           const std::string& coarse, const std::string& fine, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("filtration_weak_gap: eps must be positive");
    const ScenarioTree& tree = space.tree();
    const std::vector<double> ind = indicator_of(A_leaves, tree.leaf_count());
    std::vector<std::vector<double>> hc(static_cast<std::size_t>(space.depth()) + 1);
    std::vector<std::vector<double>> hf(static_cast<std::size_t>(space.depth()) + 1);
    for (int k = 0; k <= space.depth(); ++k) {
        hc[static_cast<std::size_t>(k)] = cond_expectation(space, ind, coarse, k);
        hf[static_cast<std::size_t>(k)] = cond_expectation(space, ind, fine, k);
    }
    double gap = 0.0;
    for (int li = 0; li < tree.leaf_count(); ++li) {
        const double d = skorokhod_distance(martingale_path(space, hc, li),
                                            martingale_path(space, hf, li));
        if (d >= eps) gap += tree.leaf_weight(li);
    }
    return gap;
}

std::vector<BcTestFunction> default_bc_test_functions(double horizon) {
    std::vector<BcTestFunction> fns;
    fns.push_back({"one", [](double) { return 1.0; }});
    fns.push_back({"t/T", [horizon](double t) { return t / horizon; }});
    for (int k = 1; k <= 4; ++k) {
        const double w = 3.141592653589793 * k / horizon;
        fns.push_back({"cos" + std::to_string(k), [w](double t) { return std::cos(w * t); }});
    }
    return fns;
}

std::vector<std::pair<int, double>> bc_gap(const CoupledSpace& space,
                                           const std::vector<RandomizedStoppingRule>& seq,
                                           const RandomizedStoppingRule& limit,
                                           const std::vector<BcTestFunction>& test_fns,
                                           const std::vector<std::vector<int>>& test_sets) {
    if (test_fns.empty() || test_sets.empty())
        throw std::invalid_argument("bc_gap: test families must be non-empty");
    const ScenarioTree& tree = space.tree();

    // E[1_B f(tau)] for one rule, every (f, B) pair.
    auto moments = [&](const RandomizedStoppingRule& rule) {
        const std::vector<std::vector<double>> mass = stop_mass_by_leaf(space, rule);
        // Per leaf, E[f(tau) | leaf] for each test function.
        std::vector<std::vector<double>> per_leaf(test_fns.size(),
                                                  std::vector<double>(static_cast<std::size_t>(tree.leaf_count()), 0.0));
        for (int li = 0; li < tree.leaf_count(); ++li) {
            const auto& m = mass[static_cast<std::size_t>(li)];
            for (std::size_t fi = 0; fi < test_fns.size(); ++fi) {
                double acc = 0.0;
                for (std::size_t k = 0; k < m.size(); ++k)
                    if (m[k] != 0.0) acc += m[k] * test_fns[fi].f(tree.times()[k]);
                per_leaf[fi][static_cast<std::size_t>(li)] = acc;
            }
        }
        std::vector<double> out;
        out.reserve(test_fns.size() * test_sets.size());
        for (std::size_t fi = 0; fi < test_fns.size(); ++fi) {
            for (const std::vector<int>& B : test_sets) {
                double e = 0.0;
                for (int li : B)
                    e += tree.leaf_weight(li) * per_leaf[fi][static_cast<std::size_t>(li)];
                out.push_back(e);
            }
        }
        return out;
    };

    const std::vector<double> limit_moments = moments(limit);
    std::vector<std::pair<int, double>> gaps;
    gaps.reserve(seq.size());
    for (std::size_t n = 0; n < seq.size(); ++n) {
        const std::vector<double> m = moments(seq[n]);
        double g = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) g = std::max(g, std::abs(m[i] - limit_moments[i]));
        gaps.emplace_back(static_cast<int>(n), g);
    }
    return gaps;
}

bool ConvergenceReport::monotone_nonincreasing() const {
    for (std::size_t i = 1; i < gaps.size(); ++i)
        if (gaps[i].second > gaps[i - 1].second + 1e-12) return false;
    return true;
}

}  // namespace snell
