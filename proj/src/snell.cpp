#include "snell/snell.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "snell/common.hpp"

namespace snell {

Payoff::Payoff(std::string name, std::function<double(double, double)> gamma, double bound,
               std::string note, double t_max, double x_min, double x_max)
    : name_(std::move(name)), gamma_(std::move(gamma)), bound_(bound), note_(std::move(note)) {
    if (!gamma_) throw std::invalid_argument("Payoff: missing gain function");
    if (bounded()) {
        for (int i = 0; i < 100; ++i) {
            for (int j = 0; j < 100; ++j) {
                const double t = t_max * i / 99.0;
                const double x = x_min + (x_max - x_min) * j / 99.0;
                if (std::abs(gamma_(t, x)) > bound_ + 1e-9)
                    throw std::invalid_argument("Payoff '" + name_ +
                                                "': recorded bound violated on the sample grid");
            }
        }
    }
}

bool Payoff::bounded() const { return std::isfinite(bound_); }

Payoff make_payoff(const std::string& name) {
    if (name == "capped-identity")
        return Payoff(name, [](double, double x) { return std::min(x, 2.0); }, 2.0,
                      "continuous, bounded on the nonnegative range", 10.0, 0.0, 10.0);
    if (name == "identity")
        return Payoff(name, [](double, double x) { return x; },
                      std::numeric_limits<double>::infinity(), "unbounded diagnostic");
    if (name == "arctan")
        return Payoff(name, [](double, double x) { return std::atan(x); }, 1.5707963267948966,
                      "continuous, bounded", 10.0, -10.0, 10.0);
    if (name.rfind("capped:", 0) == 0) {
        const double cap = std::stod(name.substr(7));
        if (!(cap > 0.0)) throw std::invalid_argument("make_payoff: cap must be positive");
        return Payoff(name, [cap](double, double x) { return std::min(x, cap); }, cap,
                      "continuous, bounded on the nonnegative range", 10.0, 0.0, cap);
    }
    throw std::invalid_argument("make_payoff: unknown payoff '" + name + "'");
}

double stopped_value(const CoupledSpace& space, const std::string& observable,
                     const Payoff& payoff, const StoppingRule& rule) {
    const ScenarioTree& tree = space.tree();
    const std::vector<int> idx = realized_indices(space, rule);
    double s = 0.0;
    for (int li = 0; li < tree.leaf_count(); ++li) {
        const int k = idx[static_cast<std::size_t>(li)];
        const double t = tree.times()[static_cast<std::size_t>(k)];
        s += tree.leaf_weight(li) * payoff(t, space.value_at(observable, li, k));
    }
    return s;
}

namespace {

struct SnellDp {
    double value = 0.0;
    StoppingRule rule;
};

// Shared backward induction: stopping allowed at time indices flagged in
// `allowed` (the horizon index is always a forced stop).
SnellDp snell_dp(const CoupledSpace& space, const std::string& observable, const Payoff& payoff,
                 const std::vector<std::uint8_t>& allowed, int kl, double bound) {
    const ScenarioTree& tree = space.tree();
    const FiltrationIndex& fi = space.filtration(observable);

    SnellDp out;
    out.rule.observable = observable;
    out.rule.bound = bound;
    out.rule.decisions.resize(static_cast<std::size_t>(kl));

    std::vector<double> next;  // values per atom at level k+1
    for (int k = kl; k >= 0; --k) {
        const FiltrationLevel& level = fi.levels[static_cast<std::size_t>(k)];
        const double t = tree.times()[static_cast<std::size_t>(k)];
        std::vector<double> cur(level.atoms.size());
        if (k < kl) out.rule.decisions[static_cast<std::size_t>(k)].assign(level.atoms.size(), 0);
        for (std::size_t a = 0; a < level.atoms.size(); ++a) {
            const FiltrationAtom& atom = level.atoms[a];
            if (k == kl) {
                cur[a] = payoff(t, atom.value);
                continue;
            }
            double cont = 0.0;
            for (int c : atom.children) {
                const FiltrationAtom& child =
                    fi.levels[static_cast<std::size_t>(k) + 1].atoms[static_cast<std::size_t>(c)];
                cont += (child.weight / atom.weight) * next[static_cast<std::size_t>(c)];
            }
            if (allowed[static_cast<std::size_t>(k)]) {
                const double stop = payoff(t, atom.value);
                if (stop >= cont) {  // ties stop: earliest optimal rule
                    cur[a] = stop;
                    out.rule.decisions[static_cast<std::size_t>(k)][a] = 1;
                } else {
                    cur[a] = cont;
                }
            } else {
                cur[a] = cont;
            }
        }
        next = std::move(cur);
    }
    out.value = next.at(0);
    return out;
}

}  // namespace

ValueReport snell_value(const CoupledSpace& space, const std::string& observable,
                        const Payoff& payoff, double L) {
    const auto t0 = std::chrono::steady_clock::now();
    if (L < 0.0) throw std::invalid_argument("snell_value: L must be nonnegative");
    const int kl = horizon_index(space.tree(), L);
    std::vector<std::uint8_t> allowed(static_cast<std::size_t>(kl) + 1, 1);
    SnellDp dp = snell_dp(space, observable, payoff, allowed, kl, L);

    ValueReport report;
    report.value = dp.value;
    report.rule = std::move(dp.rule);
    report.observable = observable;
    report.payoff = payoff.name();
    report.bound_L = L;
    report.tree_id = tree_fingerprint(space);
    report.unbounded_payoff = !payoff.bounded();
    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

ValueReport gamma_pi(const CoupledSpace& space, const std::string& observable,
                     const Payoff& payoff, const TimeGrid& pi, double L) {
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioTree& tree = space.tree();
    if (!pi.index_of(L, kTimeTol))
        throw std::invalid_argument("gamma_pi: L must belong to the stopping grid");
    if (!tree.times().contains(pi, kTimeTol))
        throw std::invalid_argument("gamma_pi: stopping grid off the tree times");
    const int kl = horizon_index(tree, L);
    std::vector<std::uint8_t> allowed(static_cast<std::size_t>(kl) + 1, 0);
    for (double t : pi.points()) {
        auto idx = tree.times().index_of(t, kTimeTol);
        if (idx && static_cast<int>(*idx) <= kl) allowed[*idx] = 1;
    }
    SnellDp dp = snell_dp(space, observable, payoff, allowed, kl, L);

    ValueReport report;
    report.value = dp.value;
    report.rule = std::move(dp.rule);
    report.restriction = pi;
    report.observable = observable;
    report.payoff = payoff.name();
    report.bound_L = L;
    report.tree_id = tree_fingerprint(space);
    report.unbounded_payoff = !payoff.bounded();
    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

double randomized_value(const CoupledSpace& space, const std::string& observable,
                        const Payoff& payoff, const RandomizedStoppingRule& rule) {
    const ScenarioTree& tree = space.tree();
    const std::vector<std::vector<double>> mass = stop_mass_by_leaf(space, rule);
    double s = 0.0;
    for (int li = 0; li < tree.leaf_count(); ++li) {
        const auto& m = mass[static_cast<std::size_t>(li)];
        double total = 0.0, acc = 0.0;
        for (std::size_t k = 0; k < m.size(); ++k) {
            total += m[k];
            if (m[k] != 0.0) {
                const double t = tree.times()[k];
                acc += m[k] * payoff(t, space.value_at(observable, li, static_cast<int>(k)));
            }
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::logic_error("randomized_value: stop mass does not reach 1 by the bound");
        s += tree.leaf_weight(li) * acc;
    }
    return s;
}

double aldous_sup(const CoupledSpace& space, const std::string& observable, double delta,
                  double eps, double L) {
    if (!(delta > 0.0)) throw std::invalid_argument("aldous_sup: delta must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("aldous_sup: eps must be positive");
    const ScenarioTree& tree = space.tree();
    const FiltrationIndex& fi = space.filtration(observable);
    const int kl = horizon_index(tree, L);

    // inner(k, a): best probability of |x_a - X_T| >= eps over adapted T with
    // t_k <= T <= min(t_k + delta, L), starting from atom a at level k. The
    // reference value is the atom's own observable value (the atom determines
    // X_S). Atoms below a form a tree, so plain recursion visits each once.
    std::function<double(int, int, int, double)> descend =
        [&](int u, int atom_index, int u_max, double ref) -> double {
        const FiltrationAtom& atom =
            fi.levels[static_cast<std::size_t>(u)].atoms[static_cast<std::size_t>(atom_index)];
        const double stop = (std::abs(ref - atom.value) >= eps) ? 1.0 : 0.0;
        if (u >= u_max || stop == 1.0) return stop;
        double cont = 0.0;
        for (int c : atom.children)
            cont += (fi.levels[static_cast<std::size_t>(u) + 1]
                         .atoms[static_cast<std::size_t>(c)]
                         .weight /
                     atom.weight) *
                    descend(u + 1, c, u_max, ref);
        return std::max(stop, cont);
    };
    auto inner = [&](int k, int a0) -> double {
        const double t_hi =
            std::min(tree.times()[static_cast<std::size_t>(k)] + delta, L) + kTimeTol;
        int u_max = k;
        while (u_max < kl && tree.times()[static_cast<std::size_t>(u_max) + 1] <= t_hi) ++u_max;
        const double ref =
            fi.levels[static_cast<std::size_t>(k)].atoms[static_cast<std::size_t>(a0)].value;
        return descend(k, a0, u_max, ref);
    };

    // Outer recursion over S.
    std::vector<double> next;
    for (int k = kl; k >= 0; --k) {
        const FiltrationLevel& level = fi.levels[static_cast<std::size_t>(k)];
        std::vector<double> cur(level.atoms.size());
        for (std::size_t a = 0; a < level.atoms.size(); ++a) {
            const double stop_here = inner(k, static_cast<int>(a));
            if (k == kl) {
                cur[a] = stop_here;
                continue;
            }
            double cont = 0.0;
            for (int c : level.atoms[a].children) {
                const FiltrationAtom& child =
                    fi.levels[static_cast<std::size_t>(k) + 1].atoms[static_cast<std::size_t>(c)];
                cont += (child.weight / level.atoms[a].weight) * next[static_cast<std::size_t>(c)];
            }
            cur[a] = std::max(stop_here, cont);
        }
        next = std::move(cur);
    }
    return next.at(0);
}

ValueReport crr_snell_value(const CrrParams& params, const Payoff& payoff, double L) {
    const auto t0 = std::chrono::steady_clock::now();
    params.validate();
    const int n = params.steps;
    const double dt = params.horizon / n;
    const double u = params.up_factor(), d = params.down_factor();
    const int kl = [&] {
        int k = -1;
        for (int i = 0; i <= n; ++i)
            if (i * dt <= L + kTimeTol) k = i;
        if (k < 0) throw std::invalid_argument("crr_snell_value: no grid time at or below L");
        return k;
    }();

    // Lattice prices s0 * u^j * d^(k-j); backward induction with equal
    // one-half branch weights.
    std::vector<double> value(static_cast<std::size_t>(kl) + 1);
    for (int j = 0; j <= kl; ++j)
        value[static_cast<std::size_t>(j)] =
            payoff(kl * dt, params.s0 * std::pow(u, j) * std::pow(d, kl - j));
    for (int k = kl - 1; k >= 0; --k) {
        for (int j = 0; j <= k; ++j) {
            const double cont = 0.5 * (value[static_cast<std::size_t>(j) + 1] +
                                       value[static_cast<std::size_t>(j)]);
            const double stop = payoff(k * dt, params.s0 * std::pow(u, j) * std::pow(d, k - j));
            value[static_cast<std::size_t>(j)] = std::max(stop, cont);
        }
    }

    ValueReport report;
    report.value = value[0];
    report.observable = "S";
    report.payoff = payoff.name();
    report.bound_L = L;
    report.tree_id = "crr-lattice";
    report.unbounded_payoff = !payoff.bounded();
    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

std::string tree_fingerprint(const CoupledSpace& space) {
    const ScenarioTree& tree = space.tree();
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    auto mix_double = [&](double x) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(x));
        std::memcpy(&bits, &x, sizeof(bits));
        mix(bits);
    };
    for (double t : tree.times().points()) mix_double(t);
    for (int id = 0; id < tree.node_count(); ++id) {
        mix(static_cast<std::uint64_t>(tree.node(id).parent + 1));
        mix_double(tree.node(id).branch_prob);
        mix_double(tree.node(id).value);
    }
    for (const std::string& name : space.observable_names()) {
        for (char c : name) mix(static_cast<std::uint64_t>(c));
        for (double v : space.observable(name)) mix_double(v);
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace snell
