#include "snell/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "snell/common.hpp"
#include "snell/convergence.hpp"
#include "snell/procgen.hpp"
#include "snell/snell.hpp"

namespace snell {

using nlohmann::json;

namespace {

int thread_cap() {
    if (const char* env = std::getenv("SNELL_LAB_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Runs f(0..n-1); ladder members are independent, results land in
// preallocated slots, so the output does not depend on the schedule.
template <typename F>
void parallel_for_index(std::size_t n, bool sequential, F&& f) {
    const int cap = sequential ? 1 : std::min<int>(thread_cap(), static_cast<int>(n));
    if (cap <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(cap));
    for (int t = 0; t < cap; ++t) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

std::string fmt(double x) { return format_double(x); }
std::string fmt(int x) { return std::to_string(x); }

void assert_that(ExperimentReport& report, const std::string& name, bool pass,
                 const std::string& detail) {
    report.assertions.push_back({name, pass, detail});
}

// Sub-grid of a uniform n-step tree grid built from the tree's own time
// values, so grid points match tree times exactly.
TimeGrid subgrid_of_uniform(const TimeGrid& times, int size) {
    if (size < 1) throw std::invalid_argument("grid size must be >= 1");
    if (size == 1) return TimeGrid({0.0});
    const int steps = static_cast<int>(times.size()) - 1;
    if (steps % (size - 1) != 0)
        throw std::invalid_argument("grid size " + std::to_string(size) +
                                    " does not divide the tree grid");
    const int stride = steps / (size - 1);
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(size));
    for (int j = 0; j < size; ++j) pts.push_back(times[static_cast<std::size_t>(j * stride)]);
    return TimeGrid(std::move(pts));
}

// Every atom of `coarse` must be a union of atoms of `fine` at each level.
bool filtration_included(const CoupledSpace& space, const std::string& coarse,
                         const std::string& fine) {
    for (int k = 0; k <= space.depth(); ++k) {
        const FiltrationLevel& cl = space.filtration(coarse).levels[static_cast<std::size_t>(k)];
        const FiltrationLevel& fl = space.filtration(fine).levels[static_cast<std::size_t>(k)];
        for (const FiltrationAtom& atom : fl.atoms) {
            // All leaves of a fine atom must share one coarse atom.
            int coarse_atom = -2;
            for (int nid : atom.nodes) {
                const int ca = cl.atom_of_node[static_cast<std::size_t>(nid)];
                if (coarse_atom == -2) coarse_atom = ca;
                if (ca != coarse_atom) return false;
            }
        }
    }
    return true;
}

struct DiscLadder {
    CoupledSpace space;
    std::vector<std::string> names;  // discretized observable per ladder entry
    std::vector<TimeGrid> grids;
};

DiscLadder build_disc_ladder(int depth, double horizon, const std::vector<int>& sizes) {
    CoupledSpace space = gen_random_walk(depth, horizon);
    std::vector<std::string> names;
    std::vector<TimeGrid> grids;
    for (int s : sizes) {
        TimeGrid grid = subgrid_of_uniform(space.tree().times(), s);
        if (!grids.empty() && !grid.contains(grids.back(), kTimeTol))
            throw std::invalid_argument("discretization ladder grids must be nested");
        const std::string name = discretized_name("B", grid);
        space = discretize_process(space, "B", grid, name);
        names.push_back(name);
        grids.push_back(std::move(grid));
    }
    return {std::move(space), std::move(names), std::move(grids)};
}

std::vector<std::vector<int>> terminal_atoms(const CoupledSpace& space, const std::string& obs) {
    AtomPartition part = atom_partition(space, obs, space.depth());
    return part.atoms;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!(horizon > 0.0)) throw std::invalid_argument("config: horizon must be positive");
    if (bound_L < 0.0 || bound_L > horizon + kTimeTol)
        throw std::invalid_argument("config: L must lie in [0, horizon]");
    for (std::size_t i = 1; i < n_ladder.size(); ++i)
        if (n_ladder[i] <= n_ladder[i - 1])
            throw std::invalid_argument("config: n ladder must be strictly increasing");
}

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    if (experiment == "counterexample") {
        cfg.n_ladder = {4, 8, 16, 32};
        cfg.bound_L = 0.5;
        cfg.payoff = "capped-identity";
    } else if (experiment == "grid-refine") {
        cfg.n_ladder = {1, 2, 3, 4};
        cfg.walk_depth = 16;
        cfg.bound_L = 1.0;
        cfg.payoff = "arctan";
    } else if (experiment == "lemma-tn") {
        cfg.n_ladder = {2, 3, 5, 9};
        cfg.walk_depth = 8;
        cfg.bound_L = 0.75;
        cfg.payoff = "arctan";
    } else if (experiment == "discretize") {
        cfg.n_ladder = {2, 3, 5, 9};
        cfg.walk_depth = 8;
        cfg.bound_L = 1.0;
        cfg.payoff = "arctan";
    } else if (experiment == "crr") {
        cfg.n_ladder = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 50, 100, 200};
        cfg.bound_L = 1.0;
        cfg.payoff = "identity";
        cfg.s0 = 1.0;
        cfg.lambda = 0.1;
        cfg.sigma = 0.3;
        cfg.cap = 3.0;
    } else if (experiment == "aldous") {
        cfg.n_ladder = {4, 8};
        cfg.bound_L = 1.0;
        cfg.eps_list = {0.5};
        cfg.delta_list = {0.25, 0.125, 0.0625};
    } else if (experiment == "randomized") {
        cfg.bound_L = 1.0;
        cfg.payoff = "capped-identity";
    } else {
        throw std::invalid_argument("unknown experiment: " + experiment);
    }
    return cfg;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg = default_config(j.at("experiment").get<std::string>());
    if (j.contains("n_ladder")) cfg.n_ladder = j.at("n_ladder").get<std::vector<int>>();
    if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<double>();
    if (j.contains("L")) cfg.bound_L = j.at("L").get<double>();
    if (j.contains("payoff")) cfg.payoff = j.at("payoff").get<std::string>();
    if (j.contains("crr")) {
        const json& c = j.at("crr");
        if (c.contains("s0")) cfg.s0 = c.at("s0").get<double>();
        if (c.contains("lambda")) cfg.lambda = c.at("lambda").get<double>();
        if (c.contains("sigma")) cfg.sigma = c.at("sigma").get<double>();
        if (c.contains("cap")) cfg.cap = c.at("cap").get<double>();
    }
    if (j.contains("walk_depth")) cfg.walk_depth = j.at("walk_depth").get<int>();
    if (j.contains("eps")) cfg.eps_list = j.at("eps").get<std::vector<double>>();
    if (j.contains("delta")) cfg.delta_list = j.at("delta").get<std::vector<double>>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    if (j.contains("sequential")) cfg.sequential = j.at("sequential").get<bool>();
    cfg.validate();
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = cfg.experiment;
    j["n_ladder"] = cfg.n_ladder;
    j["horizon"] = cfg.horizon;
    j["L"] = cfg.bound_L;
    j["payoff"] = cfg.payoff;
    j["crr"] = {{"s0", cfg.s0}, {"lambda", cfg.lambda}, {"sigma", cfg.sigma}, {"cap", cfg.cap}};
    j["walk_depth"] = cfg.walk_depth;
    j["eps"] = cfg.eps_list;
    j["delta"] = cfg.delta_list;
    j["seed"] = cfg.seed;
    j["out"] = cfg.out_dir;
    j["sequential"] = cfg.sequential;
    return j;
}

bool ExperimentReport::passed() const {
    for (const Assertion& a : assertions)
        if (!a.pass) return false;
    return true;
}

std::string ExperimentReport::csv() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << (i ? "," : "") << columns[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    return out.str();
}

json ExperimentReport::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["config"] = config_to_json(config);
    j["seed"] = config.seed;
    j["version"] = version;
    j["columns"] = columns;
    j["rows"] = rows;
    json asserts = json::array();
    for (const Assertion& a : assertions)
        asserts.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
    j["assertions"] = std::move(asserts);
    j["passed"] = passed();
    j["wall_ms"] = wall_ms;
    return j;
}

void ExperimentReport::write_outputs() const {
    if (config.out_dir.empty()) return;
    std::filesystem::create_directories(config.out_dir);
    const std::filesystem::path dir(config.out_dir);
    {
        std::ofstream out(dir / (experiment + ".csv"));
        out << csv();
    }
    {
        std::ofstream out(dir / (experiment + ".json"));
        out << to_json().dump(2) << "\n";
    }
}

namespace {

ExperimentReport make_report(const ExperimentConfig& cfg, std::vector<std::string> columns) {
    ExperimentReport report;
    report.experiment = cfg.experiment;
    report.config = cfg;
    report.version = kVersion;
    report.columns = std::move(columns);
    return report;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

}  // namespace

ExperimentReport run_counterexample(const ExperimentConfig& cfg) {
    Timer timer;
    cfg.validate();
    ExperimentReport report = make_report(cfg, {"n", "gamma_n", "gamma"});
    const Payoff payoff = make_payoff(cfg.payoff);
    const double L = cfg.bound_L;

    const StepPath x = gen_counterexample(4).first;
    const CoupledSpace x_space = space_from_path(x, TimeGrid({0.0, 0.5, 1.0}), "X");
    const double gamma = snell_value(x_space, "X", payoff, L).value;

    std::vector<double> gamma_n(cfg.n_ladder.size());
    parallel_for_index(cfg.n_ladder.size(), cfg.sequential, [&](std::size_t i) {
        const int n = cfg.n_ladder[i];
        const auto [unused, xn] = gen_counterexample(n);
        (void)unused;
        const CoupledSpace xn_space =
            space_from_path(xn, TimeGrid({0.0, 0.5, 0.5 + 1.0 / n, 1.0}), "X");
        gamma_n[i] = snell_value(xn_space, "X", payoff, L).value;
    });

    bool all_zero = true;
    for (std::size_t i = 0; i < cfg.n_ladder.size(); ++i) {
        report.rows.push_back({fmt(cfg.n_ladder[i]), fmt(gamma_n[i]), fmt(gamma)});
        all_zero = all_zero && (gamma_n[i] == 0.0);
    }
    assert_that(report, "gamma_at_half_is_one", gamma == 1.0, "gamma(L) = " + fmt(gamma));
    assert_that(report, "gamma_n_at_half_is_zero", all_zero,
                "every ladder value must be exactly 0");
    report.wall_ms = timer.ms();
    return report;
}

ExperimentReport run_grid_refine(const ExperimentConfig& cfg) {
    Timer timer;
    cfg.validate();
    ExperimentReport report = make_report(cfg, {"level", "grid_size", "gamma_pi", "gamma"});
    const Payoff payoff = make_payoff(cfg.payoff);
    for (int level : cfg.n_ladder) {
        if (level < 0 || cfg.walk_depth % (1 << level) != 0)
            throw std::invalid_argument("grid-refine: dyadic level " + std::to_string(level) +
                                        " does not divide the walk depth");
    }
    const CoupledSpace space = gen_random_walk(cfg.walk_depth, cfg.horizon);
    const double gamma = snell_value(space, "B", payoff, cfg.bound_L).value;

    std::vector<double> values(cfg.n_ladder.size());
    std::vector<int> sizes(cfg.n_ladder.size());
    parallel_for_index(cfg.n_ladder.size(), cfg.sequential, [&](std::size_t i) {
        const int size = (1 << cfg.n_ladder[i]) + 1;
        sizes[i] = size;
        const TimeGrid pi = subgrid_of_uniform(space.tree().times(), size);
        if (!pi.index_of(cfg.bound_L, kTimeTol))
            throw std::invalid_argument("grid-refine: L must belong to every stopping grid");
        values[i] = gamma_pi(space, "B", payoff, pi, cfg.bound_L).value;
    });

    bool nondecreasing = true;
    for (std::size_t i = 0; i < cfg.n_ladder.size(); ++i) {
        report.rows.push_back({fmt(cfg.n_ladder[i]), fmt(sizes[i]), fmt(values[i]), fmt(gamma)});
        if (i > 0 && values[i] < values[i - 1] - 1e-10) nondecreasing = false;
    }
    assert_that(report, "gamma_pi_nondecreasing", nondecreasing,
                "restricted values must not decrease along nested grids");
    if (!sizes.empty() && sizes.back() == cfg.walk_depth + 1) {
        assert_that(report, "full_grid_equals_gamma", values.back() == gamma,
                    "finest grid value " + fmt(values.back()) + " vs gamma " + fmt(gamma));
    } else {
        assert_that(report, "final_value_below_gamma",
                    !values.empty() && values.back() <= gamma + 1e-10,
                    "gamma - finest = " + fmt(gamma - (values.empty() ? 0.0 : values.back())));
    }
    report.wall_ms = timer.ms();
    return report;
}

ExperimentReport run_lemma_tn(const ExperimentConfig& cfg) {
    Timer timer;
    cfg.validate();
    ExperimentReport report =
        make_report(cfg, {"grid_size", "prob_diff", "payoff_gap", "bc_gap"});
    const Payoff payoff = make_payoff(cfg.payoff);

    DiscLadder ladder = build_disc_ladder(cfg.walk_depth, cfg.horizon, cfg.n_ladder);
    const CoupledSpace& space = ladder.space;
    const ScenarioTree& tree = space.tree();

    const StoppingRule tau = *snell_value(space, "B", payoff, cfg.bound_L).rule;
    const std::vector<int> tau_idx = realized_indices(space, tau);

    const std::size_t m = cfg.n_ladder.size();
    std::vector<double> prob_diff(m), payoff_gap(m);
    std::vector<RandomizedStoppingRule> seq(m);
    parallel_for_index(m, cfg.sequential, [&](std::size_t i) {
        const std::string& target = ladder.names[i];
        const StoppingRule tau_n = lemma_tn(space, tau, target);
        const std::vector<int> tn_idx = realized_indices(space, tau_n);
        double pd = 0.0, pg = 0.0;
        for (int li = 0; li < tree.leaf_count(); ++li) {
            const std::size_t l = static_cast<std::size_t>(li);
            if (tn_idx[l] != tau_idx[l]) pd += tree.leaf_weight(li);
            const double g_n = payoff(tree.times()[static_cast<std::size_t>(tn_idx[l])],
                                      space.value_at(target, li, tn_idx[l]));
            const double g = payoff(tree.times()[static_cast<std::size_t>(tau_idx[l])],
                                    space.value_at("B", li, tau_idx[l]));
            pg += tree.leaf_weight(li) * std::abs(g_n - g);
        }
        prob_diff[i] = pd;
        payoff_gap[i] = pg;
        seq[i] = randomized_from_pure(space, tau_n);
    });

    const std::vector<std::pair<int, double>> bc =
        bc_gap(space, seq, randomized_from_pure(space, tau),
               default_bc_test_functions(cfg.horizon), terminal_atoms(space, "B"));

    bool pd_mono = true, pg_mono = true, bc_mono = true;
    for (std::size_t i = 0; i < m; ++i) {
        report.rows.push_back(
            {fmt(cfg.n_ladder[i]), fmt(prob_diff[i]), fmt(payoff_gap[i]), fmt(bc[i].second)});
        if (i > 0) {
            pd_mono = pd_mono && prob_diff[i] <= prob_diff[i - 1] + 1e-12;
            pg_mono = pg_mono && payoff_gap[i] <= payoff_gap[i - 1] + 1e-12;
            bc_mono = bc_mono && bc[i].second <= bc[i - 1].second + 1e-12;
        }
    }
    assert_that(report, "prob_diff_nonincreasing", pd_mono, "P[tau_n != tau] along the ladder");
    assert_that(report, "prob_diff_zero_at_finest", prob_diff.back() == 0.0,
                "finest value " + fmt(prob_diff.back()));
    assert_that(report, "payoff_gap_nonincreasing", pg_mono, "E|gap| along the ladder");
    assert_that(report, "payoff_gap_zero_at_finest", payoff_gap.back() == 0.0,
                "finest value " + fmt(payoff_gap.back()));
    assert_that(report, "bc_gap_nonincreasing", bc_mono, "Baxter-Chacon gap along the ladder");
    assert_that(report, "bc_gap_zero_at_finest", bc.back().second == 0.0,
                "finest value " + fmt(bc.back().second));
    report.wall_ms = timer.ms();
    return report;
}

ExperimentReport run_discretize(const ExperimentConfig& cfg) {
    Timer timer;
    cfg.validate();
    ExperimentReport report = make_report(cfg, {"grid_size", "gamma_n", "gamma", "gap"});
    const Payoff payoff = make_payoff(cfg.payoff);

    DiscLadder ladder = build_disc_ladder(cfg.walk_depth, cfg.horizon, cfg.n_ladder);
    const CoupledSpace& space = ladder.space;
    for (const TimeGrid& grid : ladder.grids) {
        if (!grid.index_of(cfg.bound_L, kTimeTol))
            throw std::invalid_argument("discretize: L must belong to every ladder grid");
    }
    const double gamma = snell_value(space, "B", payoff, cfg.bound_L).value;

    const std::size_t m = cfg.n_ladder.size();
    std::vector<double> gamma_n(m);
    std::vector<bool> included(m);
    parallel_for_index(m, cfg.sequential, [&](std::size_t i) {
        gamma_n[i] = snell_value(space, ladder.names[i], payoff, cfg.bound_L).value;
        included[i] = filtration_included(space, ladder.names[i], "B");
    });

    bool all_included = true;
    for (std::size_t i = 0; i < m; ++i) {
        report.rows.push_back(
            {fmt(cfg.n_ladder[i]), fmt(gamma_n[i]), fmt(gamma), fmt(gamma - gamma_n[i])});
        all_included = all_included && included[i];
    }
    const double norm = payoff.bounded() ? payoff.bound() : 1.0;
    assert_that(report, "filtrations_included", all_included,
                "every discretized filtration must be coarser than the source");
    assert_that(report, "final_gap_small", std::abs(gamma - gamma_n.back()) <= 1e-3 * norm,
                "final |gamma - gamma_n| = " + fmt(std::abs(gamma - gamma_n.back())));
    report.wall_ms = timer.ms();
    return report;
}

ExperimentReport run_crr(const ExperimentConfig& cfg) {
    Timer timer;
    cfg.validate();
    ExperimentReport report =
        make_report(cfg, {"payoff", "n", "gamma_n", "closed_form", "abs_gap"});
    const Payoff diagnostic = make_payoff("identity");
    const Payoff capped = make_payoff("capped:" + format_double(cfg.cap));

    const std::size_t m = cfg.n_ladder.size();
    std::vector<double> diag(m), closed(m), cap_values(m);
    parallel_for_index(m, cfg.sequential, [&](std::size_t i) {
        CrrParams p;
        p.s0 = cfg.s0;
        p.lambda = cfg.lambda;
        p.sigma = cfg.sigma;
        p.horizon = cfg.horizon;
        p.steps = cfg.n_ladder[i];
        diag[i] = crr_snell_value(p, diagnostic, cfg.bound_L).value;
        closed[i] = cfg.lambda >= 0.0
                        ? cfg.s0 * std::pow(1.0 + cfg.lambda * cfg.horizon / p.steps, p.steps)
                        : cfg.s0;
        cap_values[i] = crr_snell_value(p, capped, cfg.bound_L).value;
    });

    bool identity_ok = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double gap = std::abs(diag[i] - closed[i]);
        worst = std::max(worst, gap);
        identity_ok = identity_ok && gap <= 1e-12;
        report.rows.push_back(
            {"identity", fmt(cfg.n_ladder[i]), fmt(diag[i]), fmt(closed[i]), fmt(gap)});
    }
    for (std::size_t i = 0; i < m; ++i)
        report.rows.push_back({capped.name(), fmt(cfg.n_ladder[i]), fmt(cap_values[i]), "", ""});

    assert_that(report, "closed_form_identity", identity_ok,
                "max |dp - closed form| = " + fmt(worst));

    if (cfg.lambda > 0.0) {
        const double limit = cfg.s0 * std::exp(cfg.lambda * cfg.horizon);
        auto find = [&](int n) -> const double* {
            for (std::size_t i = 0; i < m; ++i)
                if (cfg.n_ladder[i] == n) return &diag[i];
            return nullptr;
        };
        const double* g100 = find(100);
        const double* g200 = find(200);
        if (g100 && g200) {
            const double gap100 = std::abs(*g100 - limit);
            const double gap200 = std::abs(*g200 - limit);
            assert_that(report, "limit_gap_small", gap200 < 3e-5,
                        "|gamma(200) - s0 e^{lambda T}| = " + fmt(gap200));
            const double ratio = gap200 / gap100;
            assert_that(report, "limit_gap_halves", ratio >= 0.4 && ratio <= 0.6,
                        "gap(200)/gap(100) = " + fmt(ratio));
        }
    } else if (cfg.lambda < 0.0) {
        bool flat = true;
        for (double v : diag) flat = flat && std::abs(v - cfg.s0) <= 1e-12;
        assert_that(report, "supermartingale_stops_at_zero", flat,
                    "every value must equal s0");
    }
    report.wall_ms = timer.ms();
    return report;
}

ExperimentReport run_aldous(const ExperimentConfig& cfg) {
    Timer timer;
    cfg.validate();
    ExperimentReport report = make_report(cfg, {"family", "n", "delta", "eps", "sup"});

    struct Row {
        std::string family;
        int n;
        double delta, eps, sup;
    };
    std::vector<Row> rows;

    // Scaled-walk family: eps = 3 increments, delta in one-step multiples.
    const std::vector<int> step_multiples = {4, 2, 1};
    std::vector<Row> walk_rows(cfg.n_ladder.size() * step_multiples.size());
    parallel_for_index(cfg.n_ladder.size(), cfg.sequential, [&](std::size_t i) {
        const int n = cfg.n_ladder[i];
        const CoupledSpace space = gen_random_walk(n, cfg.horizon);
        const double step = cfg.horizon / n;
        const double eps = 3.0 * walk_increment(n, cfg.horizon);
        for (std::size_t d = 0; d < step_multiples.size(); ++d) {
            const double delta = step_multiples[d] * step;
            walk_rows[i * step_multiples.size() + d] =
                {"walk", n, delta, eps, aldous_sup(space, "B", delta, eps, cfg.bound_L)};
        }
    });
    rows.insert(rows.end(), walk_rows.begin(), walk_rows.end());

    // Fixed-jump family: deterministic paths with a jump at 1/2 + 1/n.
    const std::vector<double> deltas =
        cfg.delta_list.empty() ? std::vector<double>{0.25, 0.125, 0.0625} : cfg.delta_list;
    const double eps_jump = cfg.eps_list.empty() ? 0.5 : cfg.eps_list.front();
    const double h = *std::min_element(deltas.begin(), deltas.end()) / 2.0;
    std::vector<Row> jump_rows(cfg.n_ladder.size() * deltas.size());
    parallel_for_index(cfg.n_ladder.size(), cfg.sequential, [&](std::size_t i) {
        const int n = std::max(3, cfg.n_ladder[i]);
        const double t_star = 0.5 + 1.0 / n;
        const StepPath xn = gen_counterexample(n).second;
        const CoupledSpace space =
            space_from_path(xn, TimeGrid({0.0, t_star - h, t_star, cfg.horizon}), "X");
        for (std::size_t d = 0; d < deltas.size(); ++d) {
            jump_rows[i * deltas.size() + d] =
                {"jump", n, deltas[d], eps_jump,
                 aldous_sup(space, "X", deltas[d], eps_jump, cfg.bound_L)};
        }
    });
    rows.insert(rows.end(), jump_rows.begin(), jump_rows.end());

    bool walk_zero_at_one_step = true, walk_monotone = true, jump_all_one = true;
    for (std::size_t i = 0; i < walk_rows.size(); ++i) {
        const Row& r = walk_rows[i];
        if (i % step_multiples.size() != 0) {
            const Row& prev = walk_rows[i - 1];
            walk_monotone = walk_monotone && r.sup <= prev.sup + 1e-12;
        }
        if (step_multiples[i % step_multiples.size()] == 1)
            walk_zero_at_one_step = walk_zero_at_one_step && (r.sup == 0.0);
    }
    for (const Row& r : jump_rows) jump_all_one = jump_all_one && (r.sup == 1.0);

    for (const Row& r : rows)
        report.rows.push_back({r.family, fmt(r.n), fmt(r.delta), fmt(r.eps), fmt(r.sup)});
    assert_that(report, "walk_sup_zero_at_one_step", walk_zero_at_one_step,
                "one-step windows cannot move the walk by 3 increments");
    assert_that(report, "walk_sup_nonincreasing_in_delta", walk_monotone,
                "sup must shrink as the window shrinks");
    assert_that(report, "jump_sup_equals_one", jump_all_one,
                "a fixed jump defeats the criterion at every ladder point");
    report.wall_ms = timer.ms();
    return report;
}

CoupledSpace random_fixture_space(std::uint64_t seed, int max_depth, int max_leaves,
                                  int max_cells) {
    for (int attempt = 0; attempt < 256; ++attempt) {
        std::uint64_t state = seed + 0x517cc1b727220a95ULL * static_cast<std::uint64_t>(attempt);
        std::mt19937_64 rng(splitmix64(state));
        std::uniform_int_distribution<int> depth_dist(2, std::max(2, max_depth));
        const int depth = depth_dist(rng);

        ScenarioTree::Builder builder;
        std::uniform_real_distribution<double> value_dist(0.0, 1.0);
        builder.add_root(0.0);
        std::vector<double> x{0.0};
        std::vector<int> frontier{0};
        bool too_big = false;
        for (int k = 0; k < depth && !too_big; ++k) {
            std::vector<int> next;
            for (int id : frontier) {
                const double branch_roll = value_dist(rng);
                const int n_children = branch_roll < 0.25 ? 1 : (branch_roll < 0.8 ? 2 : 3);
                std::vector<double> probs(static_cast<std::size_t>(n_children));
                double total = 0.0;
                for (double& p : probs) {
                    p = 0.2 + value_dist(rng);
                    total += p;
                }
                for (int c = 0; c < n_children; ++c) {
                    // Small increment alphabet so value prefixes may collide
                    // and atoms merge across branches.
                    const int step = static_cast<int>(value_dist(rng) * 3.0) - 1;
                    const double driver = static_cast<double>(step);
                    const int child =
                        builder.add_child(id, probs[static_cast<std::size_t>(c)] / total, driver);
                    x.push_back(x[static_cast<std::size_t>(id)] + 0.5 * step);
                    next.push_back(child);
                }
            }
            frontier = std::move(next);
            if (static_cast<int>(frontier.size()) > max_leaves) too_big = true;
        }
        if (too_big) continue;

        std::vector<double> points(static_cast<std::size_t>(depth) + 1);
        for (int k = 0; k <= depth; ++k)
            points[static_cast<std::size_t>(k)] = static_cast<double>(k) / depth;
        CoupledSpace space(std::move(builder).finalize(TimeGrid(std::move(points))),
                           {{"X", std::move(x)}});
        int cells = 0;
        for (int k = 0; k < space.depth(); ++k)
            cells += static_cast<int>(
                space.filtration("X").levels[static_cast<std::size_t>(k)].atoms.size());
        if (space.tree().leaf_count() <= max_leaves && cells <= max_cells) return space;
    }
    throw std::logic_error("random_fixture_space: no admissible tree found");
}

namespace {

// Flat evaluator for the randomized grid search: per-leaf atom indices and
// observable values by level, so one rule evaluation allocates nothing.
struct FlatSpace {
    int kl = 0;
    std::vector<double> leaf_weight;
    std::vector<double> times;
    std::vector<std::vector<int>> atom_at;     // [k][leaf] -> atom index
    std::vector<std::vector<double>> value_at;  // [k][leaf] -> observable value
    std::vector<int> cells_per_level;           // atoms per level k < kl

    FlatSpace(const CoupledSpace& space, const std::string& obs, double L) {
        const ScenarioTree& tree = space.tree();
        const FiltrationIndex& fi = space.filtration(obs);
        kl = horizon_index(tree, L);
        times = tree.times().points();
        leaf_weight.resize(static_cast<std::size_t>(tree.leaf_count()));
        for (int li = 0; li < tree.leaf_count(); ++li)
            leaf_weight[static_cast<std::size_t>(li)] = tree.leaf_weight(li);
        atom_at.assign(static_cast<std::size_t>(kl) + 1,
                       std::vector<int>(static_cast<std::size_t>(tree.leaf_count())));
        value_at.assign(static_cast<std::size_t>(kl) + 1,
                        std::vector<double>(static_cast<std::size_t>(tree.leaf_count())));
        for (int li = 0; li < tree.leaf_count(); ++li) {
            const std::vector<int> chain = tree.path_nodes(li);
            for (int k = 0; k <= kl; ++k) {
                const int atom = fi.levels[static_cast<std::size_t>(k)]
                                     .atom_of_node[static_cast<std::size_t>(chain[static_cast<std::size_t>(k)])];
                atom_at[static_cast<std::size_t>(k)][static_cast<std::size_t>(li)] = atom;
                value_at[static_cast<std::size_t>(k)][static_cast<std::size_t>(li)] =
                    fi.levels[static_cast<std::size_t>(k)].atoms[static_cast<std::size_t>(atom)].value;
            }
        }
        for (int k = 0; k < kl; ++k)
            cells_per_level.push_back(
                static_cast<int>(fi.levels[static_cast<std::size_t>(k)].atoms.size()));
    }

    int total_cells() const {
        int s = 0;
        for (int c : cells_per_level) s += c;
        return s;
    }

    // prob[k][atom] given as one flat array in level-major order.
    double value(const Payoff& payoff, const std::vector<double>& flat_prob) const {
        double total = 0.0;
        const std::size_t n_leaves = leaf_weight.size();
        for (std::size_t li = 0; li < n_leaves; ++li) {
            double alive = 1.0, acc = 0.0;
            std::size_t base = 0;
            for (int k = 0; k < kl; ++k) {
                const double p =
                    flat_prob[base + static_cast<std::size_t>(
                                         atom_at[static_cast<std::size_t>(k)][li])];
                if (p != 0.0) {
                    acc += alive * p *
                           payoff(times[static_cast<std::size_t>(k)],
                                  value_at[static_cast<std::size_t>(k)][li]);
                    alive *= (1.0 - p);
                }
                base += static_cast<std::size_t>(cells_per_level[static_cast<std::size_t>(k)]);
            }
            acc += alive * payoff(times[static_cast<std::size_t>(kl)],
                                  value_at[static_cast<std::size_t>(kl)][li]);
            total += leaf_weight[li] * acc;
        }
        return total;
    }
};

}  // namespace

ExperimentReport run_randomized(const ExperimentConfig& cfg) {
    Timer timer;
    cfg.validate();
    ExperimentReport report = make_report(
        cfg, {"section", "label", "leaves", "cells", "gamma", "max_randomized", "excess",
              "pure_gap", "bc_gap"});
    const Payoff payoff = make_payoff(cfg.payoff);

    struct Fixture {
        std::string label;
        CoupledSpace space;
        std::string obs;
    };
    std::vector<Fixture> fixtures;
    fixtures.push_back({"walk2", gen_random_walk(2, cfg.horizon), "B"});
    fixtures.push_back({"walk3", gen_random_walk(3, cfg.horizon), "B"});
    {
        CrrParams p;
        p.s0 = 1.0;
        p.lambda = 0.1;
        p.sigma = 0.3;
        p.horizon = cfg.horizon;
        p.steps = 3;
        fixtures.push_back({"crr3", gen_crr(p), "S"});
    }
    std::uint64_t state = cfg.seed;
    for (int i = 0; i < 5; ++i) {
        const std::uint64_t sub_seed = splitmix64(state);
        fixtures.push_back(
            {"random" + std::to_string(i), random_fixture_space(sub_seed, 3, 12, 8), "X"});
    }
    for (const Fixture& fx : fixtures) {
        if (fx.space.depth() > 4)
            throw std::invalid_argument("randomized: fixture depth too large for grid search");
    }

    const std::vector<double> grid_levels = {0.0, 0.25, 0.5, 0.75, 1.0};
    struct Result {
        double gamma, max_rand, max_pure;
        int leaves, cells;
    };
    std::vector<Result> results(fixtures.size());
    parallel_for_index(fixtures.size(), cfg.sequential, [&](std::size_t i) {
        const Fixture& fx = fixtures[i];
        const double L = std::min(cfg.bound_L, fx.space.tree().times().back());
        const double gamma = snell_value(fx.space, fx.obs, payoff, L).value;
        const FlatSpace flat(fx.space, fx.obs, L);
        const int cells = flat.total_cells();
        if (cells > 9)
            throw std::invalid_argument("randomized: too many decision cells for grid search");
        std::vector<double> prob(static_cast<std::size_t>(cells), 0.0);
        std::vector<int> odo(static_cast<std::size_t>(cells), 0);
        double max_rand = -1e300, max_pure = -1e300;
        while (true) {
            bool pure = true;
            for (int c = 0; c < cells; ++c) {
                const double p = grid_levels[static_cast<std::size_t>(odo[static_cast<std::size_t>(c)])];
                prob[static_cast<std::size_t>(c)] = p;
                pure = pure && (p == 0.0 || p == 1.0);
            }
            const double v = flat.value(payoff, prob);
            max_rand = std::max(max_rand, v);
            if (pure) max_pure = std::max(max_pure, v);
            int c = 0;
            while (c < cells && ++odo[static_cast<std::size_t>(c)] ==
                                    static_cast<int>(grid_levels.size())) {
                odo[static_cast<std::size_t>(c)] = 0;
                ++c;
            }
            if (c == cells) break;
        }
        results[i] = {gamma, max_rand, max_pure, fx.space.tree().leaf_count(), cells};
    });

    bool no_excess = true, pure_attains = true;
    for (std::size_t i = 0; i < fixtures.size(); ++i) {
        const Result& r = results[i];
        const double excess = r.max_rand - r.gamma;
        const double pure_gap = std::abs(r.max_pure - r.gamma);
        no_excess = no_excess && excess <= 1e-10;
        pure_attains = pure_attains && pure_gap <= 1e-10;
        report.rows.push_back({"grid", fixtures[i].label, fmt(r.leaves), fmt(r.cells),
                               fmt(r.gamma), fmt(r.max_rand), fmt(excess), fmt(pure_gap), ""});
    }

    // Baxter-Chacon gaps of a transported rule sequence on a small ladder.
    {
        ExperimentConfig sub = cfg;
        sub.walk_depth = 4;
        sub.n_ladder = {2, 3, 5};
        DiscLadder ladder = build_disc_ladder(sub.walk_depth, sub.horizon, sub.n_ladder);
        const StoppingRule tau =
            *snell_value(ladder.space, "B", payoff, sub.bound_L).rule;
        std::vector<RandomizedStoppingRule> seq;
        for (const std::string& name : ladder.names)
            seq.push_back(randomized_from_pure(ladder.space, lemma_tn(ladder.space, tau, name)));
        const auto bc = bc_gap(ladder.space, seq, randomized_from_pure(ladder.space, tau),
                               default_bc_test_functions(sub.horizon),
                               terminal_atoms(ladder.space, "B"));
        for (std::size_t i = 0; i < bc.size(); ++i)
            report.rows.push_back({"bc", "grid" + std::to_string(sub.n_ladder[i]), "", "", "", "",
                                   "", "", fmt(bc[i].second)});
        assert_that(report, "bc_gap_zero_at_finest", bc.back().second == 0.0,
                    "finest value " + fmt(bc.back().second));
    }

    assert_that(report, "randomized_never_beats_pure", no_excess,
                "grid-search maximum must not exceed the optimal pure value");
    assert_that(report, "pure_corner_attains", pure_attains,
                "a 0/1 corner must attain the optimal value");
    report.wall_ms = timer.ms();
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    ExperimentReport report;
    if (cfg.experiment == "counterexample") report = run_counterexample(cfg);
    else if (cfg.experiment == "grid-refine") report = run_grid_refine(cfg);
    else if (cfg.experiment == "lemma-tn") report = run_lemma_tn(cfg);
    else if (cfg.experiment == "discretize") report = run_discretize(cfg);
    else if (cfg.experiment == "crr") report = run_crr(cfg);
    else if (cfg.experiment == "aldous") report = run_aldous(cfg);
    else if (cfg.experiment == "randomized") report = run_randomized(cfg);
    else throw std::invalid_argument("unknown experiment: " + cfg.experiment);
    report.write_outputs();
    return report;
}

std::vector<ConvergenceSweepRow> run_convergence_sweep(const ConvergenceSweepConfig& cfg) {
    DiscLadder ladder = build_disc_ladder(cfg.walk_depth, 1.0, cfg.grid_sizes);
    const CoupledSpace& space = ladder.space;
    const int a_time = cfg.a_time_index < 0 ? std::min(1, space.depth()) : cfg.a_time_index;
    const AtomPartition part = atom_partition(space, "B", a_time);
    const std::size_t a_atom =
        cfg.a_atom < 0 ? 0 : static_cast<std::size_t>(cfg.a_atom) % part.atoms.size();
    const std::vector<int>& A = part.atoms.at(a_atom);

    std::vector<ConvergenceSweepRow> rows;
    for (double eps : cfg.eps_list) {
        for (std::size_t i = 0; i < ladder.names.size(); ++i) {
            const int n = cfg.grid_sizes[i];
            rows.push_back({"paths-in-probability", n, eps,
                            paths_in_prob_gap(space, "B", ladder.names[i], eps)});
            rows.push_back({"sigma-field", n, eps,
                            sigma_field_gap(space, A, ladder.names[i], space.depth(), eps)});
            rows.push_back({"filtration-weak", n, eps,
                            filtration_weak_gap(space, A, ladder.names[i], "B", eps)});
        }
    }
    {
        const Payoff payoff = make_payoff(cfg.payoff);
        const StoppingRule tau = *snell_value(space, "B", payoff, 1.0).rule;
        std::vector<RandomizedStoppingRule> seq;
        for (const std::string& name : ladder.names)
            seq.push_back(randomized_from_pure(space, lemma_tn(space, tau, name)));
        const auto bc = bc_gap(space, seq, randomized_from_pure(space, tau),
                               default_bc_test_functions(1.0), terminal_atoms(space, "B"));
        for (std::size_t i = 0; i < bc.size(); ++i)
            rows.push_back({"baxter-chacon", cfg.grid_sizes[i], 0.0, bc[i].second});
    }
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream out(std::filesystem::path(cfg.out_dir) / "converge.csv");
        out << convergence_sweep_csv(rows);
    }
    return rows;
}

std::string convergence_sweep_csv(const std::vector<ConvergenceSweepRow>& rows) {
    std::ostringstream out;
    out << "mode,n,eps,gap\n";
    for (const ConvergenceSweepRow& r : rows)
        out << r.mode << "," << r.n << "," << format_double(r.eps) << "," << format_double(r.gap)
            << "\n";
    return out.str();
}

}  // namespace snell
