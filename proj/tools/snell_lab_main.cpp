#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "snell/convergence.hpp"
#include "snell/experiments.hpp"
#include "snell/io.hpp"
#include "snell/snell.hpp"

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    in >> j;
    return j;
}

int cmd_experiment(const std::string& config_path, const std::string& name, std::uint64_t seed,
                   bool seed_set, const std::string& out_dir, bool sequential) {
    snell::ExperimentConfig cfg;
    if (!config_path.empty()) {
        cfg = snell::config_from_json(read_json_file(config_path));
    } else if (!name.empty()) {
        cfg = snell::default_config(name);
    } else {
        std::cerr << "experiment: either --config or --name is required\n";
        return 2;
    }
    if (seed_set) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (sequential) cfg.sequential = true;

    const snell::ExperimentReport report = snell::run_experiment(cfg);
    std::cout << report.csv();
    if (!report.passed()) {
        std::cerr << "FAILED assertions:\n";
        for (const snell::Assertion& a : report.assertions)
            if (!a.pass) std::cerr << "  " << a.name << ": " << a.detail << "\n";
        return 1;
    }
    for (const snell::Assertion& a : report.assertions)
        std::cerr << "[pass] " << a.name << " (" << a.detail << ")\n";
    return 0;
}

int cmd_value(const std::string& tree_path, const std::string& observable,
              const std::string& payoff_name, double L, const std::vector<double>& pi,
              const std::string& rule_path) {
    const snell::CoupledSpace space = snell::load_space(tree_path);
    const snell::Payoff payoff = snell::make_payoff(payoff_name);

    if (!rule_path.empty()) {
        const json rj = read_json_file(rule_path);
        json out;
        if (snell::is_randomized_rule_json(rj)) {
            const snell::RandomizedStoppingRule rule = snell::randomized_rule_from_json(rj);
            out["value"] = snell::randomized_value(space, observable, payoff, rule);
            out["rule_kind"] = "randomized";
        } else {
            const snell::StoppingRule rule = snell::rule_from_json(rj);
            out["value"] = snell::stopped_value(space, observable, payoff, rule);
            out["rule_kind"] = "pure";
        }
        out["observable"] = observable;
        out["payoff"] = payoff_name;
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    snell::ValueReport report;
    if (!pi.empty()) {
        report = snell::gamma_pi(space, observable, payoff, snell::TimeGrid(pi), L);
    } else {
        report = snell::snell_value(space, observable, payoff, L);
    }
    std::cout << snell::report_to_json(report).dump(2) << "\n";
    return 0;
}

int cmd_converge(const std::string& config_path, const std::string& out_dir) {
    snell::ConvergenceSweepConfig cfg;
    if (!config_path.empty()) {
        const json j = read_json_file(config_path);
        if (j.contains("walk_depth")) cfg.walk_depth = j.at("walk_depth").get<int>();
        if (j.contains("grid_sizes")) cfg.grid_sizes = j.at("grid_sizes").get<std::vector<int>>();
        if (j.contains("eps")) cfg.eps_list = j.at("eps").get<std::vector<double>>();
        if (j.contains("A_time_index")) cfg.a_time_index = j.at("A_time_index").get<int>();
        if (j.contains("A_atom")) cfg.a_atom = j.at("A_atom").get<int>();
        if (j.contains("payoff")) cfg.payoff = j.at("payoff").get<std::string>();
        if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    std::cout << snell::convergence_sweep_csv(snell::run_convergence_sweep(cfg));
    return 0;
}

int cmd_distance(const std::string& a_path, const std::string& b_path, double horizon) {
    snell::StepPath a = snell::load_path(a_path, horizon);
    snell::StepPath b = snell::load_path(b_path, horizon);
    if (horizon <= 0.0) {
        // No explicit horizon: use the larger of the two defaults.
        const double h = std::max(a.horizon(), b.horizon());
        a = snell::StepPath(a.jump_times(), a.values(), h);
        b = snell::StepPath(b.jump_times(), b.values(), h);
    }
    json out;
    out["uniform"] = snell::uniform_distance(a, b);
    out["skorokhod"] = snell::skorokhod_distance(a, b);
    out["horizon"] = a.horizon();
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"snell-lab: optimal stopping values on finite filtered scenario spaces"};
    app.require_subcommand(1);

    std::string config_path, name, out_dir;
    std::uint64_t seed = 0;
    bool sequential = false;
    CLI::App* experiment = app.add_subcommand("experiment", "run a ladder experiment");
    experiment->add_option("--config", config_path, "JSON config file");
    experiment->add_option("--name", name,
                           "experiment name with default config (counterexample, grid-refine, "
                           "lemma-tn, discretize, crr, aldous, randomized)");
    CLI::Option* seed_opt = experiment->add_option("--seed", seed, "64-bit seed");
    experiment->add_option("--out", out_dir, "output directory for CSV/JSON reports");
    experiment->add_flag("--sequential", sequential,
                         "run ladder members in order on one thread");

    std::string tree_path, observable = "X", payoff_name = "capped-identity", rule_path;
    double L = 1.0, horizon = 0.0;
    std::vector<double> pi;
    CLI::App* value = app.add_subcommand("value", "optimal or supplied-rule value on a tree");
    value->add_option("--tree", tree_path, "tree JSON file")->required();
    value->add_option("--observable", observable, "observable name");
    value->add_option("--payoff", payoff_name, "payoff name");
    value->add_option("--L", L, "stopping-time bound");
    value->add_option("--pi", pi, "restrict stopping to this grid (comma-separated)")
        ->delimiter(',');
    value->add_option("--rule", rule_path, "evaluate a supplied rule JSON instead of optimizing");

    std::string conv_config, conv_out;
    CLI::App* converge = app.add_subcommand("converge", "emit convergence-gap CSV");
    converge->add_option("--config", conv_config, "JSON config file");
    converge->add_option("--out", conv_out, "output directory");

    std::string path_a, path_b;
    CLI::App* distance = app.add_subcommand("distance", "distances between two path CSV files");
    distance->add_option("--a", path_a, "first path CSV")->required();
    distance->add_option("--b", path_b, "second path CSV")->required();
    distance->add_option("--horizon", horizon, "common horizon (default: max last jump time)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (experiment->parsed())
            return cmd_experiment(config_path, name, seed, seed_opt->count() > 0, out_dir,
                                  sequential);
        if (value->parsed()) return cmd_value(tree_path, observable, payoff_name, L, pi, rule_path);
        if (converge->parsed()) return cmd_converge(conv_config, conv_out);
        if (distance->parsed()) return cmd_distance(path_a, path_b, horizon);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
