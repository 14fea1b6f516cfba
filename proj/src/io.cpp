#include "snell/io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "snell/common.hpp"

namespace snell {

using nlohmann::json;

json space_to_json(const CoupledSpace& space) {
    const ScenarioTree& tree = space.tree();
    json j;
    j["times"] = tree.times().points();
    json nodes = json::array();
    const std::vector<std::string> names = space.observable_names();
    for (int id = 0; id < tree.node_count(); ++id) {
        const TreeNode& n = tree.node(id);
        json obs;
        obs["driver"] = n.value;
        for (const std::string& name : names)
            obs[name] = space.observable(name)[static_cast<std::size_t>(id)];
        nodes.push_back({{"id", id},
                         {"parent", n.parent},
                         {"p", n.branch_prob},
                         {"obs", std::move(obs)}});
    }
    j["nodes"] = std::move(nodes);
    return j;
}

CoupledSpace space_from_json(const json& j) {
    const std::vector<double> times = j.at("times").get<std::vector<double>>();
    const json& nodes = j.at("nodes");
    if (!nodes.is_array() || nodes.empty())
        throw std::invalid_argument("space_from_json: nodes array required");

    // Entries may appear in any order; rebuild in id order and remap ids to
    // insertion order (the builder requires parents before children).
    std::vector<const json*> by_id(nodes.size(), nullptr);
    for (const json& n : nodes) {
        const int id = n.at("id").get<int>();
        if (id < 0 || id >= static_cast<int>(nodes.size()) || by_id[static_cast<std::size_t>(id)])
            throw std::invalid_argument("space_from_json: node ids must be 0..n-1 and unique");
        by_id[static_cast<std::size_t>(id)] = &n;
    }

    ScenarioTree::Builder builder;
    std::map<std::string, std::vector<double>> observables;
    for (std::size_t id = 0; id < by_id.size(); ++id) {
        const json& n = *by_id[id];
        const int parent = n.at("parent").get<int>();
        const json& obs = n.at("obs");
        const double driver = obs.value("driver", 0.0);
        if (parent < 0) {
            if (id != 0) throw std::invalid_argument("space_from_json: root must have id 0");
            builder.add_root(driver);
        } else {
            if (parent >= static_cast<int>(id))
                throw std::invalid_argument("space_from_json: parent ids must precede children");
            builder.add_child(parent, n.at("p").get<double>(), driver);
        }
        for (auto it = obs.begin(); it != obs.end(); ++it) {
            if (it.key() == "driver") continue;
            auto& vec = observables[it.key()];
            if (vec.size() != id)
                throw std::invalid_argument("space_from_json: observable '" + it.key() +
                                            "' missing on some node");
            vec.push_back(it.value().get<double>());
        }
    }
    for (auto& [name, vec] : observables) {
        if (vec.size() != by_id.size())
            throw std::invalid_argument("space_from_json: observable '" + name +
                                        "' missing on some node");
    }
    return CoupledSpace(std::move(builder).finalize(TimeGrid(times)), std::move(observables));
}

CoupledSpace load_space(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open tree file: " + path);
    json j;
    in >> j;
    return space_from_json(j);
}

void save_space(const CoupledSpace& space, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write tree file: " + path);
    out << space_to_json(space).dump(2) << "\n";
}

json rule_to_json(const StoppingRule& rule) {
    json j;
    j["observable"] = rule.observable;
    j["L"] = rule.bound;
    json decisions = json::array();
    for (std::size_t k = 0; k < rule.decisions.size(); ++k) {
        for (std::size_t a = 0; a < rule.decisions[k].size(); ++a) {
            decisions.push_back({{"k", k},
                                 {"atom", a},
                                 {"action", rule.decisions[k][a] ? "stop" : "continue"}});
        }
    }
    j["decisions"] = std::move(decisions);
    return j;
}

StoppingRule rule_from_json(const json& j) {
    StoppingRule rule;
    rule.observable = j.at("observable").get<std::string>();
    rule.bound = j.at("L").get<double>();
    for (const json& d : j.at("decisions")) {
        const std::size_t k = d.at("k").get<std::size_t>();
        const std::size_t a = d.at("atom").get<std::size_t>();
        const std::string action = d.at("action").get<std::string>();
        if (action != "stop" && action != "continue")
            throw std::invalid_argument("rule_from_json: action must be stop or continue");
        if (rule.decisions.size() <= k) rule.decisions.resize(k + 1);
        if (rule.decisions[k].size() <= a) rule.decisions[k].resize(a + 1, 0);
        rule.decisions[k][a] = (action == "stop") ? 1 : 0;
    }
    return rule;
}

json rule_to_json(const RandomizedStoppingRule& rule) {
    json j;
    j["observable"] = rule.observable;
    j["L"] = rule.bound;
    json decisions = json::array();
    for (std::size_t k = 0; k < rule.stop_prob.size(); ++k) {
        for (std::size_t a = 0; a < rule.stop_prob[k].size(); ++a)
            decisions.push_back({{"k", k}, {"atom", a}, {"p", rule.stop_prob[k][a]}});
    }
    j["decisions"] = std::move(decisions);
    return j;
}

RandomizedStoppingRule randomized_rule_from_json(const json& j) {
    RandomizedStoppingRule rule;
    rule.observable = j.at("observable").get<std::string>();
    rule.bound = j.at("L").get<double>();
    for (const json& d : j.at("decisions")) {
        const std::size_t k = d.at("k").get<std::size_t>();
        const std::size_t a = d.at("atom").get<std::size_t>();
        const double p = d.at("p").get<double>();
        if (rule.stop_prob.size() <= k) rule.stop_prob.resize(k + 1);
        if (rule.stop_prob[k].size() <= a) rule.stop_prob[k].resize(a + 1, 0.0);
        rule.stop_prob[k][a] = p;
    }
    return rule;
}

bool is_randomized_rule_json(const json& j) {
    const json& decisions = j.at("decisions");
    return !decisions.empty() && decisions.front().contains("p");
}

StepPath path_from_csv(std::istream& in, double horizon) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("path csv: empty file");
    std::vector<double> times, values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string t_str, v_str;
        if (!std::getline(row, t_str, ',') || !std::getline(row, v_str))
            throw std::invalid_argument("path csv: malformed row: " + line);
        times.push_back(std::stod(t_str));
        values.push_back(std::stod(v_str));
    }
    if (times.empty()) throw std::invalid_argument("path csv: no rows");
    if (horizon <= 0.0) horizon = times.back() > 0.0 ? times.back() : 1.0;
    return StepPath(std::move(times), std::move(values), horizon);
}

StepPath load_path(const std::string& path, double horizon) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open path file: " + path);
    return path_from_csv(in, horizon);
}

void path_to_csv(const StepPath& path, std::ostream& out) {
    out << "t,value\n";
    for (std::size_t i = 0; i < path.jump_times().size(); ++i)
        out << format_double(path.jump_times()[i]) << "," << format_double(path.values()[i])
            << "\n";
}

json report_to_json(const ValueReport& report) {
    json j;
    j["value"] = report.value;
    j["observable"] = report.observable;
    j["payoff"] = report.payoff;
    j["L"] = report.bound_L;
    j["tree_id"] = report.tree_id;
    j["unbounded_payoff"] = report.unbounded_payoff;
    j["wall_ms"] = report.wall_ms;
    if (report.restriction) j["restriction_grid"] = report.restriction->points();
    if (report.rule) j["rule"] = rule_to_json(*report.rule);
    return j;
}

}  // namespace snell
