#include "clrmr/scenario.hpp"

#include "clrmr/errors.hpp"
#include "clrmr/oracle_regret.hpp"

#include <json.hpp>

#include <array>
#include <fstream>
#include <sstream>

namespace clrmr {

using nlohmann::json;

const char* to_string(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::Clrmr: return "clrmr";
    case PolicyKind::ClrmrLn: return "clrmr-ln";
    case PolicyKind::Rca: return "rca";
    }
    return "?";
}

PolicyKind parse_policy(const std::string& name) {
    if (name == "clrmr") return PolicyKind::Clrmr;
    if (name == "clrmr-ln") return PolicyKind::ClrmrLn;
    if (name == "rca") return PolicyKind::Rca;
    throw ValidationError("unknown policy '" + name + "' (expected clrmr, clrmr-ln or rca)");
}

void validate_scenario(const Scenario& s) {
    if (!s.actions) throw ValidationError("scenario has no action set");
    if (s.chains.size() != s.actions->num_chains()) {
        throw ValidationError("scenario has " + std::to_string(s.chains.size()) +
                              " chains but the action set has N = " +
                              std::to_string(s.actions->num_chains()));
    }
    for (std::size_t i = 0; i < s.chains.size(); ++i) {
        const auto r = validate_chain(s.chains[i]);
        if (!r.ok()) throw ValidationError("chains[" + std::to_string(i) + "]: " + r.message());
    }
    if (s.horizon < s.chains.size()) {
        throw ValidationError("horizon " + std::to_string(s.horizon) +
                              " is shorter than the number of chains");
    }
    if (s.seeds.empty()) throw ValidationError("scenario needs at least one seed");
    if (s.sense == Sense::Minimize && s.reward_floor < 0.0 &&
        std::holds_alternative<PathGraph>(s.actions->variant())) {
        throw ValidationError("reward_floor must be >= 0 for shortest-path scenarios");
    }
}

std::size_t scenario_max_support(const Scenario& s) {
    return s.actions->structure_stats(s.enumeration_cap).max_support;
}

double scenario_threshold(const Scenario& s) {
    std::vector<ChainAnalysis> analyses;
    analyses.reserve(s.chains.size());
    for (const auto& c : s.chains) analyses.push_back(analyze_chain(c));
    return l_threshold(s.chains, analyses, scenario_max_support(s));
}

namespace {

constexpr std::array<std::array<double, 2>, 19> kLinkPairs{{
    {0.2, 0.8}, {0.3, 0.9}, {0.2, 0.7}, {0.7, 0.1}, {0.3, 0.9}, {0.2, 0.7}, {0.2, 0.8},
    {0.3, 0.8}, {0.1, 0.9}, {0.9, 0.1}, {0.3, 0.8}, {0.2, 0.7}, {0.8, 0.1}, {0.4, 0.8},
    {0.1, 0.8}, {0.8, 0.1}, {0.2, 0.7}, {0.9, 0.1}, {0.3, 0.8},
}};

// Rows are users, columns channels; entries (p01, p10).
constexpr std::array<std::array<std::array<double, 2>, 9>, 5> kChannelPairs{{
    {{{0.5, 0.6}, {0.2, 0.7}, {0.2, 0.9}, {0.8, 0.1}, {0.2, 0.7}, {0.3, 0.7}, {0.2, 0.9},
      {0.2, 0.7}, {0.1, 0.9}}},
    {{{0.3, 0.8}, {0.1, 0.9}, {0.2, 0.8}, {0.3, 0.7}, {0.3, 0.6}, {0.2, 0.8}, {0.4, 0.7},
      {0.2, 0.8}, {0.9, 0.2}}},
    {{{0.8, 0.1}, {0.2, 0.7}, {0.3, 0.7}, {0.2, 0.8}, {0.5, 0.6}, {0.2, 0.7}, {0.2, 0.7},
      {0.2, 0.8}, {0.1, 0.9}}},
    {{{0.3, 0.9}, {0.2, 0.8}, {0.2, 0.9}, {0.4, 0.6}, {0.9, 0.2}, {0.2, 0.9}, {0.2, 0.9},
      {0.2, 0.9}, {0.2, 0.9}}},
    {{{0.5, 0.6}, {0.2, 0.7}, {0.3, 0.9}, {0.2, 0.7}, {0.5, 0.5}, {0.2, 0.7}, {0.8, 0.1},
      {0.3, 0.9}, {0.3, 0.9}}},
}};

} // namespace

std::vector<ChainSpec> shortest_path_chains() {
    std::vector<ChainSpec> out;
    for (std::size_t k = 0; k < kLinkPairs.size(); ++k) {
        // state 0 = good link (delay 0.1), state 1 = bad link (delay 1.0)
        out.push_back(two_state_chain(kLinkPairs[k][0], kLinkPairs[k][1], 0.1, 1.0,
                                      "e." + std::to_string(k + 1)));
    }
    return out;
}

// 8 nodes, source 0, sink 7: a spine 0-1-...-7 plus skip edges, all forward.
// The spine is the longest simple path, so H = 7.
PathGraph shortest_path_standin_graph() {
    PathGraph g;
    g.num_nodes = 8;
    g.source = 0;
    g.sink = 7;
    g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7},
               {0, 2}, {0, 3}, {1, 3}, {1, 4}, {2, 4}, {2, 5}, {3, 5},
               {3, 6}, {4, 6}, {4, 7}, {5, 7}, {1, 5}};
    return g;
}

std::vector<ChainSpec> matching_chains() {
    std::vector<ChainSpec> out;
    for (std::size_t u = 0; u < kChannelPairs.size(); ++u) {
        for (std::size_t c = 0; c < kChannelPairs[u].size(); ++c) {
            // state 0 = channel available (reward 1), state 1 = occupied (reward 0)
            out.push_back(two_state_chain(kChannelPairs[u][c][0], kChannelPairs[u][c][1], 1.0,
                                          0.0,
                                          "u." + std::to_string(u + 1) + "ch." +
                                              std::to_string(c + 1)));
        }
    }
    return out;
}

std::vector<std::string> preset_names() { return {"shortest-path-19", "matching-5x9"}; }

std::optional<Scenario> preset(const std::string& name) {
    Scenario s;
    s.name = name;
    s.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    s.exploration_source = "preset";
    if (name == "shortest-path-19") {
        s.chains = shortest_path_chains();
        s.actions = std::make_shared<const ActionSet>(ActionSet::paths(shortest_path_standin_graph()));
        s.sense = Sense::Minimize;
        s.exploration = Exploration::constant(1512.0);
        return s;
    }
    if (name == "matching-5x9") {
        s.chains = matching_chains();
        s.actions = std::make_shared<const ActionSet>(ActionSet::matching(5, 9));
        s.sense = Sense::Maximize;
        s.exploration = Exploration::constant(1135.0);
        return s;
    }
    return std::nullopt;
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ValidationError(field + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) fail(path + "." + key, "missing");
    return obj.at(key);
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

double probability(const json& v, const std::string& path) {
    const double p = number(v, path);
    if (!(p >= 0.0 && p <= 1.0)) fail(path, "expected a probability in [0, 1]");
    return p;
}

std::uint64_t count(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        out.push_back(number(v[k], path + "[" + std::to_string(k) + "]"));
    }
    return out;
}

ChainSpec parse_chain(const json& c, const std::string& path) {
    if (!c.is_object()) fail(path, "expected an object");
    ChainSpec spec;
    const bool two_state = c.contains("p01") || c.contains("p10");
    if (two_state == c.contains("transition")) {
        fail(path, "give either p01/p10 or a transition matrix");
    }
    const auto rewards = numbers(require(c, "rewards", path), path + ".rewards");
    if (two_state) {
        if (rewards.size() != 2) fail(path + ".rewards", "a two-state chain needs 2 rewards");
        spec = two_state_chain(probability(require(c, "p01", path), path + ".p01"),
                               probability(require(c, "p10", path), path + ".p10"), rewards[0],
                               rewards[1]);
    } else {
        const json& t = c.at("transition");
        if (!t.is_array() || t.empty()) fail(path + ".transition", "expected a square matrix");
        spec.transition = TransitionMatrix(t.size());
        for (std::size_t x = 0; x < t.size(); ++x) {
            const std::string row_path = path + ".transition[" + std::to_string(x) + "]";
            const auto row = numbers(t[x], row_path);
            if (row.size() != t.size()) fail(row_path, "row length differs from the row count");
            for (std::size_t y = 0; y < row.size(); ++y) spec.transition(x, y) = row[y];
        }
        spec.rewards = rewards;
    }
    if (c.contains("initial")) spec.initial_dist = numbers(c.at("initial"), path + ".initial");
    if (c.contains("label")) {
        if (!c.at("label").is_string()) fail(path + ".label", "expected a string");
        spec.label = c.at("label").get<std::string>();
    }
    const auto result = validate_chain(spec);
    if (!result.ok()) fail(path, "invalid chain (" + result.message() + ")");
    return spec;
}

ActionSet parse_action_set(const json& a, std::size_t num_chains) {
    const std::string path = "action_set";
    if (!a.is_object()) fail(path, "expected an object");
    const json& type = require(a, "type", path);
    if (!type.is_string()) fail(path + ".type", "expected a string");
    const auto kind = type.get<std::string>();
    try {
        if (kind == "explicit") {
            const json& arms = require(a, "arms", path);
            if (!arms.is_array()) fail(path + ".arms", "expected an array");
            std::vector<Arm> out;
            for (std::size_t k = 0; k < arms.size(); ++k) {
                const std::string p = path + ".arms[" + std::to_string(k) + "]";
                if (arms[k].is_object()) {
                    const json& sup = require(arms[k], "support", p);
                    if (!sup.is_array()) fail(p + ".support", "expected an array of chain indices");
                    std::vector<std::size_t> support;
                    for (std::size_t j = 0; j < sup.size(); ++j) {
                        const auto i = count(sup[j], p + ".support[" + std::to_string(j) + "]");
                        if (i >= num_chains) fail(p + ".support", "chain index out of range");
                        support.push_back(i);
                    }
                    out.push_back(Arm::from_support(num_chains, support));
                } else {
                    auto coeffs = numbers(arms[k], p);
                    if (coeffs.size() != num_chains) {
                        fail(p, "expected " + std::to_string(num_chains) + " coefficients");
                    }
                    out.emplace_back(std::move(coeffs));
                }
            }
            return ActionSet::explicit_arms(std::move(out));
        }
        if (kind == "paths") {
            PathGraph g;
            g.num_nodes = count(require(a, "nodes", path), path + ".nodes");
            g.source = count(require(a, "source", path), path + ".source");
            g.sink = count(require(a, "sink", path), path + ".sink");
            const json& edges = require(a, "edges", path);
            if (!edges.is_array()) fail(path + ".edges", "expected an array of [from, to] pairs");
            for (std::size_t k = 0; k < edges.size(); ++k) {
                const std::string p = path + ".edges[" + std::to_string(k) + "]";
                if (!edges[k].is_array() || edges[k].size() != 2) fail(p, "expected [from, to]");
                g.edges.emplace_back(count(edges[k][0], p + "[0]"), count(edges[k][1], p + "[1]"));
            }
            return ActionSet::paths(std::move(g));
        }
        if (kind == "matching") {
            return ActionSet::matching(count(require(a, "users", path), path + ".users"),
                                       count(require(a, "channels", path), path + ".channels"));
        }
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        if (what.rfind(path, 0) == 0) throw;
        fail(path, what);
    }
    fail(path + ".type", "unknown action set type '" + kind + "' (explicit, paths, matching)");
}

Scenario parse_document(const json& doc, const std::string& origin) {
    Scenario s;
    s.name = origin;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) fail("name", "expected a string");
        s.name = doc["name"].get<std::string>();
    }

    const json& sense = require(doc, "sense", "scenario");
    if (sense == "max") {
        s.sense = Sense::Maximize;
    } else if (sense == "min") {
        s.sense = Sense::Minimize;
    } else {
        fail("sense", "expected \"max\" or \"min\"");
    }

    const json& chains = require(doc, "chains", "scenario");
    if (!chains.is_array() || chains.empty()) fail("chains", "expected a non-empty array");
    for (std::size_t i = 0; i < chains.size(); ++i) {
        s.chains.push_back(parse_chain(chains[i], "chains[" + std::to_string(i) + "]"));
        if (s.chains.back().label.empty()) s.chains.back().label = std::to_string(i);
    }

    // Explicit arms are sized by the chain list; other variants define N themselves.
    s.actions = std::make_shared<const ActionSet>(
        parse_action_set(require(doc, "action_set", "scenario"), s.chains.size()));
    if (s.actions->num_chains() != s.chains.size()) {
        fail("chains", "action set has N = " + std::to_string(s.actions->num_chains()) +
                           " but " + std::to_string(s.chains.size()) + " chains are given");
    }

    if (doc.contains("policy")) {
        if (!doc["policy"].is_string()) fail("policy", "expected a string");
        try {
            s.policy = parse_policy(doc["policy"].get<std::string>());
        } catch (const ValidationError& e) {
            fail("policy", e.what());
        }
    }
    if (doc.contains("reward_floor")) s.reward_floor = number(doc["reward_floor"], "reward_floor");
    if (doc.contains("enumeration_cap")) {
        s.enumeration_cap = count(doc["enumeration_cap"], "enumeration_cap");
    }

    if (doc.contains("L") && doc.contains("L_schedule")) fail("L", "give either L or L_schedule");
    if (doc.contains("L")) {
        const double l = number(doc["L"], "L");
        try {
            s.exploration = Exploration::constant(l);
        } catch (const ValidationError& e) {
            fail("L", e.what());
        }
        s.exploration_source = "scenario";
    } else if (doc.contains("L_schedule")) {
        if (!doc["L_schedule"].is_string()) fail("L_schedule", "expected a string");
        try {
            s.exploration = Exploration::parse(doc["L_schedule"].get<std::string>());
        } catch (const ValidationError& e) {
            fail("L_schedule", e.what());
        }
        s.exploration_source = "scenario";
        if (!doc.contains("policy")) s.policy = PolicyKind::ClrmrLn;
    } else {
        try {
            s.exploration = Exploration::constant(scenario_threshold(s));
        } catch (const CapExceeded& e) {
            fail("L", std::string("no default available, give L explicitly (") + e.what() + ")");
        }
        s.exploration_source = "threshold";
    }

    if (doc.contains("horizon")) s.horizon = count(doc["horizon"], "horizon");
    if (doc.contains("seeds")) {
        const json& seeds = doc["seeds"];
        if (seeds.is_array()) {
            for (std::size_t k = 0; k < seeds.size(); ++k) {
                s.seeds.push_back(count(seeds[k], "seeds[" + std::to_string(k) + "]"));
            }
        } else {
            const auto n = count(seeds, "seeds");
            for (std::uint64_t k = 0; k < n; ++k) s.seeds.push_back(k);
        }
        if (s.seeds.empty()) fail("seeds", "at least one seed is required");
    } else {
        for (std::uint64_t k = 0; k < 10; ++k) s.seeds.push_back(k);
    }
    if (doc.contains("master_seed")) s.master_seed = count(doc["master_seed"], "master_seed");
    if (doc.contains("output")) {
        if (!doc["output"].is_string()) fail("output", "expected a string");
        s.output_dir = doc["output"].get<std::string>();
    }

    if (s.horizon < s.chains.size()) {
        fail("horizon", "must be at least the number of chains (" +
                            std::to_string(s.chains.size()) + ")");
    }
    validate_scenario(s);
    return s;
}

} // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(origin + ": malformed JSON: " + e.what());
    }
    if (!doc.is_object()) throw ValidationError(origin + ": top level must be an object");

    static const std::vector<std::string> known = {
        "name",    "sense",        "chains", "action_set", "policy",      "L",
        "L_schedule", "reward_floor", "horizon", "seeds",  "master_seed", "output",
        "enumeration_cap"};
    for (const auto& [key, value] : doc.items()) {
        if (std::ranges::find(known, key) == known.end()) fail(key, "unknown field");
    }

    try {
        return parse_document(doc, origin);
    } catch (const json::exception& e) {
        throw ValidationError(origin + ": " + e.what());
    }
}

Scenario load_scenario(const std::string& path_or_preset) {
    if (auto p = preset(path_or_preset)) return *p;
    std::ifstream in(path_or_preset);
    if (!in) {
        throw ValidationError("'" + path_or_preset +
                              "' is neither a preset (shortest-path-19, matching-5x9) nor a "
                              "readable file");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str(), path_or_preset);
}

} // namespace clrmr
