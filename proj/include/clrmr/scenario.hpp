#pragma once

#include "clrmr/action_space.hpp"
#include "clrmr/markov_core.hpp"
#include "clrmr/policy.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace clrmr {

enum class PolicyKind { Clrmr, ClrmrLn, Rca };

const char* to_string(PolicyKind kind);
PolicyKind parse_policy(const std::string& name);

struct Scenario {
    std::string name;
    std::vector<ChainSpec> chains;
    std::shared_ptr<const ActionSet> actions;
    Sense sense = Sense::Maximize;

    PolicyKind policy = PolicyKind::Clrmr;
    Exploration exploration = Exploration::constant(1.0);
    std::string exploration_source;  // "threshold", "scenario", "cli", ...
    double reward_floor = 0.0;

    std::uint64_t horizon = 100'000;
    std::vector<std::uint64_t> seeds;  // defaults to 0..9
    std::uint64_t master_seed = 0;
    std::string output_dir = "out";
    std::size_t enumeration_cap = kDefaultEnumerationCap;
};

// Throws ValidationError when the chain count, horizon, or seeds are inconsistent.
void validate_scenario(const Scenario& s);

// Largest support over the action set (exact), used for the default L.
std::size_t scenario_max_support(const Scenario& s);

// Exploration threshold for the scenario's chains and action set.
double scenario_threshold(const Scenario& s);

// Preset names: "shortest-path-19", "matching-5x9".
std::vector<std::string> preset_names();
std::optional<Scenario> preset(const std::string& name);

// Parses a scenario document; errors name the offending field, e.g. "chains[2].p01".
Scenario parse_scenario(const std::string& json_text, const std::string& origin = "<string>");

// A preset name or a path to a JSON file.
Scenario load_scenario(const std::string& path_or_preset);

// The 19 link chains of the delay scenario and the 5x9 user-channel chains (user-major).
std::vector<ChainSpec> shortest_path_chains();
PathGraph shortest_path_standin_graph();
std::vector<ChainSpec> matching_chains();

} // namespace clrmr
