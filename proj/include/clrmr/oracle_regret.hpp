#pragma once

#include "clrmr/action_space.hpp"
#include "clrmr/markov_core.hpp"
#include "clrmr/policy.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace clrmr {

// Model-aware comparator that plays one fixed arm forever.
struct GenieReport {
    Sense sense = Sense::Maximize;
    std::vector<double> chain_means;
    double gamma_star = 0.0;
    Arm optimal_arm;

    // Gap statistics need the whole arm set; absent when enumeration was capped
    // or when every arm is optimal.
    bool gaps_available = false;
    std::string gaps_note;
    std::vector<Arm> arms;            // canonical order, when enumerable
    std::vector<double> arm_rewards;  // gamma_a for each of arms
    double delta_min = 0.0;
    double delta_max = 0.0;
    double gamma_prime = 0.0;  // best suboptimal expected reward

    double expected_reward(const Arm& arm) const { return arm.value(chain_means); }
    // gamma* - gamma_a (max) or gamma_a - gamma* (min), clamped at 0.
    double gap(const Arm& arm) const;
};

GenieReport genie(const ActionSet& actions, std::span<const ChainAnalysis> analyses, Sense sense,
                  std::size_t cap = kDefaultEnumerationCap);

// Per-chain aggregates that enter the exploration threshold and bound constants.
struct ChainAggregates {
    std::size_t s_max = 0;
    double r_max = 0.0;
    double pi_hat_max = 0.0;
    double eps_min = 0.0;
    double pi_min = 0.0;
    double pi_max = 0.0;
};

ChainAggregates aggregate_chains(std::span<const ChainSpec> specs,
                                 std::span<const ChainAnalysis> analyses);

// Smallest constant L with a logarithmic regret guarantee:
// 56 (H + 1) S_max^2 r_max^2 pi_hat_max^2 / eps_min.
double l_threshold(std::span<const ChainSpec> specs, std::span<const ChainAnalysis> analyses,
                   std::size_t max_support);
double l_threshold(const ChainAggregates& agg, std::size_t max_support);

struct BoundReport {
    bool complete = false;
    std::string note;  // why the report is partial, e.g. the offending arm
    std::vector<std::string> warnings;

    double exploration = 0.0;
    double exploration_threshold = 0.0;

    double z1 = 0.0, z2 = 0.0, z3 = 0.0, z4 = 0.0, z5 = 0.0;

    // Inputs, echoed.
    double product_pi_min = 0.0;  // over all arms' joint chains
    double hitting_max = 0.0;     // over all arms' joint chains
    double hitting_max_optimal = 0.0;
    ChainAggregates chains;
    std::size_t max_support = 0;
    double max_coefficient = 0.0;
    std::size_t num_chains = 0;
    double gamma_star = 0.0;
    double gamma_prime = 0.0;
    double delta_min = 0.0;
    double delta_max = 0.0;

    // Expected weighted suboptimal plays bound Z1 ln n + Z2.
    double suboptimal_bound(double n) const;
    // Regret bound Z3 ln n + Z4.
    double regret_bound(double n) const;
};

BoundReport theorem_constants(const ActionSet& actions, std::span<const ChainSpec> specs,
                              std::span<const ChainAnalysis> analyses, Sense sense,
                              double exploration, std::size_t cap = kDefaultEnumerationCap);

struct RegretPoint {
    std::uint64_t slot = 0;
    double cum_reward = 0.0;
    double regret = 0.0;
    double norm_regret = 0.0;  // regret / ln(slot); NaN at slot 1
};

// Online R(n): n gamma* - cumulative reward, or cumulative cost - n gamma* for min.
class RegretTracker {
public:
    RegretTracker(double gamma_star, Sense sense) : gamma_star_(gamma_star), sense_(sense) {}

    RegretPoint add(double reward);
    const RegretPoint& last() const { return last_; }

private:
    double gamma_star_;
    Sense sense_;
    RegretPoint last_;
};

double slot_reward(const Arm& arm, std::span<const double> rewards);

// Per-slot trace from a complete event log (slots 1, 2, ... without gaps).
std::vector<RegretPoint> regret_trace(std::span<const SlotEvent> log, const GenieReport& report);

} // namespace clrmr
