#pragma once

#include "clrmr/oracle_regret.hpp"
#include "clrmr/policy.hpp"
#include "clrmr/scenario.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace clrmr {

// {1, 1.5, 2, 3, 5, 7} x 10^k for n >= 2 up to the horizon, plus the horizon itself.
std::vector<std::uint64_t> checkpoint_grid(std::uint64_t horizon);

std::unique_ptr<Policy> make_policy(const Scenario& s, PolicyKind kind);

// Genie for the scenario's chains (gaps only when the arm set is enumerable).
GenieReport scenario_genie(const Scenario& s);

struct Checkpoint {
    std::uint64_t slot = 0;
    double cum_reward = 0.0;
    double regret = 0.0;
    double norm_regret = 0.0;
    double pseudo_regret = 0.0;           // sum_a Delta_a T_a(n)
    std::uint64_t suboptimal_plays = 0;   // slots spent on arms with a positive gap
    std::uint64_t blocks = 0;
};

struct ArmTally {
    std::uint64_t plays = 0;   // T_a
    std::uint64_t blocks = 0;  // B_a, blocks started on the arm
};

struct SeedResult {
    std::uint64_t seed = 0;
    std::vector<Checkpoint> checkpoints;
    std::map<std::string, ArmTally> arms;  // keyed by arm id
};

// Called after every slot with the event and the policy's post-slot state.
using EventSink = std::function<void(const SlotEvent&, const Policy&)>;

struct RunOptions {
    std::vector<std::uint64_t> checkpoints;  // empty: checkpoint_grid(horizon)
    std::size_t workers = 0;                 // 0: hardware concurrency
    std::string event_log_dir;               // non-empty: <policy>_seed<seed>_events.csv per seed
};

// One replication. The environment and policy get a private RNG stream seeded
// from (master seed, seed value).
SeedResult simulate_seed(const Scenario& s, PolicyKind kind, const GenieReport& genie,
                         std::uint64_t seed, const std::vector<std::uint64_t>& checkpoints,
                         const EventSink& sink = {});

struct RunSummary {
    std::string policy;
    GenieReport genie;
    std::vector<SeedResult> seeds;  // in scenario seed order

    // Per checkpoint index, over seeds; sample standard deviation (0 for one seed).
    double mean_regret(std::size_t k) const;
    double std_regret(std::size_t k) const;
    double mean_norm_regret(std::size_t k) const;
    double std_norm_regret(std::size_t k) const;
    double mean_pseudo_regret(std::size_t k) const;
};

RunSummary run_experiment(const Scenario& s, PolicyKind kind, const RunOptions& options = {});

// <policy>_seed<seed>.csv, <policy>_aggregate.csv and <policy>_summary.json under dir.
void write_run_outputs(const RunSummary& run, const Scenario& s, const std::string& dir);

std::string format_double(double v);

struct Comparison {
    std::vector<RunSummary> runs;
    // diffs[p][k][j]: R(first policy) - R(policy p + 1) at checkpoint k for seed j.
    std::vector<std::vector<std::vector<double>>> diffs;
};

Comparison compare_policies(const Scenario& s, const std::vector<PolicyKind>& kinds,
                            const RunOptions& options = {});

// compare.csv and compare_summary.json, plus every run's own outputs.
void write_comparison(const Comparison& c, const Scenario& s, const std::string& dir);

// Event log as CSV: slot,phase,block,arm,states,rewards,t2.
class EventLogWriter {
public:
    explicit EventLogWriter(const std::string& path);
    void operator()(const SlotEvent& e, const Policy&);

private:
    std::shared_ptr<std::ostream> out_;
};

} // namespace clrmr
