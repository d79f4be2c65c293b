// clrmr_sim: run, analyze and compare restless combinatorial bandit policies.
//
// Exit codes: 0 success, 2 invalid input, 3 runtime failure.

#include "clrmr/errors.hpp"
#include "clrmr/experiment.hpp"
#include "clrmr/oracle_regret.hpp"
#include "clrmr/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace clrmr;

namespace {

struct Overrides {
    std::string scenario;
    std::string policy;
    std::optional<double> exploration;
    std::string schedule;
    std::optional<std::uint64_t> horizon;
    std::string seeds;
    std::optional<std::uint64_t> master_seed;
    std::optional<double> reward_floor;
    std::string out;
    std::size_t workers = 0;
    std::string event_log;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--scenario", o.scenario, "scenario JSON file or preset name")->required();
    auto* l = cmd->add_option("--L", o.exploration, "constant exploration L");
    auto* sched = cmd->add_option("--L-schedule", o.schedule,
                                  "exploration schedule: loglog:<scale>, log:<scale>, constant:<L>");
    l->excludes(sched);
    cmd->add_option("--horizon", o.horizon, "number of slots");
    cmd->add_option("--seeds", o.seeds, "seed count N (seeds 0..N-1) or comma list, e.g. 3,7,11");
    cmd->add_option("--master-seed", o.master_seed, "master seed");
    cmd->add_option("--reward-floor", o.reward_floor, "clamp for min-sense indices");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    auto parse_one = [&](const std::string& tok) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            if (!tok.empty() && tok[0] == '-') throw std::invalid_argument("negative");
            v = std::stoull(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) throw ValidationError("--seeds: bad value '" + tok + "'");
        return static_cast<std::uint64_t>(v);
    };
    if (text.find(',') == std::string::npos) {
        const auto n = parse_one(text);
        if (n == 0) throw ValidationError("--seeds: need at least one seed");
        for (std::uint64_t k = 0; k < n; ++k) out.push_back(k);
        return out;
    }
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_one(tok));
    return out;
}

Scenario load_with_overrides(const Overrides& o) {
    Scenario s = load_scenario(o.scenario);
    if (!o.policy.empty()) s.policy = parse_policy(o.policy);
    if (o.exploration) {
        s.exploration = Exploration::constant(*o.exploration);
        s.exploration_source = "cli";
    }
    if (!o.schedule.empty()) {
        s.exploration = Exploration::parse(o.schedule);
        s.exploration_source = "cli";
        if (o.policy.empty() && s.policy == PolicyKind::Clrmr) s.policy = PolicyKind::ClrmrLn;
    }
    if (o.horizon) s.horizon = *o.horizon;
    if (!o.seeds.empty()) s.seeds = parse_seeds(o.seeds);
    if (o.master_seed) s.master_seed = *o.master_seed;
    if (o.reward_floor) s.reward_floor = *o.reward_floor;
    if (!o.out.empty()) s.output_dir = o.out;
    validate_scenario(s);
    return s;
}

nlohmann::ordered_json analysis_json(const Scenario& s) {
    nlohmann::ordered_json j;
    j["scenario"] = s.name;
    j["sense"] = to_string(s.sense);
    j["action_set"] = s.actions->kind();

    std::vector<ChainAnalysis> analyses;
    auto& chains = j["chains"] = nlohmann::ordered_json::array();
    for (const auto& c : s.chains) {
        analyses.push_back(analyze_chain(c));
        const auto& a = analyses.back();
        chains.push_back({{"label", c.label},
                          {"stationary", a.stationary},
                          {"mean_reward", a.mean_reward},
                          {"pi_hat", a.pi_hat},
                          {"eigen_gap", a.eigen_gap}});
    }

    const auto stats = s.actions->structure_stats(s.enumeration_cap);
    j["structure"] = {{"N", stats.num_chains},
                      {"H", stats.max_support},
                      {"a_max", stats.max_coefficient},
                      {"arm_count", stats.arm_count},
                      {"arm_count_exact", stats.arm_count_exact}};

    const auto agg = aggregate_chains(s.chains, analyses);
    j["threshold"] = {{"L_threshold", l_threshold(agg, stats.max_support)},
                      {"S_max", agg.s_max},
                      {"r_max", agg.r_max},
                      {"pi_hat_max", agg.pi_hat_max},
                      {"eps_min", agg.eps_min}};

    const auto g = genie(*s.actions, analyses, s.sense, s.enumeration_cap);
    j["genie"] = {{"gamma_star", g.gamma_star},
                  {"optimal_arm", g.optimal_arm.id()},
                  {"gaps_available", g.gaps_available}};
    if (g.gaps_available) {
        j["genie"]["delta_min"] = g.delta_min;
        j["genie"]["delta_max"] = g.delta_max;
        j["genie"]["gamma_prime"] = g.gamma_prime;
    } else {
        j["genie"]["note"] = g.gaps_note;
    }

    if (!s.exploration.is_constant()) {
        j["bounds"] = {{"complete", false}, {"note", "bound constants need a constant L"}};
        return j;
    }
    const double l = s.exploration.at(1);
    const auto b = theorem_constants(*s.actions, s.chains, analyses, s.sense, l, s.enumeration_cap);
    auto& bj = j["bounds"];
    bj["complete"] = b.complete;
    if (!b.note.empty()) bj["note"] = b.note;
    bj["warnings"] = b.warnings;
    bj["L"] = l;
    if (b.complete) {
        bj["Z1"] = b.z1;
        bj["Z2"] = b.z2;
        bj["Z3"] = b.z3;
        bj["Z4"] = b.z4;
        bj["Z5"] = b.z5;
        bj["Pi_min"] = b.product_pi_min;
        bj["M_max"] = b.hitting_max;
        bj["M_star_max"] = b.hitting_max_optimal;
        bj["pi_min"] = b.chains.pi_min;
        bj["pi_max"] = b.chains.pi_max;
    }
    return j;
}

std::vector<PolicyKind> parse_policy_list(const std::string& text) {
    std::vector<PolicyKind> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_policy(tok));
    if (out.size() < 2) throw ValidationError("--policies: list at least two policies");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Restless combinatorial bandit simulator"};
    app.require_subcommand(1);

    Overrides run_opts;
    auto* run = app.add_subcommand("run", "simulate one policy over the scenario's seeds");
    add_common(run, run_opts);
    run->add_option("--policy", run_opts.policy, "clrmr, clrmr-ln or rca");
    run->add_option("--event-log", run_opts.event_log, "directory for per-seed event logs");

    Overrides analyze_opts;
    std::string analyze_out;
    auto* analyze = app.add_subcommand("analyze", "genie, exploration threshold and bound constants");
    add_common(analyze, analyze_opts);
    analyze->add_option("--json", analyze_out, "write the report here instead of stdout");

    Overrides compare_opts;
    std::string policies;
    auto* compare = app.add_subcommand("compare", "paired per-seed regret differences");
    add_common(compare, compare_opts);
    compare->add_option("--policies", policies, "comma list, first is the baseline")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            const Scenario s = load_with_overrides(run_opts);
            RunOptions options;
            options.workers = run_opts.workers;
            options.event_log_dir = run_opts.event_log;
            const auto summary = run_experiment(s, s.policy, options);
            write_run_outputs(summary, s, s.output_dir);
            const auto k = summary.seeds.front().checkpoints.size() - 1;
            std::cout << summary.policy << ": horizon " << s.horizon << ", " << s.seeds.size()
                      << " seeds, mean regret " << format_double(summary.mean_regret(k))
                      << ", mean R(n)/ln n " << format_double(summary.mean_norm_regret(k)) << "\n"
                      << "wrote " << s.output_dir << "\n";
        } else if (*analyze) {
            const Scenario s = load_with_overrides(analyze_opts);
            const auto text = analysis_json(s).dump(2);
            if (analyze_out.empty()) {
                std::cout << text << "\n";
            } else {
                std::ofstream out(analyze_out);
                out << text << "\n";
                if (!out) throw std::runtime_error("cannot write '" + analyze_out + "'");
            }
        } else if (*compare) {
            const Scenario s = load_with_overrides(compare_opts);
            RunOptions options;
            options.workers = compare_opts.workers;
            const auto c = compare_policies(s, parse_policy_list(policies), options);
            write_comparison(c, s, s.output_dir);
            for (std::size_t p = 0; p < c.diffs.size(); ++p) {
                const auto k = c.diffs[p].size() - 1;
                std::cout << c.runs[0].policy << " - " << c.runs[p + 1].policy
                          << ": mean regret difference "
                          << format_double(c.runs[0].mean_regret(k) - c.runs[p + 1].mean_regret(k))
                          << " at n = " << s.horizon << "\n";
            }
            std::cout << "wrote " << s.output_dir << "\n";
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
