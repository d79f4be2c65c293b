#include "clrmr/experiment.hpp"

#include "clrmr/errors.hpp"
#include "clrmr/policy_clrmr.hpp"
#include "clrmr/policy_rca.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace clrmr {

std::vector<std::uint64_t> checkpoint_grid(std::uint64_t horizon) {
    static constexpr std::uint64_t kMantissa10[] = {10, 15, 20, 30, 50, 70};
    std::vector<std::uint64_t> out;
    for (std::uint64_t scale = 1; scale <= horizon; scale *= 10) {
        for (std::uint64_t m : kMantissa10) {
            const std::uint64_t n = m * scale / 10;
            if (n >= 2 && n <= horizon && (out.empty() || out.back() < n)) out.push_back(n);
        }
        if (scale > horizon / 10) break;
    }
    if (out.empty() || out.back() != horizon) out.push_back(horizon);
    return out;
}

std::unique_ptr<Policy> make_policy(const Scenario& s, PolicyKind kind) {
    PolicyConfig config;
    config.exploration = s.exploration;
    config.sense = s.sense;
    config.reward_floor = s.reward_floor;
    switch (kind) {
    case PolicyKind::Clrmr:
        if (!config.exploration.is_constant()) {
            throw ValidationError("policy clrmr needs a constant L; use clrmr-ln for schedules");
        }
        return std::make_unique<ClrmrPolicy>(*s.actions, config);
    case PolicyKind::ClrmrLn:
        if (config.exploration.is_constant()) {
            const double l = config.exploration.at(1);
            config.exploration =
                Exploration::schedule([l](std::uint64_t) { return l; }, "constant:" + format_double(l));
        }
        return std::make_unique<ClrmrPolicy>(*s.actions, config);
    case PolicyKind::Rca:
        if (!config.exploration.is_constant()) {
            throw ValidationError("policy rca needs a constant L");
        }
        return std::make_unique<RcaPolicy>(*s.actions, config, s.enumeration_cap);
    }
    throw ValidationError("unknown policy kind");
}

GenieReport scenario_genie(const Scenario& s) {
    std::vector<ChainAnalysis> analyses;
    analyses.reserve(s.chains.size());
    for (const auto& c : s.chains) analyses.push_back(analyze_chain(c));
    return genie(*s.actions, analyses, s.sense, s.enumeration_cap);
}

SeedResult simulate_seed(const Scenario& s, PolicyKind kind, const GenieReport& genie,
                         std::uint64_t seed, const std::vector<std::uint64_t>& checkpoints,
                         const EventSink& sink) {
    std::seed_seq seq{static_cast<std::uint32_t>(s.master_seed),
                      static_cast<std::uint32_t>(s.master_seed >> 32),
                      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    Environment env(s.chains, seq);
    auto policy = make_policy(s, kind);
    RegretTracker tracker(genie.gamma_star, s.sense);

    SeedResult result;
    result.seed = seed;
    result.checkpoints.reserve(checkpoints.size());
    auto next_checkpoint = checkpoints.begin();

    std::vector<int> states;
    std::vector<double> rewards;
    std::shared_ptr<const Arm> arm;
    ArmTally* tally = nullptr;
    double gap = 0.0;
    bool block_open = false;
    double pseudo = 0.0;
    std::uint64_t suboptimal = 0;

    for (std::uint64_t slot = 1; slot <= s.horizon; ++slot) {
        env.step_all();
        auto played = policy->select_action();
        if (!block_open || played != arm) {
            arm = std::move(played);
            tally = &result.arms[arm->id()];
            ++tally->blocks;
            gap = genie.gap(*arm);
            block_open = true;
        }
        const auto& support = arm->support();
        states.resize(support.size());
        rewards.resize(support.size());
        for (std::size_t j = 0; j < support.size(); ++j) {
            states[j] = env.state(support[j]);
            rewards[j] = env.reward(support[j]);
        }
        const SlotReport report = policy->observe(states, rewards);
        if (report.block_done) block_open = false;

        ++tally->plays;
        pseudo += gap;
        if (gap > 0.0) ++suboptimal;
        const RegretPoint point = tracker.add(slot_reward(*arm, rewards));

        if (sink) {
            SlotEvent e;
            e.slot = slot;
            e.phase = report.phase;
            e.block = report.block;
            e.arm = arm;
            e.states = states;
            e.rewards = rewards;
            e.t2 = report.t2;
            sink(e, *policy);
        }
        while (next_checkpoint != checkpoints.end() && *next_checkpoint == slot) {
            result.checkpoints.push_back({slot, point.cum_reward, point.regret, point.norm_regret,
                                          pseudo, suboptimal, policy->blocks()});
            ++next_checkpoint;
        }
    }
    return result;
}

namespace {

template <class F>
double seed_mean(const RunSummary& r, std::size_t k, F field) {
    double sum = 0.0;
    for (const auto& s : r.seeds) sum += field(s.checkpoints[k]);
    return sum / static_cast<double>(r.seeds.size());
}

template <class F>
double seed_std(const RunSummary& r, std::size_t k, F field) {
    if (r.seeds.size() < 2) return 0.0;
    const double mean = seed_mean(r, k, field);
    double ss = 0.0;
    for (const auto& s : r.seeds) {
        const double d = field(s.checkpoints[k]) - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(r.seeds.size() - 1));
}

constexpr auto kRegret = [](const Checkpoint& c) { return c.regret; };
constexpr auto kNorm = [](const Checkpoint& c) { return c.norm_regret; };
constexpr auto kCum = [](const Checkpoint& c) { return c.cum_reward; };
constexpr auto kPseudo = [](const Checkpoint& c) { return c.pseudo_regret; };

// Runs job(i) for i in [0, n) on a bounded pool; the first exception is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job) {
    if (workers == 0) workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace

double RunSummary::mean_regret(std::size_t k) const { return seed_mean(*this, k, kRegret); }
double RunSummary::std_regret(std::size_t k) const { return seed_std(*this, k, kRegret); }
double RunSummary::mean_norm_regret(std::size_t k) const { return seed_mean(*this, k, kNorm); }
double RunSummary::std_norm_regret(std::size_t k) const { return seed_std(*this, k, kNorm); }
double RunSummary::mean_pseudo_regret(std::size_t k) const { return seed_mean(*this, k, kPseudo); }

RunSummary run_experiment(const Scenario& s, PolicyKind kind, const RunOptions& options) {
    validate_scenario(s);
    RunSummary run;
    run.policy = to_string(kind);
    run.genie = scenario_genie(s);
    const auto checkpoints = options.checkpoints.empty() ? checkpoint_grid(s.horizon) : options.checkpoints;
    if (!std::ranges::is_sorted(checkpoints) || checkpoints.back() > s.horizon) {
        throw ValidationError("checkpoints must be sorted and within the horizon");
    }
    // Fail on policy/action-set incompatibility before spawning work.
    make_policy(s, kind);
    if (!options.event_log_dir.empty()) ensure_dir(options.event_log_dir);

    run.seeds.resize(s.seeds.size());
    parallel_for(s.seeds.size(), options.workers, [&](std::size_t i) {
        EventSink sink;
        if (!options.event_log_dir.empty()) {
            const auto path = std::filesystem::path(options.event_log_dir) /
                              (run.policy + "_seed" + std::to_string(s.seeds[i]) + "_events.csv");
            sink = EventLogWriter(path.string());
        }
        run.seeds[i] = simulate_seed(s, kind, run.genie, s.seeds[i], checkpoints, sink);
    });
    return run;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_run_outputs(const RunSummary& run, const Scenario& s, const std::string& dir) {
    namespace fs = std::filesystem;
    ensure_dir(dir);
    static constexpr const char* kHeader = "slot,policy,seed,cum_reward,regret,norm_regret";

    for (const auto& seed : run.seeds) {
        const fs::path path = fs::path(dir) / (run.policy + "_seed" + std::to_string(seed.seed) + ".csv");
        auto out = open_out(path);
        out << kHeader << '\n';
        for (const auto& c : seed.checkpoints) {
            out << c.slot << ',' << run.policy << ',' << seed.seed << ',' << format_double(c.cum_reward)
                << ',' << format_double(c.regret) << ',' << format_double(c.norm_regret) << '\n';
        }
        close_out(out, path);
    }

    const std::size_t points = run.seeds.empty() ? 0 : run.seeds.front().checkpoints.size();
    {
        const fs::path path = fs::path(dir) / (run.policy + "_aggregate.csv");
        auto out = open_out(path);
        out << kHeader << ",mean_regret,std_regret\n";
        for (std::size_t k = 0; k < points; ++k) {
            const double mean = run.mean_regret(k);
            out << run.seeds.front().checkpoints[k].slot << ',' << run.policy << ",all,"
                << format_double(seed_mean(run, k, kCum)) << ',' << format_double(mean) << ','
                << format_double(run.mean_norm_regret(k)) << ',' << format_double(mean) << ','
                << format_double(run.std_regret(k)) << '\n';
        }
        close_out(out, path);
    }

    nlohmann::ordered_json j;
    j["scenario"] = s.name;
    j["policy"] = run.policy;
    j["sense"] = to_string(s.sense);
    j["exploration"] = s.exploration.is_constant() ? nlohmann::ordered_json(s.exploration.at(1))
                                                   : nlohmann::ordered_json(s.exploration.name());
    j["horizon"] = s.horizon;
    j["master_seed"] = s.master_seed;
    j["gamma_star"] = run.genie.gamma_star;
    j["optimal_arm"] = run.genie.optimal_arm.id();
    auto& per_seed = j["seeds"] = nlohmann::ordered_json::array();
    std::map<std::string, ArmTally> totals;
    for (const auto& seed : run.seeds) {
        per_seed.push_back({{"seed", seed.seed},
                            {"final_regret", seed.checkpoints.empty() ? 0.0 : seed.checkpoints.back().regret},
                            {"blocks", seed.checkpoints.empty() ? 0 : seed.checkpoints.back().blocks},
                            {"suboptimal_plays",
                             seed.checkpoints.empty() ? 0 : seed.checkpoints.back().suboptimal_plays}});
        for (const auto& [id, t] : seed.arms) {
            totals[id].plays += t.plays;
            totals[id].blocks += t.blocks;
        }
    }
    auto& cps = j["checkpoints"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < points; ++k) {
        cps.push_back({{"slot", run.seeds.front().checkpoints[k].slot},
                       {"mean_regret", run.mean_regret(k)},
                       {"std_regret", run.std_regret(k)},
                       {"mean_norm_regret", run.mean_norm_regret(k)},
                       {"std_norm_regret", run.std_norm_regret(k)},
                       {"mean_pseudo_regret", run.mean_pseudo_regret(k)}});
    }
    auto& arms = j["arms"] = nlohmann::ordered_json::object();
    for (const auto& [id, t] : totals) arms[id] = {{"plays", t.plays}, {"blocks", t.blocks}};

    const fs::path path = fs::path(dir) / (run.policy + "_summary.json");
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    close_out(out, path);
}

Comparison compare_policies(const Scenario& s, const std::vector<PolicyKind>& kinds,
                            const RunOptions& options) {
    if (kinds.size() < 2) throw ValidationError("compare needs at least two policies");
    Comparison c;
    for (auto kind : kinds) c.runs.push_back(run_experiment(s, kind, options));
    const auto& base = c.runs.front();
    for (std::size_t p = 1; p < c.runs.size(); ++p) {
        const auto& other = c.runs[p];
        auto& table = c.diffs.emplace_back();
        for (std::size_t k = 0; k < base.seeds.front().checkpoints.size(); ++k) {
            auto& row = table.emplace_back();
            for (std::size_t j = 0; j < base.seeds.size(); ++j) {
                row.push_back(base.seeds[j].checkpoints[k].regret - other.seeds[j].checkpoints[k].regret);
            }
        }
    }
    return c;
}

void write_comparison(const Comparison& c, const Scenario& s, const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> names;
    for (const auto& run : c.runs) {
        // The same policy listed twice would overwrite its own files; write it once.
        if (std::ranges::find(names, run.policy) == names.end()) write_run_outputs(run, s, dir);
        names.push_back(run.policy);
    }
    const auto& base = c.runs.front();

    const fs::path path = fs::path(dir) / "compare.csv";
    auto out = open_out(path);
    out << "slot,seed,policy_a,policy_b,regret_a,regret_b,diff\n";
    nlohmann::ordered_json summary;
    summary["scenario"] = s.name;
    summary["baseline"] = base.policy;
    auto& pairs = summary["pairs"] = nlohmann::ordered_json::array();
    for (std::size_t p = 0; p < c.diffs.size(); ++p) {
        const auto& other = c.runs[p + 1];
        for (std::size_t k = 0; k < c.diffs[p].size(); ++k) {
            const auto slot = base.seeds.front().checkpoints[k].slot;
            double sum = 0.0;
            for (std::size_t j = 0; j < base.seeds.size(); ++j) {
                out << slot << ',' << base.seeds[j].seed << ',' << base.policy << ',' << other.policy
                    << ',' << format_double(base.seeds[j].checkpoints[k].regret) << ','
                    << format_double(other.seeds[j].checkpoints[k].regret) << ','
                    << format_double(c.diffs[p][k][j]) << '\n';
                sum += c.diffs[p][k][j];
            }
            out << slot << ",all," << base.policy << ',' << other.policy << ','
                << format_double(base.mean_regret(k)) << ',' << format_double(other.mean_regret(k)) << ','
                << format_double(sum / static_cast<double>(base.seeds.size())) << '\n';
        }
        const auto& last = c.diffs[p].back();
        const auto negative = std::ranges::count_if(last, [](double d) { return d < 0.0; });
        const auto positive = std::ranges::count_if(last, [](double d) { return d > 0.0; });
        const auto k_last = c.diffs[p].size() - 1;
        pairs.push_back({{"policy_a", base.policy},
                         {"policy_b", other.policy},
                         {"slot", base.seeds.front().checkpoints[k_last].slot},
                         {"mean_diff", base.mean_regret(k_last) - other.mean_regret(k_last)},
                         {"a_lower", negative},
                         {"tied", static_cast<std::int64_t>(last.size()) - negative - positive},
                         {"b_lower", positive}});
    }
    close_out(out, path);

    const fs::path spath = fs::path(dir) / "compare_summary.json";
    auto sout = open_out(spath);
    sout << summary.dump(2) << '\n';
    close_out(sout, spath);
}

EventLogWriter::EventLogWriter(const std::string& path) {
    auto f = std::make_shared<std::ofstream>(path, std::ios::binary);
    if (!*f) throw std::runtime_error("cannot write event log '" + path + "'");
    *f << "slot,phase,block,arm,states,rewards,t2\n";
    out_ = std::move(f);
}

void EventLogWriter::operator()(const SlotEvent& e, const Policy&) {
    auto& out = *out_;
    out << e.slot << ',' << to_string(e.phase) << ',' << e.block << ',' << e.arm->id() << ',';
    for (std::size_t j = 0; j < e.states.size(); ++j) out << (j ? " " : "") << e.states[j];
    out << ',';
    for (std::size_t j = 0; j < e.rewards.size(); ++j) out << (j ? " " : "") << format_double(e.rewards[j]);
    out << ',' << e.t2 << '\n';
}

} // namespace clrmr
