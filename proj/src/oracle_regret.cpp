#include "clrmr/oracle_regret.hpp"

#include "clrmr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace clrmr {

double GenieReport::gap(const Arm& arm) const {
    const double g = expected_reward(arm);
    const double d = sense == Sense::Maximize ? gamma_star - g : g - gamma_star;
    return compare_objective(g, gamma_star, sense) == 0 ? 0.0 : std::max(d, 0.0);
}

GenieReport genie(const ActionSet& actions, std::span<const ChainAnalysis> analyses, Sense sense,
                  std::size_t cap) {
    if (analyses.size() != actions.num_chains()) {
        throw ValidationError("chain count does not match the action set");
    }
    GenieReport r;
    r.sense = sense;
    for (const auto& a : analyses) r.chain_means.push_back(a.mean_reward);
    const bool negative_path_costs =
        std::holds_alternative<PathGraph>(actions.variant()) &&
        std::ranges::any_of(r.chain_means, [](double m) { return m < 0.0; });
    if (negative_path_costs) {
        // Label-setting search is invalid here; scan the enumerated paths instead.
        const auto arms = actions.enumerate_arms(cap);
        r.optimal_arm = arms.front();
        for (const auto& a : arms) {
            if (compare_objective(a.value(r.chain_means), r.optimal_arm.value(r.chain_means), sense) < 0) {
                r.optimal_arm = a;
            }
        }
    } else {
        r.optimal_arm = actions.solve_linear(r.chain_means, sense);
    }
    r.gamma_star = r.optimal_arm.value(r.chain_means);

    try {
        r.arms = actions.enumerate_arms(cap);
    } catch (const CapExceeded& e) {
        r.gaps_note = std::string("gap statistics unavailable: ") + e.what();
        return r;
    }
    bool any = false;
    for (const auto& a : r.arms) {
        const double g = a.value(r.chain_means);
        r.arm_rewards.push_back(g);
        const double d = r.gap(a);
        if (d <= 0.0) continue;
        if (!any) {
            r.delta_min = r.delta_max = d;
            any = true;
        } else {
            r.delta_min = std::min(r.delta_min, d);
            r.delta_max = std::max(r.delta_max, d);
        }
    }
    if (!any) {
        r.gaps_note = "no suboptimal arm: gap statistics undefined";
        return r;
    }
    r.gaps_available = true;
    r.gamma_prime = sense == Sense::Maximize ? r.gamma_star - r.delta_min : r.gamma_star + r.delta_min;
    return r;
}

ChainAggregates aggregate_chains(std::span<const ChainSpec> specs,
                                 std::span<const ChainAnalysis> analyses) {
    if (specs.empty() || specs.size() != analyses.size()) {
        throw ValidationError("chain aggregates need one analysis per chain");
    }
    ChainAggregates agg;
    agg.r_max = -std::numeric_limits<double>::infinity();
    agg.eps_min = std::numeric_limits<double>::infinity();
    agg.pi_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        agg.s_max = std::max(agg.s_max, specs[i].num_states());
        for (double r : specs[i].rewards) agg.r_max = std::max(agg.r_max, r);
        for (double h : analyses[i].pi_hat) agg.pi_hat_max = std::max(agg.pi_hat_max, h);
        for (double p : analyses[i].stationary) {
            agg.pi_min = std::min(agg.pi_min, p);
            agg.pi_max = std::max(agg.pi_max, p);
        }
        agg.eps_min = std::min(agg.eps_min, analyses[i].eigen_gap);
    }
    return agg;
}

double l_threshold(const ChainAggregates& agg, std::size_t max_support) {
    if (max_support < 1) throw ValidationError("H must be at least 1");
    if (!(agg.eps_min > 0.0)) throw NumericalError("eigenvalue gap is zero");
    const double s = static_cast<double>(agg.s_max);
    return 56.0 * static_cast<double>(max_support + 1) * s * s * agg.r_max * agg.r_max *
           agg.pi_hat_max * agg.pi_hat_max / agg.eps_min;
}

double l_threshold(std::span<const ChainSpec> specs, std::span<const ChainAnalysis> analyses,
                   std::size_t max_support) {
    return l_threshold(aggregate_chains(specs, analyses), max_support);
}

double BoundReport::suboptimal_bound(double n) const { return z1 * std::log(n) + z2; }
double BoundReport::regret_bound(double n) const { return z3 * std::log(n) + z4; }

BoundReport theorem_constants(const ActionSet& actions, std::span<const ChainSpec> specs,
                              std::span<const ChainAnalysis> analyses, Sense sense,
                              double exploration, std::size_t cap) {
    BoundReport rep;
    rep.exploration = exploration;
    rep.chains = aggregate_chains(specs, analyses);
    rep.num_chains = actions.num_chains();

    const GenieReport g = genie(actions, analyses, sense, cap);
    rep.gamma_star = g.gamma_star;
    if (!g.gaps_available) {
        rep.note = g.gaps_note;
        return rep;
    }
    rep.gamma_prime = g.gamma_prime;
    rep.delta_min = g.delta_min;
    rep.delta_max = g.delta_max;

    for (const auto& a : g.arms) {
        rep.max_support = std::max(rep.max_support, a.support().size());
        rep.max_coefficient = std::max(rep.max_coefficient, a.max_coefficient());
    }
    rep.exploration_threshold = l_threshold(rep.chains, rep.max_support);
    if (exploration < rep.exploration_threshold) {
        rep.warnings.push_back("L below threshold: logarithmic bound not guaranteed");
    }

    rep.product_pi_min = std::numeric_limits<double>::infinity();
    for (const auto& a : g.arms) {
        ChainSpec joint;
        try {
            joint = product_chain(specs, a);
        } catch (const CapExceeded& e) {
            rep.note = std::string("partial: ") + e.what();
            return rep;
        }
        const auto pi = stationary_distribution(joint);
        rep.product_pi_min = std::min(rep.product_pi_min, *std::ranges::min_element(pi));
        const auto hit = mean_hitting_times(joint);
        const double m = *std::ranges::max_element(hit.data);
        rep.hitting_max = std::max(rep.hitting_max, m);
        if (a == g.optimal_arm) rep.hitting_max_optimal = m;
    }

    const double n = static_cast<double>(rep.num_chains);
    const double h = static_cast<double>(rep.max_support);
    const double s = static_cast<double>(rep.chains.s_max);
    const double a2 = rep.max_coefficient * rep.max_coefficient;
    const double cycle = 1.0 / rep.product_pi_min + rep.hitting_max + 1.0;
    const double explore_term = 4.0 * n * exploration * h * h * a2 / (rep.delta_min * rep.delta_min);
    const double tail = n + std::numbers::pi * n * h * s / (3.0 * rep.chains.pi_min);

    rep.z1 = rep.delta_max * cycle * explore_term;
    rep.z2 = rep.delta_max * cycle * tail;
    rep.z5 = rep.gamma_prime * (cycle - 1.0 / rep.chains.pi_max) +
             rep.gamma_star * rep.hitting_max_optimal;
    rep.z3 = rep.z1 + rep.z5 * explore_term;
    rep.z4 = rep.z2 + rep.gamma_star * (1.0 / rep.chains.pi_min + rep.hitting_max + 1.0) +
             rep.z5 * tail;
    rep.complete = true;
    return rep;
}

RegretPoint RegretTracker::add(double reward) {
    ++last_.slot;
    last_.cum_reward += reward;
    const double n = static_cast<double>(last_.slot);
    last_.regret = sense_ == Sense::Maximize ? n * gamma_star_ - last_.cum_reward
                                             : last_.cum_reward - n * gamma_star_;
    last_.norm_regret = last_.slot >= 2 ? last_.regret / std::log(n)
                                        : std::numeric_limits<double>::quiet_NaN();
    return last_;
}

double slot_reward(const Arm& arm, std::span<const double> rewards) {
    double total = 0.0;
    const auto& support = arm.support();
    for (std::size_t j = 0; j < support.size(); ++j) total += arm.coefficient(support[j]) * rewards[j];
    return total;
}

std::vector<RegretPoint> regret_trace(std::span<const SlotEvent> log, const GenieReport& report) {
    RegretTracker tracker(report.gamma_star, report.sense);
    std::vector<RegretPoint> out;
    out.reserve(log.size());
    for (std::size_t k = 0; k < log.size(); ++k) {
        const auto& e = log[k];
        if (e.slot != k + 1) {
            throw ValidationError("event log gap: expected slot " + std::to_string(k + 1) +
                                  ", found " + std::to_string(e.slot));
        }
        if (!e.arm || e.rewards.size() != e.arm->support().size()) {
            throw ValidationError("event log entry does not match its arm");
        }
        out.push_back(tracker.add(slot_reward(*e.arm, e.rewards)));
    }
    return out;
}

} // namespace clrmr
