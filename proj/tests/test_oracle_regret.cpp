#include "clrmr/errors.hpp"
#include "clrmr/oracle_regret.hpp"
#include "clrmr/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace clrmr;

namespace {

std::vector<ChainAnalysis> analyze_all(const std::vector<ChainSpec>& specs) {
    std::vector<ChainAnalysis> out;
    for (const auto& c : specs) out.push_back(analyze_chain(c));
    return out;
}

// Analyses with prescribed means only, for genie checks.
std::vector<ChainAnalysis> with_means(const std::vector<double>& means) {
    std::vector<ChainAnalysis> out(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) out[i].mean_reward = means[i];
    return out;
}

} // namespace

TEST_CASE("genie on two unit arms") {
    const auto set = ActionSet::explicit_arms({Arm(std::vector<double>{1, 0}), Arm(std::vector<double>{0, 1})});
    const auto g = genie(set, with_means({0.28, 0.6}), Sense::Maximize);
    CHECK(g.gamma_star == doctest::Approx(0.6));
    CHECK(g.optimal_arm.id() == "1");
    REQUIRE(g.gaps_available);
    CHECK(g.delta_min == doctest::Approx(0.32));
    CHECK(g.delta_max == doctest::Approx(0.32));
    CHECK(g.gamma_prime == doctest::Approx(0.28));
}

TEST_CASE("genie with a single arm flags missing gap statistics") {
    const auto set = ActionSet::explicit_arms({Arm(std::vector<double>{1, 1})});
    const auto g = genie(set, with_means({0.1, 0.2}), Sense::Maximize);
    CHECK_FALSE(g.gaps_available);
    CHECK_FALSE(g.gaps_note.empty());
    CHECK(g.gamma_star == doctest::Approx(0.3));
}

TEST_CASE("genie on a 2x2 matching") {
    const auto g = genie(ActionSet::matching(2, 2), with_means({1, 2, 3, 1}), Sense::Maximize);
    CHECK(g.gamma_star == 5.0);
    CHECK(g.delta_min == 3.0);
}

TEST_CASE("genie under an enumeration cap still reports gamma star") {
    const auto g = genie(ActionSet::matching(3, 4), with_means(std::vector<double>(12, 1.0)), Sense::Maximize, 5);
    CHECK(g.gamma_star == 3.0);
    CHECK_FALSE(g.gaps_available);
}

TEST_CASE("exploration threshold formula") {
    ChainAggregates agg;
    agg.s_max = 2;
    agg.r_max = 1.0;
    agg.pi_hat_max = 0.8;
    agg.eps_min = 0.5;
    CHECK(l_threshold(agg, 3) == doctest::Approx(1146.88).epsilon(1e-12));
    agg.r_max = 2.0;
    CHECK(l_threshold(agg, 3) == doctest::Approx(4.0 * 1146.88).epsilon(1e-12));
    agg.eps_min = 0.0;
    CHECK_THROWS_AS(l_threshold(agg, 3), NumericalError);
    agg.eps_min = 0.5;
    CHECK_THROWS_AS(l_threshold(agg, 0), ValidationError);
}

TEST_CASE("delay preset reproduces L = 1512 with H = 7") {
    const auto chains = shortest_path_chains();
    REQUIRE(chains.size() == 19);
    const auto analyses = analyze_all(chains);
    const auto agg = aggregate_chains(chains, analyses);
    // Closed forms: eps = 1 - (1 - p01 - p10)^2 is smallest at |1 - p01 - p10| = 0.2.
    CHECK(std::abs(agg.eps_min - 0.96) < 1e-12);
    CHECK(std::abs(agg.pi_hat_max - 0.9) < 1e-12);
    CHECK(agg.s_max == 2);
    CHECK(agg.r_max == 1.0);
    CHECK(std::abs(l_threshold(agg, 7) - 1512.0) < 1e-6);
    const auto set = ActionSet::paths(shortest_path_standin_graph());
    CHECK(set.structure_stats().max_support == 7);
}

TEST_CASE("channel preset threshold is 1134, just under the configured 1135") {
    const auto chains = matching_chains();
    REQUIRE(chains.size() == 45);
    const auto agg = aggregate_chains(chains, analyze_all(chains));
    CHECK(std::abs(agg.eps_min - 0.96) < 1e-12);  // (p01, p10) = (0.3, 0.9) appears four times
    CHECK(std::abs(agg.pi_hat_max - 0.9) < 1e-12);
    const double l = l_threshold(agg, 5);
    CHECK(std::abs(l - 1134.0) < 1e-6);
    CHECK(l <= 1135.0);
}

TEST_CASE("bound constants by hand on one chain with arms a = 1 and a = 2") {
    const std::vector<ChainSpec> chains{two_state_chain(0.2, 0.8, 0.0, 1.0)};
    const auto analyses = analyze_all(chains);
    const auto set = ActionSet::explicit_arms({Arm(std::vector<double>{1.0}), Arm(std::vector<double>{2.0})});
    const double l = 300.0;
    const auto b = theorem_constants(set, chains, analyses, Sense::Maximize, l);
    REQUIRE(b.complete);
    // mu = 0.2: gamma* = 0.4, the single gap is 0.2; Pi_min = 0.2, M_max = 1/p01 = 5.
    CHECK(b.gamma_star == doctest::Approx(0.4));
    CHECK(b.delta_min == doctest::Approx(0.2));
    CHECK(b.product_pi_min == doctest::Approx(0.2));
    CHECK(b.hitting_max == doctest::Approx(5.0));
    const double cycle = 1.0 / 0.2 + 5.0 + 1.0;
    const double explore = 4.0 * 1.0 * l * 1.0 * 4.0 / (0.2 * 0.2);
    CHECK(b.z1 == doctest::Approx(0.2 * cycle * explore).epsilon(1e-12));
    CHECK(b.z1 == doctest::Approx(880.0 * l).epsilon(1e-12));
    const double tail = 1.0 + std::numbers::pi * 1.0 * 1.0 * 2.0 / (3.0 * 0.2);
    CHECK(b.z2 == doctest::Approx(0.2 * cycle * tail).epsilon(1e-12));
    const double z5 = 0.2 * (cycle - 1.0 / 0.8) + 0.4 * 5.0;
    CHECK(b.z5 == doctest::Approx(z5).epsilon(1e-12));
    CHECK(b.z3 == doctest::Approx(b.z1 + z5 * explore).epsilon(1e-12));
    CHECK(b.z4 == doctest::Approx(b.z2 + 0.4 * cycle + z5 * tail).epsilon(1e-12));
    CHECK(b.exploration_threshold == doctest::Approx(56.0 * 2 * 4 * 0.64 / 1.0));
    CHECK(b.warnings.empty());
}

TEST_CASE("product stationary minimum of two independent chains") {
    const std::vector<ChainSpec> chains{two_state_chain(0.2, 0.8, 0, 1), two_state_chain(0.2, 0.8, 0, 1)};
    const auto set = ActionSet::explicit_arms({Arm(std::vector<double>{1, 1}), Arm(std::vector<double>{1, 0})});
    const auto b = theorem_constants(set, chains, analyze_all(chains), Sense::Maximize, 1000.0);
    REQUIRE(b.complete);
    CHECK(b.product_pi_min == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("bound report warns below the threshold and stays positive and monotone") {
    const std::vector<ChainSpec> chains{two_state_chain(0.3, 0.4, 0, 1), two_state_chain(0.5, 0.2, 0, 1),
                                        two_state_chain(0.1, 0.6, 0, 1)};
    const auto set = ActionSet::explicit_arms({Arm(std::vector<double>{1, 1, 0}), Arm(std::vector<double>{0, 0, 1})});
    const auto b = theorem_constants(set, chains, analyze_all(chains), Sense::Maximize, 1.0);
    REQUIRE(b.complete);
    CHECK_FALSE(b.warnings.empty());
    for (double z : {b.z1, b.z2, b.z3, b.z4, b.z5}) CHECK(z > 0.0);
    double prev = 0.0;
    for (double n = 2; n < 1e9; n *= 3) {
        CHECK(b.regret_bound(n) >= prev);
        prev = b.regret_bound(n);
    }
}

TEST_CASE("bound report is partial when a product chain is too large") {
    std::vector<ChainSpec> chains;
    for (int i = 0; i < 15; ++i) chains.push_back(two_state_chain(0.3, 0.4, 0, 1));
    std::vector<double> all(15, 1.0), first(15, 0.0);
    first[0] = 1.0;
    const auto set = ActionSet::explicit_arms({Arm(all), Arm(first)});
    const auto b = theorem_constants(set, chains, analyze_all(chains), Sense::Maximize, 1e4);
    CHECK_FALSE(b.complete);
    CHECK(b.note.find("0+1+2") != std::string::npos);
}

TEST_CASE("regret traces") {
    const auto set = ActionSet::explicit_arms({Arm(std::vector<double>{1, 0}), Arm(std::vector<double>{0, 1})});
    const auto g = genie(set, with_means({0.28, 0.6}), Sense::Maximize);
    auto optimal = std::make_shared<const Arm>(g.optimal_arm);
    auto other = std::make_shared<const Arm>(Arm(std::vector<double>{1, 0}));

    std::vector<SlotEvent> log;
    for (std::uint64_t n = 1; n <= 100; ++n) {
        SlotEvent e;
        e.slot = n;
        e.arm = n == 40 ? other : optimal;
        e.rewards = {n == 40 ? 0.28 : 0.6};
        e.states = {0};
        log.push_back(e);
    }
    const auto trace = regret_trace(log, g);
    CHECK(std::isnan(trace[0].norm_regret));
    for (std::size_t k = 0; k < 39; ++k) CHECK(std::abs(trace[k].regret) < 1e-9);
    for (std::size_t k = 39; k < 100; ++k) CHECK(std::abs(trace[k].regret - 0.32) < 1e-9);
    CHECK(trace[99].norm_regret == doctest::Approx(trace[99].regret / std::log(100.0)));

    log.erase(log.begin());
    CHECK_THROWS_AS(regret_trace(log, g), ValidationError);
}

TEST_CASE("min-sense regret is cumulative cost minus n gamma star") {
    RegretTracker t(0.5, Sense::Minimize);
    t.add(0.7);
    const auto p = t.add(0.5);
    CHECK(p.slot == 2);
    CHECK(p.regret == doctest::Approx(0.2));
    CHECK(p.norm_regret == doctest::Approx(0.2 / std::log(2.0)));
}
