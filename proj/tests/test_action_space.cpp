#include "clrmr/action_space.hpp"
#include "clrmr/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace clrmr;

namespace {

PathGraph triangle() {
    // s = 0, v = 1, t = 2; chain 0 is s-t, chain 1 is s-v, chain 2 is v-t.
    return {3, {{0, 2}, {0, 1}, {1, 2}}, 0, 2};
}

PathGraph random_dag(std::mt19937_64& rng, std::size_t nodes, double density) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PathGraph g;
    g.num_nodes = nodes;
    g.source = 0;
    g.sink = nodes - 1;
    for (std::size_t a = 0; a + 1 < nodes; ++a) {
        g.edges.emplace_back(a, a + 1);
        for (std::size_t b = a + 2; b < nodes; ++b) {
            if (u(rng) < density) g.edges.emplace_back(a, b);
        }
    }
    std::shuffle(g.edges.begin(), g.edges.end(), rng);
    return g;
}

} // namespace

TEST_CASE("arm invariants, id and canonical order") {
    CHECK_THROWS_AS(Arm(std::vector<double>{1.0, -0.5}), ValidationError);
    const Arm a(std::vector<double>{0.5, 0.0, 2.0});
    CHECK(a.support() == std::vector<std::size_t>{0, 2});
    CHECK(a.id() == "0*0.5+2*2");
    CHECK(a.max_coefficient() == 2.0);

    const std::size_t s01[] = {0, 1}, s02[] = {0, 2}, s12[] = {1, 2};
    const Arm x = Arm::from_support(3, s01), y = Arm::from_support(3, s02), z = Arm::from_support(3, s12);
    CHECK(x.id() == "0+1");
    // The arm lacking the lowest differing chain is smaller.
    CHECK(z < y);
    CHECK(y < x);
}

TEST_CASE("matching 2x2 example") {
    const auto set = ActionSet::matching(2, 2);
    const std::vector<double> w{1, 2, 3, 1};
    const Arm best = set.solve_linear(w, Sense::Maximize);
    CHECK(best.support() == std::vector<std::size_t>{1, 2});  // u1-c2, u2-c1
    CHECK(best.value(w) == 5.0);
}

TEST_CASE("triangle shortest path example") {
    const auto set = ActionSet::paths(triangle());
    const std::vector<double> w{5, 1, 1};
    const Arm best = set.solve_linear(w, Sense::Minimize);
    CHECK(best.support() == std::vector<std::size_t>{1, 2});
    CHECK(best.value(w) == 2.0);
    CHECK(set.enumerate_arms().size() == 2);
    const auto stats = set.structure_stats();
    CHECK(stats.max_support == 2);
    CHECK(stats.arm_count == 2);
}

TEST_CASE("explicit action sets") {
    const auto single = ActionSet::explicit_arms({Arm(std::vector<double>{0.0, 1.0})});
    for (double w0 : {-3.0, 0.0, 7.0}) {
        const std::vector<double> w{w0, -w0};
        CHECK(single.solve_linear(w, Sense::Maximize).id() == "1");
        CHECK(single.solve_linear(w, Sense::Minimize).id() == "1");
    }
    const auto stats = ActionSet::explicit_arms({Arm(std::vector<double>{0.5, 0.0, 2.0})}).structure_stats();
    CHECK(stats.max_support == 2);
    CHECK(stats.max_coefficient == 2.0);
    CHECK_THROWS_AS(ActionSet::explicit_arms({}), ValidationError);
}

TEST_CASE("matching enumeration counts") {
    CHECK(ActionSet::matching(3, 3).enumerate_arms().size() == 6);
    const auto big = ActionSet::matching(5, 9);
    CHECK(big.enumerate_arms().size() == 15120);
    const auto stats = big.structure_stats();
    CHECK(stats.max_support == 5);
    CHECK(stats.max_coefficient == 1.0);
    CHECK(stats.arm_count == 15120);
    CHECK_THROWS_AS(big.enumerate_arms(1000), CapExceeded);
    CHECK_THROWS_AS(ActionSet::matching(3, 2), ValidationError);
}

TEST_CASE("path set preconditions") {
    const auto set = ActionSet::paths(triangle());
    const std::vector<double> w{1, 1, 1};
    CHECK_THROWS_AS(set.solve_linear(w, Sense::Maximize), ValidationError);
    const std::vector<double> neg{1, -1, 1};
    CHECK_THROWS_AS(set.solve_linear(neg, Sense::Minimize), ValidationError);
    const auto cut = ActionSet::paths({4, {{0, 1}, {2, 3}}, 0, 3});
    CHECK_THROWS_AS(cut.solve_linear(std::vector<double>{1, 1}, Sense::Minimize), ValidationError);
    CHECK(cut.uncovered_chains() == std::vector<std::size_t>{0, 1});
}

TEST_CASE("solve_linear equals brute force on random instances") {
    std::mt19937_64 rng(2025);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    SUBCASE("paths") {
        for (int k = 0; k < 60; ++k) {
            const auto g = random_dag(rng, 3 + k % 6, 0.4);
            const auto set = ActionSet::paths(g);
            std::vector<double> w(g.edges.size());
            for (auto& x : w) x = u(rng);
            const auto arms = set.enumerate_arms();
            CHECK(arms.size() == oracle::all_paths(g).size());
            CHECK(set.solve_linear(w, Sense::Minimize).value(w) ==
                  oracle::brute_force_value(arms, w, Sense::Minimize));
        }
    }
    SUBCASE("matchings") {
        for (int k = 0; k < 60; ++k) {
            const std::size_t q = 1 + k % 4, m = 1 + (k / 4) % q;
            const auto set = ActionSet::matching(m, q);
            std::vector<double> w(m * q);
            for (auto& x : w) x = u(rng) * 10.0 - 5.0;
            const auto arms = set.enumerate_arms();
            CHECK(arms.size() == oracle::all_matchings(m, q).size());
            for (auto sense : {Sense::Maximize, Sense::Minimize}) {
                CHECK(set.solve_linear(w, sense).value(w) == oracle::brute_force_value(arms, w, sense));
            }
        }
    }
}

TEST_CASE("ties go to the canonically smallest arm") {
    const auto set = ActionSet::matching(2, 3);
    const std::vector<double> flat(6, 1.0);
    const auto arms = set.enumerate_arms();
    CHECK(set.solve_linear(flat, Sense::Maximize) == arms.front());
    CHECK(set.solve_linear(flat, Sense::Minimize) == arms.front());

    const auto paths = ActionSet::paths({3, {{0, 1}, {1, 2}, {0, 1}, {1, 2}}, 0, 2});
    const std::vector<double> w(4, 0.5);
    CHECK(paths.solve_linear(w, Sense::Minimize).id() == "2+3");

    std::vector<Arm> list;
    for (const auto& a : arms) list.push_back(a);
    std::mt19937_64 rng(4);
    const auto reference = ActionSet::explicit_arms(list).solve_linear(flat, Sense::Maximize);
    for (int k = 0; k < 10; ++k) {
        std::shuffle(list.begin(), list.end(), rng);
        CHECK(ActionSet::explicit_arms(list).solve_linear(flat, Sense::Maximize) == reference);
    }
}

TEST_CASE("argmax is invariant to positive scaling") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto set = ActionSet::matching(3, 4);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> w(12);
        for (auto& x : w) x = std::round(u(rng) * 4.0);  // frequent ties
        const double c = 0.5 + 3.0 * u(rng);
        std::vector<double> scaled(w);
        for (auto& x : scaled) x *= c;
        CHECK(set.solve_linear(w, Sense::Maximize).id() == set.solve_linear(scaled, Sense::Maximize).id());
    }
}

TEST_CASE("lowest_arm_containing is the smallest arm through the chain") {
    std::mt19937_64 rng(12);
    for (int k = 0; k < 30; ++k) {
        const auto g = random_dag(rng, 3 + k % 5, 0.5);
        const auto set = ActionSet::paths(g);
        const auto arms = set.enumerate_arms();
        for (std::size_t i = 0; i < g.edges.size(); ++i) {
            const auto it = std::ranges::find_if(arms, [i](const Arm& a) { return a.contains(i); });
            if (it == arms.end()) {
                CHECK_THROWS_AS(set.lowest_arm_containing(i), ValidationError);
            } else {
                CHECK(set.lowest_arm_containing(i) == *it);
            }
        }
    }
    const auto m = ActionSet::matching(2, 3);
    const auto arms = m.enumerate_arms();
    for (std::size_t i = 0; i < 6; ++i) {
        const auto it = std::ranges::find_if(arms, [i](const Arm& a) { return a.contains(i); });
        CHECK(m.lowest_arm_containing(i) == *it);
    }
}

TEST_CASE("every solution is a valid path or matching") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 40; ++k) {
        const auto g = random_dag(rng, 6, 0.5);
        std::vector<double> w(g.edges.size());
        for (auto& x : w) x = u(rng);
        const auto arm = ActionSet::paths(g).solve_linear(w, Sense::Minimize);
        // Walk from source along the support.
        std::size_t node = g.source, used = 0;
        while (node != g.sink) {
            const auto it = std::ranges::find_if(arm.support(), [&](std::size_t e) { return g.edges[e].first == node; });
            REQUIRE(it != arm.support().end());
            node = g.edges[*it].second;
            ++used;
        }
        CHECK(used == arm.support().size());

        const auto match = ActionSet::matching(3, 5).solve_linear(std::vector<double>(15, u(rng)), Sense::Maximize);
        std::vector<int> users(3, 0), channels(5, 0);
        for (std::size_t i : match.support()) {
            ++users[i / 5];
            ++channels[i % 5];
        }
        CHECK(std::ranges::all_of(users, [](int c) { return c == 1; }));
        CHECK(std::ranges::all_of(channels, [](int c) { return c <= 1; }));
    }
}

TEST_CASE("structure stats of a large implicit path family") {
    // Three stages of 100 parallel edges, then a 700-edge tail: N = 1000, 10^6 paths.
    PathGraph g;
    g.num_nodes = 704;
    g.source = 0;
    g.sink = 703;
    for (std::size_t stage = 0; stage < 3; ++stage) {
        for (int k = 0; k < 100; ++k) g.edges.emplace_back(stage, stage + 1);
    }
    for (std::size_t v = 3; v < 703; ++v) g.edges.emplace_back(v, v + 1);
    const auto set = ActionSet::paths(g);
    const auto stats = set.structure_stats();
    CHECK(stats.num_chains == 1000);
    CHECK(stats.arm_count == 1'000'000);
    CHECK(stats.max_support == 703);
    CHECK_THROWS_AS(set.enumerate_arms(), CapExceeded);
}
