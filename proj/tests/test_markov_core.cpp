#include "clrmr/action_space.hpp"
#include "clrmr/errors.hpp"
#include "clrmr/markov_core.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>

using namespace clrmr;

namespace {

bool has_violation(const ValidationResult& r, const std::string& name) {
    return std::ranges::find(r.violations, name) != r.violations.end();
}

} // namespace

TEST_CASE("validate_chain accepts a well-formed two-state chain") {
    const auto r = validate_chain(two_state_chain(0.2, 0.8, 0.1, 1.0));
    CHECK(r.ok());
}

TEST_CASE("validate_chain names each violated invariant") {
    auto identity = two_state_chain(0.0, 0.0, 0.0, 1.0);
    CHECK(has_violation(validate_chain(identity), "irreducible"));

    auto short_row = two_state_chain(0.2, 0.8, 0.0, 1.0);
    short_row.transition(0, 0) = 0.7;
    CHECK(has_violation(validate_chain(short_row), "row_stochastic"));

    auto flip = two_state_chain(1.0, 1.0, 0.0, 1.0);
    CHECK(has_violation(validate_chain(flip), "aperiodic"));

    auto bad_init = two_state_chain(0.2, 0.8, 0.0, 1.0);
    bad_init.initial_dist = {0.5, 0.6};
    CHECK(has_violation(validate_chain(bad_init), "initial_distribution"));

    auto negative = two_state_chain(0.2, 0.8, 0.0, 1.0);
    negative.transition(0, 0) = 1.1;
    negative.transition(0, 1) = -0.1;
    CHECK(has_violation(validate_chain(negative), "entries_in_range"));

    auto rewards = two_state_chain(0.2, 0.8, 0.0, 1.0);
    rewards.rewards.pop_back();
    CHECK(has_violation(validate_chain(rewards), "rewards_size"));

    CHECK_THROWS_AS(require_valid(identity), ValidationError);
}

TEST_CASE("validate_chain detects period 3") {
    ChainSpec c;
    c.transition = TransitionMatrix(3);
    c.transition(0, 1) = 1.0;
    c.transition(1, 2) = 1.0;
    c.transition(2, 0) = 1.0;
    c.rewards = {0, 0, 0};
    CHECK(has_violation(validate_chain(c), "aperiodic"));
    c.transition(2, 0) = 0.5;
    c.transition(2, 1) = 0.5;  // cycles of length 2 and 3
    CHECK(validate_chain(c).ok());
}

TEST_CASE("stationary distribution of two-state chains") {
    const auto pi = stationary_distribution(two_state_chain(0.2, 0.8, 0.1, 1.0));
    CHECK(pi[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(0.2).epsilon(1e-12));
    const auto oracle_pi = oracle::power_iteration(two_state_chain(0.2, 0.8, 0.1, 1.0).transition);
    CHECK(std::abs(pi[1] - oracle_pi[1]) < 1e-12);

    const auto half = stationary_distribution(two_state_chain(0.5, 0.5, 0.0, 1.0));
    CHECK(half[0] == doctest::Approx(0.5));
    CHECK(half[1] == doctest::Approx(0.5));
}

TEST_CASE("doubly stochastic chains have a uniform stationary distribution") {
    ChainSpec c;
    c.transition = TransitionMatrix(3);
    const double m[3][3] = {{0.2, 0.5, 0.3}, {0.5, 0.1, 0.4}, {0.3, 0.4, 0.3}};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) c.transition(a, b) = m[a][b];
    }
    c.rewards = {0, 1, 2};
    for (double p : stationary_distribution(c)) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("stationary distribution agrees with power iteration on random chains") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 50; ++k) {
        const auto c = oracle::random_chain(rng, 2 + k % 5);
        REQUIRE(validate_chain(c).ok());
        const auto pi = stationary_distribution(c);
        const auto ref = oracle::power_iteration(c.transition);
        for (std::size_t x = 0; x < pi.size(); ++x) CHECK(std::abs(pi[x] - ref[x]) < 1e-9);
    }
}

TEST_CASE("analyze_chain: mean reward and eigenvalue gap") {
    const auto a = analyze_chain(two_state_chain(0.2, 0.8, 0.1, 1.0));
    CHECK(a.mean_reward == doctest::Approx(0.28).epsilon(1e-12));
    CHECK(a.eigen_gap == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(a.pi_hat[0] == doctest::Approx(0.8));
    CHECK(a.pi_hat[1] == doctest::Approx(0.8));

    const auto slow = analyze_chain(two_state_chain(0.1, 0.1, 0.0, 1.0));
    CHECK(std::abs(slow.eigen_gap - 0.36) < 1e-10);
    const double lambda2 = oracle::second_eigenvalue_general(two_state_chain(0.1, 0.1, 0, 1).transition,
                                                             slow.stationary);
    CHECK(std::abs(1.0 - lambda2 - slow.eigen_gap) < 1e-10);
}

TEST_CASE("eigenvalue gap matches the general eigensolver on random chains") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 50; ++k) {
        const auto c = oracle::random_chain(rng, 2 + k % 5);
        const auto a = analyze_chain(c);
        const double lambda2 = oracle::second_eigenvalue_general(c.transition, a.stationary);
        CHECK(std::abs((1.0 - lambda2) - a.eigen_gap) < 1e-8);
        CHECK(a.eigen_gap >= 0.0);
        CHECK(a.eigen_gap <= 1.0 + 1e-12);
    }
}

TEST_CASE("multiplicative symmetrization is stochastic and keeps pi stationary") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 30; ++k) {
        const auto c = oracle::random_chain(rng, 2 + k % 4);
        const auto pi = stationary_distribution(c);
        const auto hat = multiplicative_symmetrization(c.transition, pi);
        for (std::size_t x = 0; x < hat.n; ++x) {
            double row = 0.0;
            for (double v : hat.row(x)) row += v;
            CHECK(std::abs(row - 1.0) < 1e-10);
        }
        for (std::size_t y = 0; y < hat.n; ++y) {
            double s = 0.0;
            for (std::size_t x = 0; x < hat.n; ++x) s += pi[x] * hat(x, y);
            CHECK(std::abs(s - pi[y]) < 1e-10);
        }
    }
    // Reversible two-state chain: P_hat = P^2.
    const auto c = two_state_chain(0.3, 0.6, 0, 1);
    const auto hat = multiplicative_symmetrization(c.transition, stationary_distribution(c));
    for (std::size_t x = 0; x < 2; ++x) {
        for (std::size_t y = 0; y < 2; ++y) {
            const double sq = c.transition(x, 0) * c.transition(0, y) + c.transition(x, 1) * c.transition(1, y);
            CHECK(hat(x, y) == doctest::Approx(sq).epsilon(1e-14));
        }
    }
}

TEST_CASE("step_all moves a forced chain and is deterministic per seed") {
    auto flip = two_state_chain(1.0, 1.0, 0.0, 1.0);
    flip.initial_dist = {1.0, 0.0};
    Environment env({flip}, 1);
    CHECK(env.state(0) == 0);
    env.step_all();
    CHECK(env.state(0) == 1);
    CHECK(env.reward(0) == 1.0);

    std::vector<ChainSpec> chains{two_state_chain(0.2, 0.8, 0, 1), two_state_chain(0.4, 0.3, 0, 1)};
    Environment a(chains, 99), b(chains, 99);
    for (int t = 0; t < 1000; ++t) CHECK(a.step_all() == b.step_all());
}

TEST_CASE("step_all occupancy matches the stationary distribution") {
    Environment env({two_state_chain(0.2, 0.8, 0, 1)}, 2024);
    const int n = 1'000'000;
    int ones = 0;
    for (int t = 0; t < n; ++t) ones += env.step_all()[0];
    CHECK(std::abs(ones / static_cast<double>(n) - 0.2) < 0.005);
}

TEST_CASE("product chain structure") {
    const std::vector<ChainSpec> specs{two_state_chain(0.2, 0.8, 0.1, 1.0),
                                       two_state_chain(0.3, 0.6, 0.0, 2.0),
                                       two_state_chain(0.5, 0.4, 1.0, 3.0)};

    SUBCASE("single chain arm scales rewards") {
        const Arm arm(std::vector<double>{0.0, 2.5, 0.0});
        const auto p = product_chain(specs, arm);
        CHECK(p.transition.data == specs[1].transition.data);
        CHECK(p.rewards == std::vector<double>{0.0, 5.0});
    }
    SUBCASE("two chains: product stationary") {
        const std::size_t support[] = {0, 2};
        const auto p = product_chain(specs, Arm::from_support(3, support));
        REQUIRE(p.num_states() == 4);
        const auto pi = stationary_distribution(p);
        const auto a = stationary_distribution(specs[0]);
        const auto b = stationary_distribution(specs[2]);
        for (std::size_t x = 0; x < 2; ++x) {
            for (std::size_t y = 0; y < 2; ++y) CHECK(std::abs(pi[x * 2 + y] - a[x] * b[y]) < 1e-9);
        }
        CHECK(p.rewards[3] == doctest::Approx(4.0));
    }
    SUBCASE("three chains give eight states") {
        const std::size_t support[] = {0, 1, 2};
        CHECK(product_chain(specs, Arm::from_support(3, support)).num_states() == 8);
    }
    SUBCASE("size cap") {
        const std::size_t support[] = {0, 1, 2};
        CHECK_THROWS_AS(product_chain(specs, Arm::from_support(3, support), 7), CapExceeded);
    }
}

TEST_CASE("mean hitting times") {
    const auto m = mean_hitting_times(two_state_chain(0.2, 0.8, 0, 1));
    CHECK(m(0, 1) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(m(1, 0) == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(m(0, 0) == 0.0);

    const auto cycle = mean_hitting_times(two_state_chain(1.0, 1.0, 0, 1));
    CHECK(cycle(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("mean hitting times match Monte Carlo within 2% on a random 4-state chain") {
    std::mt19937_64 rng(31);
    const auto c = oracle::random_chain(rng, 4, 0.4);
    const auto m = mean_hitting_times(c);
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
            if (a == b) continue;
            const auto est = oracle::mc_hitting_time(c.transition, a, b, 1'000'000, rng);
            CHECK(std::abs(est.mean - m(a, b)) <= 0.02 * m(a, b));
        }
    }
}

TEST_CASE("sample_index and unit_uniform") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 1000; ++k) {
        const double u = unit_uniform(rng);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    const double probs[] = {0.0, 1.0, 0.0};
    for (int k = 0; k < 100; ++k) CHECK(sample_index(probs, rng) == 1);
}
