#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace clrmr {

class Arm;

// Dense row-major square matrix of transition probabilities.
struct TransitionMatrix {
    std::size_t n = 0;
    std::vector<double> data;

    TransitionMatrix() = default;
    explicit TransitionMatrix(std::size_t size) : n(size), data(size * size, 0.0) {}

    double& operator()(std::size_t x, std::size_t y) { return data[x * n + y]; }
    double operator()(std::size_t x, std::size_t y) const { return data[x * n + y]; }
    std::span<const double> row(std::size_t x) const { return {data.data() + x * n, n}; }
};

// One finite-state restless Markov chain.
struct ChainSpec {
    TransitionMatrix transition;
    std::vector<double> rewards;
    std::vector<double> initial_dist;  // empty means "use the stationary distribution"
    std::string label;

    std::size_t num_states() const { return transition.n; }
};

// Two-state chain with p01 = P(0 -> 1), p10 = P(1 -> 0).
ChainSpec two_state_chain(double p01, double p10, double reward0, double reward1,
                          std::string label = {});

struct ValidationResult {
    std::vector<std::string> violations;  // invariant names, e.g. "row_stochastic"

    bool ok() const { return violations.empty(); }
    std::string message() const;
};

ValidationResult validate_chain(const ChainSpec& spec);

// Throws ValidationError listing every violated invariant.
void require_valid(const ChainSpec& spec);

// Solves pi P = pi with one balance equation replaced by sum(pi) = 1.
std::vector<double> stationary_distribution(const ChainSpec& spec);

struct ChainAnalysis {
    std::vector<double> stationary;
    double mean_reward = 0.0;
    std::vector<double> pi_hat;  // max(pi_x, 1 - pi_x)
    double eigen_gap = 0.0;      // 1 - lambda_2 of the multiplicative symmetrization
};

ChainAnalysis analyze_chain(const ChainSpec& spec);

// P_hat = P' P where P' is the adjoint of P in l2(pi).
TransitionMatrix multiplicative_symmetrization(const TransitionMatrix& p,
                                               std::span<const double> pi);

inline constexpr std::size_t kProductStateCap = 10'000;

// Joint chain of the arm's support. Joint states are mixed-radix with the
// lowest chain index most significant; joint reward is sum a_i r^i_{x_i}.
ChainSpec product_chain(std::span<const ChainSpec> specs, const Arm& arm,
                        std::size_t state_cap = kProductStateCap);

// Row z1, column z2: expected steps to first reach z2 from z1; zero diagonal.
TransitionMatrix mean_hitting_times(const ChainSpec& spec);

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_index(std::span<const double> probs, std::mt19937_64& rng);

// All chains advance once per slot regardless of which are observed.
class Environment {
public:
    Environment(std::vector<ChainSpec> chains, std::uint64_t seed);
    Environment(std::vector<ChainSpec> chains, std::seed_seq& seed);

    const std::vector<int>& step_all();

    const std::vector<int>& states() const { return states_; }
    int state(std::size_t chain) const { return states_[chain]; }
    double reward(std::size_t chain) const { return chains_[chain].rewards[states_[chain]]; }
    std::size_t size() const { return chains_.size(); }
    const std::vector<ChainSpec>& chains() const { return chains_; }

private:
    void init_states();

    std::vector<ChainSpec> chains_;
    std::vector<std::vector<double>> initial_;
    std::vector<int> states_;
    std::mt19937_64 rng_;
};

} // namespace clrmr
