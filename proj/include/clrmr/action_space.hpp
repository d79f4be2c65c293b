#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace clrmr {

enum class Sense { Maximize, Minimize };

const char* to_string(Sense sense);

// One feasible action: nonnegative coefficients over the N chains.
//
// Canonical order (used for every tie-break) compares the coefficient vectors
// lexicographically from chain 0: at the first chain where two arms differ, the
// arm with the smaller coefficient is the smaller arm. For 0/1 arms this means
// the arm that avoids the lowest-indexed differing chain comes first.
class Arm {
public:
    Arm() = default;
    explicit Arm(std::vector<double> coefficients);

    // Unit coefficients on the given chains.
    static Arm from_support(std::size_t num_chains, std::span<const std::size_t> support);

    std::size_t num_chains() const { return coefficients_.size(); }
    const std::vector<double>& coefficients() const { return coefficients_; }
    const std::vector<std::size_t>& support() const { return support_; }
    double coefficient(std::size_t chain) const { return coefficients_[chain]; }
    bool contains(std::size_t chain) const { return coefficients_[chain] != 0.0; }
    double max_coefficient() const;

    // Stable text rendering: support indices joined by '+', with "*c" for c != 1.
    const std::string& id() const { return id_; }

    // sum over the support, in chain-index order
    double value(std::span<const double> weights) const;

    std::strong_ordering operator<=>(const Arm& other) const;
    bool operator==(const Arm& other) const { return coefficients_ == other.coefficients_; }

private:
    std::vector<double> coefficients_;
    std::vector<std::size_t> support_;
    std::string id_;
};

// Directed graph; edge k carries chain k. Arms are simple source-sink paths.
struct PathGraph {
    std::size_t num_nodes = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t source = 0;
    std::size_t sink = 0;
};

// M users by Q channels; chain index u * Q + c (user-major). Arms match every user.
struct BipartiteMatching {
    std::size_t users = 0;
    std::size_t channels = 0;
};

struct StructureStats {
    std::size_t num_chains = 0;
    std::size_t max_support = 0;  // H
    double max_coefficient = 0.0;
    std::uint64_t arm_count = 0;
    bool arm_count_exact = true;  // false: arm_count is a saturated lower bound
};

inline constexpr std::size_t kDefaultEnumerationCap = 200'000;

// Two objective values are tied when within this relative tolerance; ties go to
// the canonically smaller arm.
inline constexpr double kTieTolerance = 1e-12;

// -1, 0, +1: whether objective a is better than, tied with, or worse than b.
int compare_objective(double a, double b, Sense sense);

class ActionSet {
public:
    using Variant = std::variant<std::vector<Arm>, PathGraph, BipartiteMatching>;

    static ActionSet explicit_arms(std::vector<Arm> arms);
    static ActionSet paths(PathGraph graph);
    static ActionSet matching(std::size_t users, std::size_t channels);

    std::size_t num_chains() const { return num_chains_; }
    const Variant& variant() const { return variant_; }
    std::string kind() const;

    // Arm attaining the optimum of sum a_i w_i, ties to the canonically smallest arm.
    Arm solve_linear(std::span<const double> weights, Sense sense) const;

    // Every feasible arm in canonical order; CapExceeded if more than cap.
    std::vector<Arm> enumerate_arms(std::size_t cap = kDefaultEnumerationCap) const;

    StructureStats structure_stats(std::size_t cap = kDefaultEnumerationCap) const;

    // Canonically smallest arm whose support contains the chain; ValidationError if none.
    Arm lowest_arm_containing(std::size_t chain) const;

    // Chains that appear in no arm.
    std::vector<std::size_t> uncovered_chains() const;

private:
    explicit ActionSet(Variant v, std::size_t n) : variant_(std::move(v)), num_chains_(n) {}

    Variant variant_;
    std::size_t num_chains_ = 0;
};

namespace detail {

// Minimum-weight path in a digraph under nonnegative weights, ties to the
// canonically smallest edge set. Returns edge indices, empty if unreachable.
std::vector<std::size_t> shortest_path(const PathGraph& graph, std::span<const double> weights,
                                       std::size_t from, std::size_t to);

// user -> channel; minimizes sum cost (or maximizes when sense == Maximize).
std::vector<std::size_t> assignment(std::size_t users, std::size_t channels,
                                    std::span<const double> weights, Sense sense);

bool is_acyclic(const PathGraph& graph);

} // namespace detail

} // namespace clrmr
