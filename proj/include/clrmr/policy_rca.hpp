#pragma once

#include "clrmr/policy.hpp"

namespace clrmr {

// Arm-granularity baseline: the same regenerative block mechanics as
// ClrmrPolicy, but every feasible arm keeps its own SB2 statistics of the
// scalar arm reward and its own anchor (the first joint state seen on it).
// Storage and per-block work are linear in the number of arms.
//
// Initialization walks chains in index order and, for each, plays every not
// yet initialized arm containing it (canonical order) for one pass.
class RcaPolicy : public Policy {
public:
    RcaPolicy(const ActionSet& actions, PolicyConfig config,
              std::size_t arm_cap = kDefaultEnumerationCap);

    std::shared_ptr<const Arm> select_action() override;
    SlotReport observe(std::span<const int> states, std::span<const double> rewards) override;
    std::string name() const override { return "rca"; }

    std::size_t num_arms() const { return arms_.size(); }
    const std::vector<std::shared_ptr<const Arm>>& arms() const { return arms_; }
    const std::vector<double>& reward_sums() const { return sums_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    bool initializing() const { return init_cursor_ < init_order_.size(); }
    std::size_t current_arm_index() const { return current_; }

private:
    enum class Stage { BlockStart, AwaitAnchor, InCycle };

    bool at_anchor(std::span<const int> states) const;
    void record(std::span<const double> rewards);

    PolicyConfig config_;
    std::vector<std::shared_ptr<const Arm>> arms_;  // canonical order
    std::vector<double> sums_;
    std::vector<std::uint64_t> counts_;
    std::vector<std::vector<int>> anchors_;  // empty while unset

    std::vector<std::size_t> init_order_;
    std::size_t init_cursor_ = 0;
    Stage stage_ = Stage::BlockStart;
    std::size_t current_ = 0;
    bool selected_ = false;
};

} // namespace clrmr
