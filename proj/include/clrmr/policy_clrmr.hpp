#pragma once

#include "clrmr/policy.hpp"

#include <optional>

namespace clrmr {

// Block-based index policy with per-chain regenerative statistics.
//
// Memory is two length-N vectors (SB2 sample means and counts), the per-chain
// anchor states, scalar counters, and the arm of the current block. Arm-level
// statistics are never kept, so the feasible family may be exponentially large.
//
// With a Schedule exploration the index uses L(n(t2)), where n(t2) is the slot at
// which the SB2 counter reached its current value.
class ClrmrPolicy : public Policy {
public:
    ClrmrPolicy(const ActionSet& actions, PolicyConfig config);

    std::shared_ptr<const Arm> select_action() override;
    SlotReport observe(std::span<const int> states, std::span<const double> rewards) override;
    std::string name() const override;

    // Per-chain index g_i at the current counters; requires every m2_i > 0.
    std::vector<double> indices() const;

    bool initializing() const { return init_cursor_ < sums_.size(); }
    std::size_t init_cursor() const { return init_cursor_; }
    // SB2 sample mean z2_i = sum / count (zero before the first observation).
    std::vector<double> means() const;
    const std::vector<double>& reward_sums() const { return sums_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    const std::vector<int>& anchors() const { return anchors_; }  // -1 while unset
    std::uint64_t t2_slot() const { return t2_slot_; }
    const PolicyConfig& config() const { return config_; }

private:
    enum class Stage { BlockStart, AwaitAnchor, InCycle };

    bool at_anchor(std::span<const int> states) const;
    void record(std::span<const double> rewards);

    const ActionSet& actions_;
    PolicyConfig config_;

    std::vector<double> sums_;
    std::vector<std::uint64_t> counts_;
    std::vector<int> anchors_;

    std::size_t init_cursor_ = 0;
    Stage stage_ = Stage::BlockStart;
    std::shared_ptr<const Arm> current_;
    bool selected_ = false;
};

} // namespace clrmr
