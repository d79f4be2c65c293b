#pragma once

#include "clrmr/action_space.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace clrmr {

// Which part of a block a slot belongs to. SB2 slots (and initialization slots)
// are the only ones whose observations reach the statistics.
enum class Phase { Init, SB1, SB2, SB3 };

const char* to_string(Phase phase);

// Exploration constant L, either fixed or a non-decreasing schedule L(n).
class Exploration {
public:
    static Exploration constant(double value);
    static Exploration schedule(std::function<double(std::uint64_t)> fn, std::string name);

    // "constant:<L>", "loglog:<scale>" = scale (1 + ln(1 + ln(1 + n))),
    // "log:<scale>" = scale ln(e + n).
    static Exploration parse(const std::string& text);

    double at(std::uint64_t slot) const { return fn_ ? fn_(slot) : value_; }
    bool is_constant() const { return !fn_; }
    const std::string& name() const { return name_; }

private:
    double value_ = 0.0;
    std::function<double(std::uint64_t)> fn_;
    std::string name_;
};

struct PolicyConfig {
    Exploration exploration = Exploration::constant(1.0);
    Sense sense = Sense::Maximize;
    double reward_floor = 0.0;  // min sense: indices are clamped from below here
};

struct SlotReport {
    Phase phase = Phase::Init;
    std::uint64_t block = 0;  // id of the block this slot belongs to
    bool block_done = false;  // this slot closed the block
    std::uint64_t t2 = 0;     // SB2/initialization counter after this slot
};

// Upper (max sense) or clamped lower (min sense) confidence index.
double confidence_index(double mean, double count, double exploration, std::uint64_t t2,
                        Sense sense, double floor);

// Block-structured learner. Each slot: select_action(), then observe() with the
// states and unscaled per-chain rewards of the played arm's support, in support order.
class Policy {
public:
    virtual ~Policy() = default;

    virtual std::shared_ptr<const Arm> select_action() = 0;
    virtual SlotReport observe(std::span<const int> states, std::span<const double> rewards) = 0;
    virtual std::string name() const = 0;

    std::uint64_t t() const { return t_; }
    std::uint64_t t2() const { return t2_; }
    std::uint64_t blocks() const { return b_; }

protected:
    std::uint64_t t_ = 1;
    std::uint64_t t2_ = 1;
    std::uint64_t b_ = 0;
    std::uint64_t t2_slot_ = 1;  // slot at which t2 reached its current value
};

// One slot of the structured event log.
struct SlotEvent {
    std::uint64_t slot = 0;
    Phase phase = Phase::Init;
    std::uint64_t block = 0;
    std::shared_ptr<const Arm> arm;
    std::vector<int> states;
    std::vector<double> rewards;
    std::uint64_t t2 = 0;
};

} // namespace clrmr
