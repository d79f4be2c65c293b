#include "clrmr/policy_clrmr.hpp"

#include "clrmr/errors.hpp"

#include <stdexcept>

namespace clrmr {

ClrmrPolicy::ClrmrPolicy(const ActionSet& actions, PolicyConfig config)
    : actions_(actions),
      config_(std::move(config)),
      sums_(actions.num_chains(), 0.0),
      counts_(actions.num_chains(), 0),
      anchors_(actions.num_chains(), -1) {
    if (actions.num_chains() == 0) throw ValidationError("action set has no chains");
    const auto missing = actions.uncovered_chains();
    if (!missing.empty()) {
        throw ValidationError("chain " + std::to_string(missing.front()) + " belongs to no arm");
    }
}

std::string ClrmrPolicy::name() const {
    return config_.exploration.is_constant() ? "clrmr" : "clrmr-ln";
}

std::vector<double> ClrmrPolicy::means() const {
    std::vector<double> out(sums_.size(), 0.0);
    for (std::size_t i = 0; i < sums_.size(); ++i) {
        if (counts_[i]) out[i] = sums_[i] / static_cast<double>(counts_[i]);
    }
    return out;
}

std::vector<double> ClrmrPolicy::indices() const {
    const double explore = config_.exploration.at(t2_slot_);
    std::vector<double> g(sums_.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (counts_[i] == 0) throw std::logic_error("index requested for an unobserved chain");
        const double m = static_cast<double>(counts_[i]);
        g[i] = confidence_index(sums_[i] / m, m, explore, t2_, config_.sense, config_.reward_floor);
    }
    return g;
}

std::shared_ptr<const Arm> ClrmrPolicy::select_action() {
    if (selected_) return current_;
    if (stage_ == Stage::BlockStart) {
        if (initializing()) {
            current_ = std::make_shared<const Arm>(actions_.lowest_arm_containing(init_cursor_));
        } else {
            current_ = std::make_shared<const Arm>(actions_.solve_linear(indices(), config_.sense));
        }
        stage_ = Stage::AwaitAnchor;
    }
    selected_ = true;
    return current_;
}

bool ClrmrPolicy::at_anchor(std::span<const int> states) const {
    const auto& support = current_->support();
    for (std::size_t j = 0; j < support.size(); ++j) {
        if (anchors_[support[j]] != states[j]) return false;
    }
    return true;
}

void ClrmrPolicy::record(std::span<const double> rewards) {
    const auto& support = current_->support();
    for (std::size_t j = 0; j < support.size(); ++j) {
        sums_[support[j]] += rewards[j];
        ++counts_[support[j]];
    }
    ++t2_;
    t2_slot_ = t_ - 1;
}

SlotReport ClrmrPolicy::observe(std::span<const int> states, std::span<const double> rewards) {
    if (!selected_) throw std::logic_error("observe() without select_action()");
    const auto& support = current_->support();
    if (states.size() != support.size() || rewards.size() != support.size()) {
        throw ValidationError("observation does not cover exactly the played arm's support");
    }
    selected_ = false;
    ++t_;

    SlotReport report;
    report.block = b_;
    if (initializing()) {
        for (std::size_t j = 0; j < support.size(); ++j) {
            if (anchors_[support[j]] < 0) anchors_[support[j]] = states[j];
        }
        record(rewards);
        report.phase = Phase::Init;
        if (at_anchor(states)) {
            ++init_cursor_;
            ++b_;
            report.block_done = true;
            stage_ = Stage::BlockStart;
        }
    } else if (stage_ == Stage::AwaitAnchor) {
        if (at_anchor(states)) {
            record(rewards);
            report.phase = Phase::SB2;
            stage_ = Stage::InCycle;
        } else {
            report.phase = Phase::SB1;
        }
    } else {
        if (at_anchor(states)) {
            report.phase = Phase::SB3;
            ++b_;
            report.block_done = true;
            stage_ = Stage::BlockStart;
        } else {
            record(rewards);
            report.phase = Phase::SB2;
        }
    }
    report.t2 = t2_;
    return report;
}

} // namespace clrmr
