#include "clrmr/policy_rca.hpp"

#include "clrmr/errors.hpp"

#include <stdexcept>

namespace clrmr {

RcaPolicy::RcaPolicy(const ActionSet& actions, PolicyConfig config, std::size_t arm_cap)
    : config_(std::move(config)) {
    std::vector<Arm> arms;
    try {
        arms = actions.enumerate_arms(arm_cap);
    } catch (const CapExceeded& e) {
        throw CapExceeded(std::string("rca needs an enumerable arm set: ") + e.what());
    }
    arms_.reserve(arms.size());
    for (auto& a : arms) arms_.push_back(std::make_shared<const Arm>(std::move(a)));
    sums_.assign(arms_.size(), 0.0);
    counts_.assign(arms_.size(), 0);
    anchors_.resize(arms_.size());

    std::vector<char> queued(arms_.size(), 0);
    for (std::size_t chain = 0; chain < actions.num_chains(); ++chain) {
        bool covered = false;
        for (std::size_t k = 0; k < arms_.size(); ++k) {
            if (!arms_[k]->contains(chain)) continue;
            covered = true;
            if (!queued[k]) {
                queued[k] = 1;
                init_order_.push_back(k);
            }
        }
        if (!covered) throw ValidationError("chain " + std::to_string(chain) + " belongs to no arm");
    }
}

std::shared_ptr<const Arm> RcaPolicy::select_action() {
    if (selected_) return arms_[current_];
    if (stage_ == Stage::BlockStart) {
        if (initializing()) {
            current_ = init_order_[init_cursor_];
        } else {
            const double explore = config_.exploration.at(t2_slot_);
            std::size_t best = 0;
            double best_value = 0.0;
            for (std::size_t k = 0; k < arms_.size(); ++k) {
                const double m = static_cast<double>(counts_[k]);
                const double v = confidence_index(sums_[k] / m, m, explore, t2_, config_.sense,
                                                  config_.reward_floor);
                // Arms are stored in canonical order, so the first of a tie wins.
                if (k == 0 || compare_objective(v, best_value, config_.sense) < 0) {
                    best = k;
                    best_value = v;
                }
            }
            current_ = best;
        }
        stage_ = Stage::AwaitAnchor;
    }
    selected_ = true;
    return arms_[current_];
}

bool RcaPolicy::at_anchor(std::span<const int> states) const {
    const auto& anchor = anchors_[current_];
    return std::equal(anchor.begin(), anchor.end(), states.begin(), states.end());
}

void RcaPolicy::record(std::span<const double> rewards) {
    const Arm& arm = *arms_[current_];
    double total = 0.0;
    for (std::size_t j = 0; j < rewards.size(); ++j) total += arm.coefficient(arm.support()[j]) * rewards[j];
    sums_[current_] += total;
    ++counts_[current_];
    ++t2_;
    t2_slot_ = t_ - 1;
}

SlotReport RcaPolicy::observe(std::span<const int> states, std::span<const double> rewards) {
    if (!selected_) throw std::logic_error("observe() without select_action()");
    const auto& support = arms_[current_]->support();
    if (states.size() != support.size() || rewards.size() != support.size()) {
        throw ValidationError("observation does not cover exactly the played arm's support");
    }
    selected_ = false;
    ++t_;

    SlotReport report;
    report.block = b_;
    if (initializing()) {
        if (anchors_[current_].empty()) anchors_[current_].assign(states.begin(), states.end());
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
