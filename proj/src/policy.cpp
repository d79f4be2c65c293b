#include "clrmr/policy.hpp"

#include "clrmr/errors.hpp"

#include <cmath>
#include <numbers>

namespace clrmr {

const char* to_string(Phase phase) {
    switch (phase) {
    case Phase::Init: return "init";
    case Phase::SB1: return "sb1";
    case Phase::SB2: return "sb2";
    case Phase::SB3: return "sb3";
    }
    return "?";
}

Exploration Exploration::constant(double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError("exploration constant L must be positive and finite");
    }
    Exploration e;
    e.value_ = value;
    e.name_ = "constant";
    return e;
}

Exploration Exploration::schedule(std::function<double(std::uint64_t)> fn, std::string name) {
    if (!fn) throw ValidationError("empty exploration schedule");
    // Spot-check positivity and monotonicity on a geometric grid of slots.
    double prev = 0.0;
    for (std::uint64_t n = 1; n <= (std::uint64_t{1} << 40); n *= 2) {
        const double v = fn(n);
        if (!(v > 0.0) || !std::isfinite(v) || v < prev) {
            throw ValidationError("exploration schedule must be positive and non-decreasing");
        }
        prev = v;
    }
    Exploration e;
    e.fn_ = std::move(fn);
    e.name_ = std::move(name);
    return e;
}

Exploration Exploration::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    double param = 1.0;
    if (colon != std::string::npos) {
        try {
            std::size_t used = 0;
            param = std::stod(text.substr(colon + 1), &used);
            if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError("bad exploration parameter in '" + text + "'");
        }
    }
    if (kind == "constant") {
        if (colon == std::string::npos) throw ValidationError("constant schedule needs a value");
        return constant(param);
    }
    if (!(param > 0.0)) throw ValidationError("schedule scale must be positive");
    if (kind == "loglog") {
        return schedule(
            [param](std::uint64_t n) {
                return param * (1.0 + std::log1p(std::log1p(static_cast<double>(n))));
            },
            text);
    }
    if (kind == "log") {
        return schedule(
            [param](std::uint64_t n) {
                return param * std::log(std::numbers::e + static_cast<double>(n));
            },
            text);
    }
    throw ValidationError("unknown exploration schedule '" + text + "'");
}

double confidence_index(double mean, double count, double exploration, std::uint64_t t2,
                        Sense sense, double floor) {
    const double bonus = std::sqrt(exploration * std::log(static_cast<double>(t2)) / count);
    if (sense == Sense::Maximize) return mean + bonus;
    return std::max(mean - bonus, floor);
}

} // namespace clrmr
