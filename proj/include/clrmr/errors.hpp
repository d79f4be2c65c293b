#pragma once

#include <stdexcept>
#include <string>

namespace clrmr {

// Bad input: malformed chain, scenario, or action set. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An enumeration or product-space guard was hit.
class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Linear solve or eigensolve failed (near-reducible or degenerate input).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace clrmr
