#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nipah {

/// Malformed input: bad scenario files, violated type invariants, bad CLI overrides.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mathematically invalid request: division by a vanished population, singular V,
/// a reproduction-number formula outside its region of validity.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A NaN or infinity appeared during integration; carries the offending step.
class NonFiniteError : public std::runtime_error {
public:
    NonFiniteError(const std::string& msg, std::size_t step)
        : std::runtime_error(msg), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

/// Filesystem failure; the message names the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nipah
