#pragma once

#include <stdexcept>
#include <string>

namespace fhn {

/// Bad input: violated precondition, malformed config. Maps to exit code 2.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not deliver (Newton divergence, failed fit). Exit code 1.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw PreconditionError(what);
}

} // namespace fhn
