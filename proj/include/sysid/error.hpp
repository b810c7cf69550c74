#pragma once

#include <stdexcept>
#include <string>

namespace sysid {

class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Operator fails a Hermiticity / PSD / trace precondition beyond tolerance.
class InvalidOperator : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A sampled measurement branch has probability below tol_prob and cannot be
// normalized.
class ImpossibleBranch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Correlation table with an entry outside [-1, 1].
class MalformedTable : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace sysid
