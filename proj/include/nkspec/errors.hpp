#pragma once

#include <stdexcept>
#include <string>

namespace nkspec {

// Malformed arguments, out-of-range indices, non-PSD kernel entries.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A jet or scalar evaluated outside the open domain of an elementary function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class UnsupportedOperation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Two independent computations of the same quantity disagree.
class NumericalInconsistency : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Request exceeds a size cap (enumeration size, support size, dimension).
class ResourceLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nkspec
