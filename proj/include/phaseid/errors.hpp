#pragma once

#include <stdexcept>
#include <string>

namespace phaseid {

// Bad input data (malformed CSV, unparseable rows, duplicates). CLI exit 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or parameter values. CLI exit 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Violated precondition or broken internal invariant. CLI exit 3.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// A circuit sample whose load exceeds what the circuit can deliver.
class InfeasibleSampleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace phaseid
