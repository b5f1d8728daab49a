#pragma once

#include <stdexcept>
#include <string>

namespace smallsd {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Fixture lookup outside the tabulated range.
class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// A study summary violates a_min <= q1 <= median <= q3 <= max.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// No scenario can be derived from the fields present.
class MissingFieldsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Iterative numerics failed to meet the requested tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Least-squares design matrix is rank deficient.
class SingularDesignError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fixture data inconsistent with what a derivation step requires.
class DataIntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace smallsd
