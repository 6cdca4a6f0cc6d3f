#pragma once

#include <stdexcept>
#include <string>

namespace plsel {

// Bad or unreadable user input (files, flags, malformed records).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition of a computation does not hold for the given data
// (empty corpus, non-positive maximum, mismatched keys, ...).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace plsel
