#pragma once

#include <stdexcept>
#include <string>

namespace weaklab {

// Bad or missing user input: files, records, flags. CLI exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Remote embedding service unreachable or misbehaving. CLI exit code 3.
class ServiceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computed quantity broke a contract (non-finite loss, zero column mass,
// support violation). CLI exit code 4.
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace weaklab
