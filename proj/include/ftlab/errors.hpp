#pragma once

#include <stdexcept>
#include <string>

namespace ftlab {

// Raised when a numerical procedure fails (factorization breakdown,
// solver error budget exceeded, root bracketing failure, ...).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised on malformed experiment configuration (bad key, bad range).
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ftlab
