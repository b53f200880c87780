#pragma once

#include <stdexcept>
#include <string>

namespace esov {

// Base for every failure raised by the library. The CLI maps
// ConfigError to exit code 2 and everything else to 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class PoleProximityError : public Error {
public:
    using Error::Error;
};

class TruncationError : public Error {
public:
    TruncationError(const std::string& msg, double tail)
        : Error(msg), tail_bound(tail) {}
    double tail_bound;
};

class DegenerateNodesError : public Error {
public:
    using Error::Error;
};

class DegenerateVectorError : public Error {
public:
    using Error::Error;
};

class ResonantCharacterError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

} // namespace esov
