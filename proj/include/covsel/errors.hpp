#pragma once

#include <stdexcept>
#include <string>

namespace covsel {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line = 0)
        : Error(line ? msg + " (line " + std::to_string(line) + ")" : msg), line_number(line) {}
    std::size_t line_number;
};

struct ConsistencyError : Error {
    using Error::Error;
};

struct IllegalStimulus : Error {
    using Error::Error;
};

struct DuplicateSimulation : Error {
    using Error::Error;
};

struct UnknownGroup : Error {
    using Error::Error;
};

struct GoldenConstructionFailed : Error {
    using Error::Error;
};

struct InsufficientSupport : Error {
    using Error::Error;
};

struct EmptyDataset : Error {
    using Error::Error;
};

struct SingleClassDataset : Error {
    using Error::Error;
};

struct EmptyNode : Error {
    using Error::Error;
};

struct ArityMismatch : Error {
    using Error::Error;
};

struct NoPositiveLeaves : Error {
    using Error::Error;
};

struct PoolExhausted : Error {
    using Error::Error;
};

} // namespace covsel
