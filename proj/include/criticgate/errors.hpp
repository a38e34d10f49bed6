#pragma once

#include <stdexcept>
#include <string>

namespace criticgate {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration detected before any work starts (missing file, psi > K,
// absent credential, ...).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

// A caller violated an operation precondition (horizon < 1, revise on an
// approve verdict, turn out of range, ...).
struct PreconditionError : Error {
    explicit PreconditionError(const std::string& msg) : Error("precondition: " + msg) {}
};

// A domain-type invariant would be broken (gate=1 without verdict, tool_result
// on a user observation, out-of-order turn index, ...).
struct InvariantViolation : Error {
    explicit InvariantViolation(const std::string& msg) : Error("invariant: " + msg) {}
};

// Malformed input document. `where` names the offending field or line.
struct ParseError : Error {
    ParseError(const std::string& where, const std::string& msg)
        : Error("parse error at " + where + ": " + msg), where(where) {}
    std::string where;
};

// A model backend failed mid-episode; carries the turn for diagnostics.
struct BackendError : Error {
    BackendError(int turn, const std::string& msg)
        : Error("backend failure at turn " + std::to_string(turn) + ": " + msg), turn(turn) {}
    int turn = 0;
};

// Actor proposed a tool the environment does not register.
struct UnknownToolError : Error {
    explicit UnknownToolError(const std::string& tool)
        : Error("unknown tool: " + tool), tool(tool) {}
    std::string tool;
};

}  // namespace criticgate
