#pragma once

#include <stdexcept>
#include <string>

namespace graft {

enum class ErrorKind {
    Parse,       // malformed file or unknown construct
    Validate,    // structural invariant violated
    Shape,       // shape inference / shape mismatch
    Io,          // file system
    Numeric,     // NaN/Inf encountered where finite values are required
    Mismatch,    // hash or identity mismatch between artifacts
    Ambiguous,   // diff cannot decide between candidates
    Coverage,    // surgery plan does not tile the target parameters
    Resource,    // explicit resource budget exceeded
    InvalidArg,  // API misuse
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

} // namespace graft
