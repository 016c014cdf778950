#pragma once

#include <stdexcept>
#include <string>

namespace cellsynth {

// Failure categories surfaced by the CLI as machine-parsable one-liners.
enum class ErrorCategory {
    config,     // invalid configuration values
    parameter,  // invalid operation argument
    shape,      // dimension / size mismatch
    format,     // malformed file contents
    data,       // dataset-level problem (empty pool, under-populated bin, ...)
    io,         // filesystem / process failures
    backend,    // misbehaving pluggable backend (non-finite output, bad shape)
};

const char* to_string(ErrorCategory c);

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory c, const std::string& msg) {
    throw Error(c, msg);
}

} // namespace cellsynth
