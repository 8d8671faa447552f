#pragma once

#include <stdexcept>
#include <string>

namespace odefs {

enum class ErrorCode {
    config,
    io,
    parse,
    empty_candidate_set,
    degenerate_component,
    all_components_degenerate,
    numeric,
    metric,
};

const char* error_code_name(ErrorCode code);

/// Error with a stable machine-parsable code; the CLI prints
/// "error: <CODE>: <message>" and maps the code to its exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }
    const char* code_name() const { return error_code_name(code_); }

private:
    ErrorCode code_;
};

}  // namespace odefs
