#pragma once

#include <stdexcept>
#include <string>

namespace scalesteg {

enum class ErrorCode {
    invalid_argument,
    dimension_mismatch,
    io,
    unsupported_format,
    overflow,
    infeasible,
    solver_failure,
    invalid_key,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Process exit status used by the CLI for each error class.
int exit_code_for(ErrorCode code) noexcept;

const char* to_string(ErrorCode code) noexcept;

}  // namespace scalesteg
