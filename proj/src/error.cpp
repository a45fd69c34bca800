#include "scalesteg/error.hpp"

namespace scalesteg {

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument:
        case ErrorCode::dimension_mismatch:
        case ErrorCode::invalid_key:
            return 1;
        case ErrorCode::infeasible:
            return 2;
        case ErrorCode::solver_failure:
        case ErrorCode::overflow:
            return 3;
        case ErrorCode::io:
        case ErrorCode::unsupported_format:
            return 4;
    }
    return 1;
}

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::dimension_mismatch: return "dimension-mismatch";
        case ErrorCode::io: return "io";
        case ErrorCode::unsupported_format: return "unsupported-format";
        case ErrorCode::overflow: return "overflow";
        case ErrorCode::infeasible: return "infeasible";
        case ErrorCode::solver_failure: return "solver-failure";
        case ErrorCode::invalid_key: return "invalid-key";
    }
    return "unknown";
}

}  // namespace scalesteg
