#include "odefs/errors.hpp"

namespace odefs {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::config: return "CONFIG";
        case ErrorCode::io: return "IO";
        case ErrorCode::parse: return "PARSE";
        case ErrorCode::empty_candidate_set: return "EMPTY_CANDIDATE_SET";
        case ErrorCode::degenerate_component: return "DEGENERATE_COMPONENT";
        case ErrorCode::all_components_degenerate: return "ALL_COMPONENTS_DEGENERATE";
        case ErrorCode::numeric: return "NUMERIC";
        case ErrorCode::metric: return "METRIC";
    }
    return "UNKNOWN";
}

}  // namespace odefs
