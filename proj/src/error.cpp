#include "qhd/error.hpp"

namespace qhd {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::capacity_exceeded: return "capacity_exceeded";
        case ErrorKind::dense_cap_exceeded: return "dense_cap_exceeded";
        case ErrorKind::non_convergence: return "non_convergence";
        case ErrorKind::unknown_fragment: return "unknown_fragment";
        case ErrorKind::not_in_basis: return "not_in_basis";
        case ErrorKind::dimension_mismatch: return "dimension_mismatch";
        case ErrorKind::unrealizable_pattern: return "unrealizable_pattern";
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

}  // namespace qhd
