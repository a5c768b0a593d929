#include "spsd/errors.hpp"

namespace spsd {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::dimension: return "dimension";
        case ErrorKind::domain: return "domain";
        case ErrorKind::not_hessenberg: return "not_hessenberg";
        case ErrorKind::spectrum: return "spectrum";
        case ErrorKind::singular: return "singular";
        case ErrorKind::non_convergence: return "non_convergence";
        case ErrorKind::degenerate_orbit: return "degenerate_orbit";
        case ErrorKind::blow_up: return "blow_up";
        case ErrorKind::assumption: return "assumption";
        case ErrorKind::positivity: return "positivity";
        case ErrorKind::config: return "config";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace spsd
