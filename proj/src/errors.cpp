#include "wavespeed/errors.hpp"

namespace wavespeed {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::domain: return "domain";
        case ErrorKind::config: return "config";
        case ErrorKind::validation: return "validation";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::no_heteroclinic: return "no-heteroclinic";
        case ErrorKind::precision: return "precision";
        case ErrorKind::bracket: return "bracket";
        case ErrorKind::regime: return "regime";
        case ErrorKind::instability: return "instability";
        case ErrorKind::tracking: return "tracking";
        case ErrorKind::front_shape: return "front-shape";
        case ErrorKind::insufficient_data: return "insufficient-data";
        case ErrorKind::not_kpp: return "not-kpp";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, std::string(to_string(kind)) + " error: " + what);
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::domain:
        case ErrorKind::config:
        case ErrorKind::validation:
        case ErrorKind::regime:
            return 1;
        case ErrorKind::io:
            return 3;
        default:
            return 2;
    }
}

}  // namespace wavespeed
