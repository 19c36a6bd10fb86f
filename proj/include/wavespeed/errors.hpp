#pragma once

#include <stdexcept>
#include <string>

namespace wavespeed {

/// Failure categories shared by every module.
enum class ErrorKind {
    domain,          ///< argument outside the mathematical domain
    config,          ///< missing or inconsistent configuration
    validation,      ///< input violates a checked structural assumption
    numeric,         ///< quadrature or integration did not converge
    no_heteroclinic, ///< no connecting wave across the speed bracket
    precision,       ///< classification ambiguous at the tolerance floor
    bracket,         ///< envelope nonlinearity not bistable
    regime,          ///< comparison construction requested outside its T range
    instability,     ///< corridor violation during time stepping
    tracking,        ///< front left the computational window
    front_shape,     ///< level set has zero or several crossings
    insufficient_data,
    not_kpp,
    io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

/// Process exit code for an error category: 1 validation, 2 numeric, 3 I/O.
int exit_code_for(ErrorKind kind);

}  // namespace wavespeed
