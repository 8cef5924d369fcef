#pragma once

#include <stdexcept>
#include <string>

namespace qhd {

/// Failure category, used by the CLI to emit a machine-readable error record.
enum class ErrorKind {
    invalid_argument,
    capacity_exceeded,
    dense_cap_exceeded,
    non_convergence,
    unknown_fragment,
    not_in_basis,
    dimension_mismatch,
    unrealizable_pattern,
    config,
    io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& what)
        : std::runtime_error(what), kind_(kind), module_(std::move(module)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

}  // namespace qhd
