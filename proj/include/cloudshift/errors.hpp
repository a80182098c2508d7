#pragma once

#include <stdexcept>
#include <string>

namespace cloudshift {

enum class ErrorKind {
    parse,
    invalid_model,
    invalid_argument,
    conflict,
    not_found,
    connection,
    cap_exceeded,
    length_violation,
    checksum_mismatch,
    unauthorized,
    io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Hard failure. Soft findings (mapping violations, validation violations)
/// are returned as lists instead of thrown.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, std::string message) {
    throw Error(kind, std::move(message));
}

}  // namespace cloudshift
