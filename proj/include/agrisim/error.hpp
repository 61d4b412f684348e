#pragma once

#include <stdexcept>
#include <string>

namespace agrisim {

/// Base for every error raised by the library. `field()` names the input
/// that caused the failure so front ends can print `ERROR <field>: <msg>`.
class Error : public std::runtime_error {
public:
    Error(std::string field, const std::string& message)
        : std::runtime_error(message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Argument outside the documented domain of a pure function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration (scenario file, policy, CLI flags).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace agrisim
