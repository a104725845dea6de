#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sqpo {

enum class ErrorKind {
    UnknownElement,
    IdCollision,
    MismatchedEndpoints,
    InvalidHomomorphism,
    NotMono,
    NotEpi,
    ContradictoryEdits,
    CycleIntroduced,
    CommutativityViolated,
    NoPath,
    FactorizationViolated,
    InstanceOfDeletedElement,
    ComposabilityViolated,
    RelationInconsistent,
    ResourceBoundExceeded,
    Parse,
    Io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; `kind()` distinguishes failure classes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace sqpo
