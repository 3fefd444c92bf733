#pragma once

#include <stdexcept>
#include <string>

namespace sa3d {

enum class ErrorKind {
    InvalidShape,       // ArchShape field < 1 or d0_k not divisible by d_p
    UnsupportedTier,    // fmax outside the DDR tier table
    InvalidPlan,        // blocking override rejected
    InvalidProblem,     // problem dimensions violate blocking divisibility
    DimensionMismatch,
    LayoutMismatch,
    IndivisiblePartition,
    InvalidArgument,
    Io,
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

}  // namespace sa3d
