#pragma once

#include <stdexcept>

namespace needle {

/// A numerical invariant that the construction guarantees failed to hold
/// (for example no first zero of f, or a glued distance violating the
/// triangle inequality). Precondition violations use std::invalid_argument.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace needle
