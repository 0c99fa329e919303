#pragma once

#include <stdexcept>
#include <string>

namespace gkc {

// Bad arguments: mismatched dimensions, out-of-domain parameters, unknown names.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// Operation requested for a loss that does not support it (e.g. hinge curvature).
class UnsupportedLoss : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// Solver or quadrature could not meet its tolerance.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gkc
