#pragma once

#include <stdexcept>
#include <string>

namespace ikern {

/// Error taxonomy.  Everything derives from std::invalid_argument so callers
/// can catch broadly while tests and the CLI discriminate by concrete type.

/// Wrong count or out-of-range order/size parameter (k, n, trials, ...).
struct arity_error : std::invalid_argument {
    explicit arity_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Numeric argument outside the mathematical domain (negative evaluation
/// point, kernel parameter out of range, non-finite input).
struct domain_error : std::invalid_argument {
    explicit domain_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Input collapses onto a lower-dimensional boundary stratum where the
/// requested quantity is undefined (too few strictly positive entries).
struct degenerate_support_error : std::invalid_argument {
    explicit degenerate_support_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Incompatible product-space shapes.
struct shape_error : std::invalid_argument {
    explicit shape_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Bad variable index set (empty, repeated, or out of range).
struct index_error : std::invalid_argument {
    explicit index_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A measure that must be a probability is not (total mass off 1).
struct mass_error : std::invalid_argument {
    explicit mass_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Factor list cannot support the requested witness construction.
struct witness_error : std::invalid_argument {
    explicit witness_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Malformed external input (CSV rows, kernel JSON, asymmetric gram input).
struct input_error : std::invalid_argument {
    explicit input_error(const std::string& msg) : std::invalid_argument(msg) {}
};

} // namespace ikern
