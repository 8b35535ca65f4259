#ifndef CONCL_ERRORS_HPP
#define CONCL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace concl {

/// Base class for all library errors.
struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed caller input: shape mismatches, non-finite values, bad parameters.
struct invalid_input : error {
    explicit invalid_input(const std::string& what) : error(what) {}
};

/// A documented precondition of an operation was violated.
struct contract_violation : error {
    explicit contract_violation(const std::string& what) : error(what) {}
};

/// Numerical blow-up detected during time integration.
struct blowup_error : error {
    explicit blowup_error(const std::string& what) : error(what) {}
};

/// Fixed-point horizon too long: the iteration is not contracting.
struct horizon_error : error {
    explicit horizon_error(const std::string& what) : error(what) {}
};

/// Problem size outside the supported range (oracles are deliberately small).
struct size_error : invalid_input {
    explicit size_error(const std::string& what) : invalid_input(what) {}
};

} // namespace concl

#endif
