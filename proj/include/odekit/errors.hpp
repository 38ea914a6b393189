#pragma once

#include <stdexcept>
#include <string>

namespace odekit {

/// Incompatible operands (length or kind mismatch). This is a programming
/// error in the calling code, distinct from a numerical solver failure.
class shape_error : public std::logic_error {
public:
    explicit shape_error(const std::string& what) : std::logic_error(what) {}
};

/// Invalid object configuration detected at use (missing callback, wrong
/// solver pairing, bad table, ...).
class config_error : public std::logic_error {
public:
    explicit config_error(const std::string& what) : std::logic_error(what) {}
};

/// Reported numerical fault in a kernel (e.g. division by zero entry).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace odekit
