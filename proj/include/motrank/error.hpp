#pragma once

#include <stdexcept>
#include <string>

namespace motrank {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid input supplied by the caller: bad files, mismatched headers,
/// out-of-range parameters. The CLI maps these to exit code 1.
class UserError : public Error {
public:
    explicit UserError(const std::string& what) : Error(what) {}
};

} // namespace motrank
