#pragma once

#include <stdexcept>
#include <string>

namespace scpo {

// Bad input files, schema mismatches, degenerate data. CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite results the caller asked us to treat as fatal. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace scpo
