#pragma once

#include <stdexcept>
#include <string>

namespace gfsc {

// Invalid arguments or violated preconditions. The CLI maps this to exit code 1.
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// Filesystem trouble: missing files, unreadable or unwritable streams. Exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file contents; messages carry the file and 1-based row/column. Exit code 2.
class ParseError : public IoError {
public:
    explicit ParseError(const std::string& what) : IoError(what) {}
};

// Numerical breakdown: failed factorizations, non-convergent solvers. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gfsc
