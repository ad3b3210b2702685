#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace editioner {

// Exit codes are a scripting contract: 2 configuration, 3 data, 4 I/O.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 3; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

class FormatError : public Error {
public:
    using Error::Error;
};

class DimError : public Error {
public:
    using Error::Error;
};

class IntegrityError : public Error {
public:
    using Error::Error;
};

class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Non-finite or otherwise unusable numeric content. Carries the offending
/// position when one is known.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(what) {}
    DataError(const std::string& what, std::size_t row, std::optional<std::size_t> col = std::nullopt)
        : Error(what + " (row " + std::to_string(row) +
                (col ? ", col " + std::to_string(*col) : std::string{}) + ")"),
          row_(row), col_(col) {}

    std::optional<std::size_t> row() const noexcept { return row_; }
    std::optional<std::size_t> col() const noexcept { return col_; }

private:
    std::optional<std::size_t> row_;
    std::optional<std::size_t> col_;
};

/// The input has (numerically) no component inside the subspace.
class OrthogonalInputError : public Error {
public:
    using Error::Error;
};

}  // namespace editioner
