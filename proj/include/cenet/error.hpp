#pragma once

#include <stdexcept>
#include <string>

namespace cenet {

// Invalid or inconsistent configuration. CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or unreadable data files. CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

// Two inputs that must agree (counts, shapes, class numbers) do not.
class ConsistencyError : public DataError {
public:
    using DataError::DataError;
};

// Requested device or runtime facility is unavailable. CLI exit code 3.
class EnvironmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cenet
