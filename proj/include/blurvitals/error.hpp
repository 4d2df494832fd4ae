#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace blurvitals {

/// Broad failure class; the CLI maps each to an exit code.
enum class ErrorKind { validation, data, io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Bad configuration or arguments, detected before any work is done.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

/// Input data that cannot be used (corrupt, truncated, too short).
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class FormatError : public DataError {
public:
    explicit FormatError(const std::string& what) : DataError("format error: " + what) {}
};

class TruncationError : public DataError {
public:
    explicit TruncationError(std::size_t frame_index)
        : DataError("truncated payload: frame " + std::to_string(frame_index) + " is incomplete"),
          frame_index_(frame_index) {}
    std::size_t frame_index() const noexcept { return frame_index_; }

private:
    std::size_t frame_index_;
};

class InsufficientDataError : public DataError {
public:
    InsufficientDataError(const std::string& what, std::size_t required)
        : DataError(what + " (need at least " + std::to_string(required) + " samples)"),
          required_(required) {}
    std::size_t required() const noexcept { return required_; }

private:
    std::size_t required_;
};

class IoError : public Error {
public:
    IoError(const std::filesystem::path& path, const std::string& what)
        : Error(ErrorKind::io, path.string() + ": " + what), path_(path) {}
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::validation: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::io: return 4;
    }
    return 1;
}

} // namespace blurvitals
