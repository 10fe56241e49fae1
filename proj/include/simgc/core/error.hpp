#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace simgc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable on-disk data. Carries the file and byte offset.
class FormatError : public Error {
 public:
  FormatError(std::string file, std::uint64_t offset, const std::string& what)
      : Error(compose(file, offset, what)), file_(std::move(file)), offset_(offset) {}

  const std::string& file() const noexcept { return file_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  static std::string compose(const std::string& file, std::uint64_t offset,
                             const std::string& what) {
    std::ostringstream os;
    os << file << " @ byte " << offset << ": " << what;
    return os.str();
  }

  std::string file_;
  std::uint64_t offset_;
};

/// Shape mismatch, out-of-range index, bad argument.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Divergence, NaN/Inf, non-determinism detected during numerics.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Configuration document problems (unknown keys, bad values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

template <class... Args>
std::string concat(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace detail

template <class... Args>
inline void require(bool cond, const Args&... msg) {
  if (!cond) throw ValidationError(detail::concat(msg...));
}

}  // namespace simgc
