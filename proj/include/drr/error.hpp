#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drr {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed file header; `offset` is the byte position where parsing failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Payload does not agree with what the header declares.
class CorruptFile : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Source and pixel coincide, so the ray has no direction.
class DegenerateRay : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A similarity metric is not defined for its inputs (e.g. zero variance).
class MetricUndefined : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class GradientUndefined : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace drr
