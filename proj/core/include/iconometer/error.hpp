#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iconometer {

// Precondition broken by the caller (wrong shapes, out-of-range arguments).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Input data that is well-formed but unusable for the requested computation.
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmbeddingFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unparseable text input. Carries the location of the first problem.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t line, std::size_t byte_offset)
      : std::runtime_error(what), line_(line), byte_offset_(byte_offset) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t line_;
  std::size_t byte_offset_;
};

}  // namespace iconometer
