#pragma once

#include <stdexcept>
#include <string>

namespace adl {

// Bad arguments from the caller (dimension mismatch, out-of-range values).
class InvalidInput : public std::invalid_argument {
public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// A claimed property of a sampler / layer was observed to be false at runtime.
class ContractViolation : public std::runtime_error {
public:
  explicit ContractViolation(const std::string& what) : std::runtime_error(what) {}
};

// A configured resource budget (node count, recursion size) would be exceeded.
class ResourceError : public std::runtime_error {
public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed serialized data; `offset` is the byte position of the failure.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset(offset) {}
  std::size_t offset;
};

}  // namespace adl
