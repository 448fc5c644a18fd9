#pragma once

#include <stdexcept>
#include <string>

namespace varisect {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent configuration input.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// An element was used with a manifest it does not belong to.
class ManifestError : public Error {
 public:
  explicit ManifestError(const std::string& msg) : Error(msg) {}
};

/// Compiler, linker, or external tool invocation failed.
class ToolchainError : public Error {
 public:
  explicit ToolchainError(const std::string& msg) : Error(msg) {}
};

/// A precondition of an operation was not met by the caller.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

}  // namespace varisect
