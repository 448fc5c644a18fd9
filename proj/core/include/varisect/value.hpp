#pragma once

#include <string>
#include <variant>
#include <vector>

namespace varisect {

enum class ResultKind { Scalar, Vector, Text };

/// A test outcome as produced by a test executable: one number, a vector of
/// numbers, or opaque text. Numeric payloads travel as C99 hexadecimal float
/// literals end to end so that bit-level differences survive serialization.
class TestValue {
 public:
  TestValue() : payload_(0.0) {}
  explicit TestValue(double scalar) : payload_(scalar) {}
  explicit TestValue(std::vector<double> vec) : payload_(std::move(vec)) {}
  explicit TestValue(std::string text) : payload_(std::move(text)) {}

  ResultKind kind() const;
  double scalar() const { return std::get<double>(payload_); }
  const std::vector<double>& vector() const {
    return std::get<std::vector<double>>(payload_);
  }
  const std::string& text() const { return std::get<std::string>(payload_); }

  bool operator==(const TestValue& other) const = default;

  /// Numeric components viewed as a flat list (scalar = length 1).
  std::vector<double> numbers() const;

  /// Serializes in the test-executable wire format:
  ///   SCALAR\n<hex>\n | VECTOR <n>\n<hex>...\n | STRING <bytes>\n<raw>
  std::string encode() const;
  /// Parses one wire record. Throws Error on malformed input.
  static TestValue decode(const std::string& bytes);

  /// Joins per-run values into one value: scalars from multiple runs widen
  /// to a vector, vectors concatenate, text concatenates. All runs must have
  /// the same kind. Throws Error on an empty list or mixed kinds.
  static TestValue concatenate(const std::vector<TestValue>& runs);

 private:
  std::variant<double, std::vector<double>, std::string> payload_;
};

/// Formats a double as a C99 hexadecimal literal ("%a").
std::string hex_double(double v);
/// Parses a floating-point literal (hex or decimal). Throws Error if the
/// token is not fully consumed.
double parse_double(const std::string& token);

const char* to_string(ResultKind kind);
ResultKind result_kind_from_string(const std::string& name);

}  // namespace varisect
