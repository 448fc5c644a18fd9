#include "varisect/value.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "varisect/errors.hpp"
#include "varisect/score.hpp"

namespace varisect {

const char* to_string(ScoreMeta meta) {
  switch (meta) {
    case ScoreMeta::Measured: return "measured";
    case ScoreMeta::BuildFailure: return "build-failure";
    case ScoreMeta::RunFailure: return "run-failure";
  }
  return "?";
}

const char* to_string(ResultKind kind) {
  switch (kind) {
    case ResultKind::Scalar: return "Scalar";
    case ResultKind::Vector: return "Vector";
    case ResultKind::Text: return "Text";
  }
  return "?";
}

ResultKind result_kind_from_string(const std::string& name) {
  if (name == "Scalar") return ResultKind::Scalar;
  if (name == "Vector") return ResultKind::Vector;
  if (name == "Text") return ResultKind::Text;
  throw ConfigError("unknown result kind: " + name);
}

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_double(const std::string& token) {
  if (token.empty()) throw Error("empty floating-point token");
  const char* begin = token.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + token.size()) {
    throw Error("malformed floating-point token: '" + token + "'");
  }
  return v;
}

ResultKind TestValue::kind() const {
  if (std::holds_alternative<double>(payload_)) return ResultKind::Scalar;
  if (std::holds_alternative<std::vector<double>>(payload_)) {
    return ResultKind::Vector;
  }
  return ResultKind::Text;
}

std::vector<double> TestValue::numbers() const {
  switch (kind()) {
    case ResultKind::Scalar: return {scalar()};
    case ResultKind::Vector: return vector();
    case ResultKind::Text: throw Error("text value has no numeric view");
  }
  return {};
}

std::string TestValue::encode() const {
  std::string out;
  switch (kind()) {
    case ResultKind::Scalar:
      out = "SCALAR\n" + hex_double(scalar()) + "\n";
      break;
    case ResultKind::Vector: {
      out = "VECTOR " + std::to_string(vector().size()) + "\n";
      for (double v : vector()) {
        out += hex_double(v);
        out += '\n';
      }
      break;
    }
    case ResultKind::Text:
      out = "STRING " + std::to_string(text().size()) + "\n" + text();
      break;
  }
  return out;
}

namespace {

std::string take_line(const std::string& bytes, std::size_t& pos) {
  std::size_t nl = bytes.find('\n', pos);
  if (nl == std::string::npos) throw Error("wire record truncated");
  std::string line = bytes.substr(pos, nl - pos);
  pos = nl + 1;
  return line;
}

void expect_trailing_blank(const std::string& bytes, std::size_t pos) {
  for (; pos < bytes.size(); ++pos) {
    char c = bytes[pos];
    if (c != '\n' && c != '\r' && c != ' ' && c != '\t') {
      throw Error("unexpected bytes after wire record");
    }
  }
}

}  // namespace

TestValue TestValue::decode(const std::string& bytes) {
  std::size_t pos = 0;
  std::string header = take_line(bytes, pos);
  std::istringstream hs(header);
  std::string tag;
  hs >> tag;
  if (tag == "SCALAR") {
    double v = parse_double(take_line(bytes, pos));
    expect_trailing_blank(bytes, pos);
    return TestValue(v);
  }
  if (tag == "VECTOR") {
    std::size_t count = 0;
    if (!(hs >> count)) throw Error("VECTOR header missing length");
    std::vector<double> values;
    values.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      values.push_back(parse_double(take_line(bytes, pos)));
    }
    expect_trailing_blank(bytes, pos);
    return TestValue(std::move(values));
  }
  if (tag == "STRING") {
    std::size_t count = 0;
    if (!(hs >> count)) throw Error("STRING header missing byte count");
    if (bytes.size() - pos < count) throw Error("STRING payload truncated");
    std::string payload = bytes.substr(pos, count);
    expect_trailing_blank(bytes, pos + count);
    return TestValue(std::move(payload));
  }
  throw Error("unknown wire record tag: '" + tag + "'");
}

TestValue TestValue::concatenate(const std::vector<TestValue>& runs) {
  if (runs.empty()) throw Error("no runs to concatenate");
  if (runs.size() == 1) return runs.front();
  ResultKind kind = runs.front().kind();
  for (const auto& r : runs) {
    if (r.kind() != kind) throw Error("mixed result kinds across runs");
  }
  if (kind == ResultKind::Text) {
    std::string joined;
    for (const auto& r : runs) joined += r.text();
    return TestValue(std::move(joined));
  }
  std::vector<double> joined;
  for (const auto& r : runs) {
    auto nums = r.numbers();
    joined.insert(joined.end(), nums.begin(), nums.end());
  }
  return TestValue(std::move(joined));
}

}  // namespace varisect
