#include "varisect/comparator.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <vector>

#include "varisect/errors.hpp"

namespace varisect {

const char* to_string(ComparatorKind kind) {
  switch (kind) {
    case ComparatorKind::AbsDiff: return "AbsDiff";
    case ComparatorKind::L2Diff: return "L2Diff";
    case ComparatorKind::RelL2Diff: return "RelL2Diff";
    case ComparatorKind::ExactText: return "ExactText";
  }
  return "?";
}

ComparatorKind comparator_kind_from_string(const std::string& name) {
  if (name == "AbsDiff") return ComparatorKind::AbsDiff;
  if (name == "L2Diff") return ComparatorKind::L2Diff;
  if (name == "RelL2Diff") return ComparatorKind::RelL2Diff;
  if (name == "ExactText") return ComparatorKind::ExactText;
  throw ConfigError("unknown comparator kind: " + name);
}

double round_significant(double v, int digits) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", digits - 1, v);
  return std::strtod(buf, nullptr);
}

namespace {

bool bitwise_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bitwise_equal(a[i], b[i])) return false;
  }
  return true;
}

// A metric value must be a non-negative real; differences involving NaN or
// infinities collapse to a huge finite magnitude.
double sanitize(double score) {
  if (std::isnan(score) || std::isinf(score)) {
    return std::numeric_limits<double>::max();
  }
  return std::fabs(score);
}

std::vector<double> truncated(const std::vector<double>& xs,
                              const std::optional<int>& digits) {
  if (!digits) return xs;
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(round_significant(x, *digits));
  return out;
}

}  // namespace

TestScore compare_values(const TestValue& baseline, const TestValue& candidate,
                         const Comparator& cmp) {
  if (cmp.kind == ComparatorKind::ExactText) {
    if (baseline.kind() != ResultKind::Text ||
        candidate.kind() != ResultKind::Text) {
      return TestScore::run_failure("ExactText comparator on non-text values");
    }
    return TestScore::measured_value(baseline.text() == candidate.text() ? 0.0
                                                                         : 1.0);
  }

  if (baseline.kind() == ResultKind::Text ||
      candidate.kind() == ResultKind::Text) {
    return TestScore::run_failure("numeric comparator on text value");
  }
  if (baseline.kind() != candidate.kind()) {
    return TestScore::run_failure(
        std::string("result kind mismatch: baseline ") +
        to_string(baseline.kind()) + " vs candidate " +
        to_string(candidate.kind()));
  }

  std::vector<double> b = truncated(baseline.numbers(), cmp.digits);
  std::vector<double> c = truncated(candidate.numbers(), cmp.digits);
  if (b.size() != c.size()) {
    return TestScore::run_failure(
        "vector length mismatch: baseline " + std::to_string(b.size()) +
        " vs candidate " + std::to_string(c.size()));
  }
  if (bitwise_equal(b, c)) return TestScore::measured_value(0.0);

  switch (cmp.kind) {
    case ComparatorKind::AbsDiff: {
      double worst = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        worst = std::max(worst, sanitize(b[i] - c[i]));
      }
      return TestScore::measured_value(worst);
    }
    case ComparatorKind::L2Diff:
    case ComparatorKind::RelL2Diff: {
      double sq = 0.0;
      double base_sq = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        double d = b[i] - c[i];
        sq += d * d;
        base_sq += b[i] * b[i];
      }
      double l2 = std::sqrt(sq);
      if (cmp.kind == ComparatorKind::L2Diff) {
        return TestScore::measured_value(sanitize(l2));
      }
      double base_norm = std::sqrt(base_sq);
      if (base_norm == 0.0) {
        if (l2 == 0.0) return TestScore::measured_value(0.0);
        return TestScore::run_failure(
            "RelL2Diff undefined: baseline norm is zero with nonzero "
            "difference");
      }
      return TestScore::measured_value(sanitize(l2 / base_norm));
    }
    case ComparatorKind::ExactText:
      break;  // handled above
  }
  return TestScore::run_failure("unreachable comparator kind");
}

}  // namespace varisect
