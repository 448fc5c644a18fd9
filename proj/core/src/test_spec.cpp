#include "varisect/test_spec.hpp"

#include "varisect/errors.hpp"

namespace varisect {

void TestSpec::validate() const {
  if (name.empty()) throw ConfigError("test spec without a name");
  if (inputs_per_run > 0) {
    if (default_input.empty() || default_input.size() % inputs_per_run != 0) {
      throw ConfigError("test '" + name + "': default_input length " +
                        std::to_string(default_input.size()) +
                        " is not a positive multiple of inputs_per_run " +
                        std::to_string(inputs_per_run));
    }
  }
  bool text_cmp = comparator.kind == ComparatorKind::ExactText;
  if (text_cmp != (result_kind == ResultKind::Text)) {
    throw ConfigError("test '" + name +
                      "': comparator kind does not fit result kind");
  }
}

std::vector<std::vector<double>> TestSpec::input_chunks() const {
  if (inputs_per_run == 0) return {{}};
  std::vector<std::vector<double>> chunks;
  for (std::size_t at = 0; at < default_input.size(); at += inputs_per_run) {
    chunks.emplace_back(default_input.begin() + at,
                        default_input.begin() + at + inputs_per_run);
  }
  return chunks;
}

}  // namespace varisect
