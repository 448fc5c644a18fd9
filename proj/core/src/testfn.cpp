#include "varisect/testfn.hpp"

namespace varisect {

namespace {

std::string display_of(const ElementSet& set) {
  std::string out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i) out += ", ";
    out += set[i].display();
  }
  return out;
}

}  // namespace

const TestScore& MemoizedTest::evaluate(const ElementSet& set) {
  ++total_;
  if (set.empty()) return empty_score_;
  auto key = set.key();
  auto it = memo_.find(key);
  if (it == memo_.end()) {
    TestScore score = backend_(set);
    ++distinct_;
    it = memo_.emplace(std::move(key), std::move(score)).first;
  }
  return it->second;
}

const TestScore& MemoizedTest::operator()(const ElementSet& set) {
  const TestScore& score = evaluate(set);
  if (score.failed()) throw TestFailure(score, display_of(set));
  return score;
}

}  // namespace varisect
