#include "varisect/element.hpp"

#include <algorithm>
#include <unordered_set>

#include "varisect/errors.hpp"

namespace varisect {

Element Element::file_of(std::string path) {
  Element e;
  e.kind = ElementKind::File;
  e.file = std::move(path);
  return e;
}

Element Element::symbol_of(std::string path, std::string name, bool exported,
                           std::string display) {
  Element e;
  e.kind = ElementKind::Symbol;
  e.file = std::move(path);
  e.symbol = std::move(name);
  e.exported = exported;
  e.display_name = std::move(display);
  return e;
}

std::string Element::key() const {
  std::string k = kind == ElementKind::File ? "F|" : "S|";
  k += file;
  k += '|';
  k += symbol;
  return k;
}

std::string Element::display() const {
  if (kind == ElementKind::File) return file;
  const std::string& name = display_name.empty() ? symbol : display_name;
  return file + ":" + name;
}

ElementSet::ElementSet(std::vector<Element> elements) {
  std::unordered_set<std::string> seen;
  elems_.reserve(elements.size());
  for (auto& e : elements) {
    if (seen.insert(e.key()).second) elems_.push_back(std::move(e));
  }
}

ElementSet::ElementSet(std::initializer_list<Element> elements)
    : ElementSet(std::vector<Element>(elements)) {}

bool ElementSet::contains(const Element& e) const {
  return index_of(e) != npos;
}

std::size_t ElementSet::index_of(const Element& e) const {
  auto it = std::find(elems_.begin(), elems_.end(), e);
  return it == elems_.end() ? npos
                            : static_cast<std::size_t>(it - elems_.begin());
}

ElementSet ElementSet::difference(const ElementSet& other) const {
  std::unordered_set<std::string> drop;
  for (const auto& e : other) drop.insert(e.key());
  std::vector<Element> out;
  out.reserve(elems_.size());
  for (const auto& e : elems_) {
    if (!drop.count(e.key())) out.push_back(e);
  }
  ElementSet result;
  result.elems_ = std::move(out);
  return result;
}

ElementSet ElementSet::concat(const ElementSet& tail) const {
  std::vector<Element> out = elems_;
  for (const auto& e : tail) {
    if (!contains(e)) out.push_back(e);
  }
  ElementSet result;
  result.elems_ = std::move(out);
  return result;
}

std::string ElementSet::key() const {
  std::vector<std::string> keys;
  keys.reserve(elems_.size());
  for (const auto& e : elems_) keys.push_back(e.key());
  std::sort(keys.begin(), keys.end());
  std::string joined;
  for (const auto& k : keys) {
    joined += k;
    joined += '\n';
  }
  return joined;
}

ElementSet canonicalize(const std::vector<Element>& elements,
                        const ElementSet& universe) {
  std::vector<std::size_t> positions;
  positions.reserve(elements.size());
  for (const auto& e : elements) {
    std::size_t pos = universe.index_of(e);
    if (pos == ElementSet::npos) {
      throw ManifestError("element not in manifest: " + e.display());
    }
    positions.push_back(pos);
  }
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()),
                  positions.end());
  std::vector<Element> ordered;
  ordered.reserve(positions.size());
  for (std::size_t pos : positions) ordered.push_back(universe[pos]);
  return ElementSet(std::move(ordered));
}

}  // namespace varisect
