#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace varisect {

enum class ElementKind { File, Symbol };

/// A unit of blame: a source file, or an exported function symbol within a
/// file. Identity is (kind, file, symbol); `exported` and `display_name`
/// are metadata and do not participate in equality.
struct Element {
  ElementKind kind = ElementKind::File;
  std::string file;          // project-relative path
  std::string symbol;        // mangled name; non-empty iff kind == Symbol
  bool exported = true;      // Symbol only: globally exported strong symbol
  std::string display_name;  // demangled form for reports, optional

  static Element file_of(std::string path);
  static Element symbol_of(std::string path, std::string name,
                           bool exported = true, std::string display = {});

  bool operator==(const Element& other) const {
    return kind == other.kind && file == other.file && symbol == other.symbol;
  }

  /// Stable identity string, used for set membership and memo keys.
  std::string key() const;
  /// Human-readable form: the file path, or "file:symbol" (demangled when
  /// available).
  std::string display() const;
};

/// An ordered, duplicate-free sequence of elements. The order is the
/// canonical order of whatever universe the set was drawn from (manifest
/// order for files, symbol-table order for symbols); every operation here
/// preserves it. Splitting and invocation counts are reproducible only
/// because this order is total and stable across runs.
class ElementSet {
 public:
  ElementSet() = default;
  /// Keeps first occurrences, preserving the given order.
  explicit ElementSet(std::vector<Element> elements);
  ElementSet(std::initializer_list<Element> elements);

  std::size_t size() const { return elems_.size(); }
  bool empty() const { return elems_.empty(); }
  const Element& operator[](std::size_t i) const { return elems_[i]; }
  auto begin() const { return elems_.begin(); }
  auto end() const { return elems_.end(); }
  const std::vector<Element>& elements() const { return elems_; }

  bool contains(const Element& e) const;
  /// Position of `e` in this set, or npos.
  std::size_t index_of(const Element& e) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Elements of this set not in `other`, in this set's order.
  ElementSet difference(const ElementSet& other) const;
  /// This set followed by the elements of `tail` not already present.
  /// When `tail` follows this set in canonical order (as in a bisection
  /// split), the result is canonical too.
  ElementSet concat(const ElementSet& tail) const;

  bool operator==(const ElementSet& other) const = default;

  /// Order-insensitive identity key for memoization.
  std::string key() const;

 private:
  std::vector<Element> elems_;
};

/// Orders `elements` by their position in `universe` and removes duplicates.
/// Idempotent and insensitive to input order. Throws ManifestError when an
/// element is not a member of the universe.
ElementSet canonicalize(const std::vector<Element>& elements,
                        const ElementSet& universe);

}  // namespace varisect
