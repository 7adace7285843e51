#pragma once

// Groups with decidable canonical normal forms: free groups, free abelian
// groups, finite groups given by a multiplication table, and free products
// of these. Elements carry a canonical byte encoding, so equality and hashing
// are plain string operations.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "brwlab/errors.hpp"

namespace brwlab {

enum class GroupKind { Free, FreeAbelian, Finite, FreeProduct };

struct GroupSpec {
  GroupKind kind = GroupKind::Free;
  int rank = 2;                            // Free: q, FreeAbelian: d
  std::vector<std::vector<int>> table;     // Finite: table[a][b] = a*b, 0 = identity
  std::vector<int> finite_generators;      // Finite: positive generators (default: all)
  std::vector<GroupSpec> factors;          // FreeProduct
  std::vector<std::string> names;          // optional names of the positive generators
  std::string tag;                         // display label for finite groups

  static GroupSpec free_group(int q);
  static GroupSpec free_abelian(int d);
  static GroupSpec finite(std::vector<std::vector<int>> table);
  static GroupSpec cyclic(int k);
  static GroupSpec free_product(std::vector<GroupSpec> factors);

  /// Short human-readable label such as "F2*Z3" or "Z/2*Z/3".
  std::string label() const;

  bool operator==(const GroupSpec&) const = default;
};

class Element {
 public:
  Element() = default;
  explicit Element(std::string code) : code_(std::move(code)) {}

  const std::string& code() const { return code_; }
  bool operator==(const Element&) const = default;
  auto operator<=>(const Element&) const = default;

 private:
  std::string code_;
};

struct ElementHash {
  std::size_t operator()(const Element& x) const noexcept {
    return std::hash<std::string>{}(x.code());
  }
};

/// Sequence of generator indices into Group::generators().
using Word = std::vector<int>;

struct Generator {
  std::string name;   // printable name; capitalised name denotes the inverse
  Element element;
  int inverse = 0;    // index of the inverse generator (may be itself)
  int factor = -1;    // factor index for free products, -1 otherwise
  int local = 0;      // index inside the factor's own generator list
  bool positive = true;
};

/// One syllable of a free-product normal form.
struct Syllable {
  int factor = 0;
  Element element;  // element of the factor group (factor encoding)
};

class GroupImpl;

class Group {
 public:
  explicit Group(GroupSpec spec);

  const GroupSpec& spec() const;
  GroupKind kind() const;
  const std::vector<Generator>& generators() const;
  int generator_index(std::string_view name) const;  // -1 if unknown

  Element identity() const;
  bool is_identity(const Element& x) const { return x.code().empty(); }

  /// Canonical normal form of a generator word.
  Element normalize(const Word& word) const;
  Element multiply(const Element& a, const Element& b) const;
  Element multiply_generator(const Element& a, int gen) const;
  Element inverse(const Element& a) const;
  int word_length(const Element& a) const;

  /// Canonical geodesic: the normal form read left to right.
  Word geodesic(const Element& a) const;

  /// Printable generator word ("a B a", identity prints as "e").
  std::string format(const Element& a) const;
  std::string format_word(const Word& w) const;
  Word parse_word(std::string_view text) const;
  Element parse(std::string_view text) const { return normalize(parse_word(text)); }

  /// Exact, duplicate-free enumeration of S_n. Throws CapExceeded when the
  /// exact sphere size exceeds `cap`.
  std::vector<Element> sphere(int n, std::size_t cap = kDefaultSphereCap) const;
  std::vector<Element> ball(int n, std::size_t cap = kDefaultSphereCap) const;
  /// Exact |S_n| for n = 0..n_max (no enumeration).
  std::vector<double> sphere_sizes(int n_max) const;

  // Free products.
  int factor_count() const;
  const Group& factor(int i) const;
  std::vector<Syllable> syllables(const Element& a) const;
  Element from_syllables(const std::vector<Syllable>& s) const;
  Element embed(int factor, const Element& factor_element) const;

  // Variant-specific views.
  std::vector<int> letters(const Element& a) const;      // Free: letter codes
  std::vector<int> coordinates(const Element& a) const;  // FreeAbelian
  Element from_coordinates(const std::vector<int>& c) const;
  int finite_index(const Element& a) const;              // Finite
  Element from_finite_index(int i) const;

  static constexpr std::size_t kDefaultSphereCap = 50'000'000;

 private:
  std::shared_ptr<const GroupImpl> impl_;
  friend class GroupImpl;
};

}  // namespace brwlab
