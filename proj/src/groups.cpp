#include "brwlab/groups.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <deque>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace brwlab {

// ---------------------------------------------------------------- specs

GroupSpec GroupSpec::free_group(int q) {
  GroupSpec s;
  s.kind = GroupKind::Free;
  s.rank = q;
  return s;
}

GroupSpec GroupSpec::free_abelian(int d) {
  GroupSpec s;
  s.kind = GroupKind::FreeAbelian;
  s.rank = d;
  return s;
}

GroupSpec GroupSpec::finite(std::vector<std::vector<int>> table) {
  GroupSpec s;
  s.kind = GroupKind::Finite;
  s.rank = 0;
  s.table = std::move(table);
  return s;
}

GroupSpec GroupSpec::cyclic(int k) {
  if (k < 2) throw ValidationError("cyclic group needs order >= 2");
  std::vector<std::vector<int>> t(k, std::vector<int>(k));
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) t[a][b] = (a + b) % k;
  GroupSpec s = finite(std::move(t));
  s.finite_generators = {1};
  s.tag = "Z/" + std::to_string(k);
  return s;
}

GroupSpec GroupSpec::free_product(std::vector<GroupSpec> factors) {
  GroupSpec s;
  s.kind = GroupKind::FreeProduct;
  s.rank = 0;
  s.factors = std::move(factors);
  return s;
}

std::string GroupSpec::label() const {
  switch (kind) {
    case GroupKind::Free:
      return "F" + std::to_string(rank);
    case GroupKind::FreeAbelian:
      return rank == 1 ? std::string("Z") : "Z" + std::to_string(rank);
    case GroupKind::Finite:
      return tag.empty() ? "Fin" + std::to_string(table.size()) : tag;
    case GroupKind::FreeProduct: {
      std::string out;
      for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) out += "*";
        out += factors[i].label();
      }
      return out;
    }
  }
  return "?";
}

// ---------------------------------------------------------------- helpers

namespace {

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

void put_u16(std::string& out, unsigned v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

unsigned get_u16(const std::string& s, std::size_t pos) {
  return static_cast<unsigned char>(s[pos]) | (static_cast<unsigned>(static_cast<unsigned char>(s[pos + 1])) << 8);
}

const char* kFreeLetters = "abcdfghijklmnopqrsuvwxyz";
const char* kAbelianLetters[] = {"x", "y", "z", "w", "u", "v"};

void check_cap(double size, std::size_t cap, const char* what) {
  if (size > static_cast<double>(cap)) {
    std::ostringstream os;
    os << what << ": estimated size " << size << " exceeds cap " << cap;
    throw CapExceeded(os.str(), size);
  }
}

}  // namespace

// ---------------------------------------------------------------- impl base

class GroupImpl {
 public:
  virtual ~GroupImpl() = default;

  GroupSpec spec;
  std::vector<Generator> gens;
  std::unordered_map<std::string, int> name_index;

  virtual Element multiply(const Element& a, const Element& b) const = 0;
  virtual Element multiply_generator(const Element& a, int gen) const = 0;
  virtual Element inverse(const Element& a) const = 0;
  virtual int word_length(const Element& a) const = 0;
  virtual Word geodesic(const Element& a) const = 0;
  virtual std::vector<double> sphere_sizes(int n_max) const = 0;
  virtual void enumerate_sphere(int n, std::vector<Element>& out) const = 0;

  void index_names() {
    name_index.clear();
    for (std::size_t i = 0; i < gens.size(); ++i) {
      if (gens[i].name.empty()) throw ValidationError("generator without a name");
      if (!std::islower(static_cast<unsigned char>(gens[i].name[0])) && gens[i].positive)
        throw ValidationError("generator names must start with a lowercase letter: " + gens[i].name);
      name_index.emplace(gens[i].name, static_cast<int>(i));
    }
    // capitalised positive names always resolve to the inverse generator
    for (std::size_t i = 0; i < gens.size(); ++i)
      if (gens[i].positive) name_index[capitalize(gens[i].name)] = gens[i].inverse;
  }
};

namespace {

// ---------------------------------------------------------------- free group

class FreeImpl final : public GroupImpl {
 public:
  explicit FreeImpl(const GroupSpec& s) {
    if (s.rank < 2) throw ValidationError("free group rank must be >= 2");
    if (s.rank > 127) throw ValidationError("free group rank too large");
    spec = s;
    const int q = s.rank;
    for (int i = 0; i < q; ++i) {
      std::string name;
      if (i < static_cast<int>(s.names.size())) name = s.names[i];
      else if (q <= 24) name = std::string(1, kFreeLetters[i]);
      else name = "g" + std::to_string(i + 1);
      Generator g;
      g.name = name;
      g.element = Element(std::string(1, static_cast<char>(2 * i)));
      g.inverse = 2 * i + 1;
      g.local = 2 * i;
      g.positive = true;
      Generator h;
      h.name = capitalize(name);
      h.element = Element(std::string(1, static_cast<char>(2 * i + 1)));
      h.inverse = 2 * i;
      h.local = 2 * i + 1;
      h.positive = false;
      gens.push_back(g);
      gens.push_back(h);
    }
    index_names();
  }

  Element multiply(const Element& a, const Element& b) const override {
    const std::string& x = a.code();
    const std::string& y = b.code();
    std::size_t k = 0;
    while (k < x.size() && k < y.size() && (x[x.size() - 1 - k] ^ 1) == y[k]) ++k;
    std::string out;
    out.reserve(x.size() + y.size() - 2 * k);
    out.append(x, 0, x.size() - k);
    out.append(y, k, std::string::npos);
    return Element(std::move(out));
  }

  Element multiply_generator(const Element& a, int gen) const override {
    std::string s = a.code();
    const char c = static_cast<char>(gen);
    if (!s.empty() && (s.back() ^ 1) == c) s.pop_back();
    else s.push_back(c);
    return Element(std::move(s));
  }

  Element inverse(const Element& a) const override {
    std::string s(a.code().rbegin(), a.code().rend());
    for (char& c : s) c ^= 1;
    return Element(std::move(s));
  }

  int word_length(const Element& a) const override { return static_cast<int>(a.code().size()); }

  Word geodesic(const Element& a) const override {
    Word w;
    w.reserve(a.code().size());
    for (char c : a.code()) w.push_back(static_cast<unsigned char>(c));
    return w;
  }

  std::vector<double> sphere_sizes(int n_max) const override {
    std::vector<double> s(n_max + 1, 0.0);
    const double k = 2.0 * spec.rank;
    s[0] = 1;
    for (int n = 1; n <= n_max; ++n) s[n] = k * std::pow(k - 1, n - 1);
    return s;
  }

  void enumerate_sphere(int n, std::vector<Element>& out) const override {
    const int k = 2 * spec.rank;
    std::string cur(n, '\0');
    if (n == 0) {
      out.emplace_back();
      return;
    }
    // odometer over reduced words in lexicographic letter order
    std::vector<int> digit(n, 0);
    int depth = 0;
    digit[0] = 0;
    while (depth >= 0) {
      if (digit[depth] >= k) {
        --depth;
        if (depth >= 0) ++digit[depth];
        continue;
      }
      if (depth > 0 && (digit[depth] ^ 1) == digit[depth - 1]) {
        ++digit[depth];
        continue;
      }
      cur[depth] = static_cast<char>(digit[depth]);
      if (depth == n - 1) {
        out.emplace_back(cur);
        ++digit[depth];
      } else {
        ++depth;
        digit[depth] = 0;
      }
    }
  }
};

// ---------------------------------------------------------------- free abelian

class AbelianImpl final : public GroupImpl {
 public:
  explicit AbelianImpl(const GroupSpec& s) {
    if (s.rank < 1) throw ValidationError("free abelian dimension must be >= 1");
    spec = s;
    d = s.rank;
    for (int i = 0; i < d; ++i) {
      std::string name;
      if (i < static_cast<int>(s.names.size())) name = s.names[i];
      else if (d == 1) name = "t";
      else if (d <= 6) name = kAbelianLetters[i];
      else name = "x" + std::to_string(i + 1);
      std::vector<int> c(d, 0);
      c[i] = 1;
      Generator g;
      g.name = name;
      g.element = encode(c);
      g.inverse = 2 * i + 1;
      g.local = 2 * i;
      c[i] = -1;
      Generator h;
      h.name = capitalize(name);
      h.element = encode(c);
      h.inverse = 2 * i;
      h.local = 2 * i + 1;
      h.positive = false;
      gens.push_back(g);
      gens.push_back(h);
    }
    index_names();
  }

  int d = 1;

  Element encode(const std::vector<int>& c) const {
    if (std::all_of(c.begin(), c.end(), [](int v) { return v == 0; })) return Element();
    std::string s(4 * c.size(), '\0');
    std::memcpy(s.data(), c.data(), 4 * c.size());
    return Element(std::move(s));
  }

  std::vector<int> decode(const Element& a) const {
    std::vector<int> c(d, 0);
    if (!a.code().empty()) std::memcpy(c.data(), a.code().data(), 4 * d);
    return c;
  }

  Element multiply(const Element& a, const Element& b) const override {
    auto x = decode(a);
    auto y = decode(b);
    for (int i = 0; i < d; ++i) x[i] += y[i];
    return encode(x);
  }

  Element multiply_generator(const Element& a, int gen) const override {
    auto x = decode(a);
    x[gen / 2] += (gen % 2 == 0) ? 1 : -1;
    return encode(x);
  }

  Element inverse(const Element& a) const override {
    auto x = decode(a);
    for (int& v : x) v = -v;
    return encode(x);
  }

  int word_length(const Element& a) const override {
    int n = 0;
    for (int v : decode(a)) n += std::abs(v);
    return n;
  }

  Word geodesic(const Element& a) const override {
    Word w;
    auto x = decode(a);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < std::abs(x[i]); ++k) w.push_back(2 * i + (x[i] < 0 ? 1 : 0));
    return w;
  }

  std::vector<double> sphere_sizes(int n_max) const override {
    // |S_n| = sum_k 2^k C(d,k) C(n-1,k-1)
    std::vector<double> s(n_max + 1, 0.0);
    s[0] = 1;
    for (int n = 1; n <= n_max; ++n) {
      double total = 0;
      for (int k = 1; k <= std::min(n, d); ++k) {
        double c1 = std::exp(std::lgamma(d + 1.0) - std::lgamma(k + 1.0) - std::lgamma(d - k + 1.0));
        double c2 = std::exp(std::lgamma(n * 1.0) - std::lgamma(k * 1.0) - std::lgamma(n - k + 1.0));
        total += std::ldexp(1.0, k) * c1 * c2;
      }
      s[n] = std::round(total);
    }
    return s;
  }

  void enumerate_sphere(int n, std::vector<Element>& out) const override {
    std::vector<int> c(d, 0);
    fill(0, n, c, out);
  }

 private:
  void fill(int i, int remaining, std::vector<int>& c, std::vector<Element>& out) const {
    if (i == d - 1) {
      if (remaining == 0) {
        c[i] = 0;
        out.push_back(encode(c));
      } else {
        c[i] = remaining;
        out.push_back(encode(c));
        c[i] = -remaining;
        out.push_back(encode(c));
      }
      c[i] = 0;
      return;
    }
    for (int v = -remaining; v <= remaining; ++v) {
      c[i] = v;
      fill(i + 1, remaining - std::abs(v), c, out);
    }
    c[i] = 0;
  }
};

// ---------------------------------------------------------------- finite

class FiniteImpl final : public GroupImpl {
 public:
  explicit FiniteImpl(const GroupSpec& s) {
    spec = s;
    k = static_cast<int>(s.table.size());
    if (k < 1) throw ValidationError("finite group table is empty");
    if (k > 65535) throw ValidationError("finite group too large");
    for (const auto& row : s.table) {
      if (static_cast<int>(row.size()) != k) throw ValidationError("multiplication table is not square");
      for (int v : row)
        if (v < 0 || v >= k) throw ValidationError("multiplication table entry out of range");
    }
    const auto& t = s.table;
    for (int a = 0; a < k; ++a)
      if (t[0][a] != a || t[a][0] != a) throw ValidationError("element 0 is not the identity of the table");
    inv.assign(k, -1);
    for (int a = 0; a < k; ++a) {
      std::vector<char> seen(k, 0);
      for (int b = 0; b < k; ++b) {
        if (seen[t[a][b]]) throw ValidationError("multiplication table row is not a permutation");
        seen[t[a][b]] = 1;
        if (t[a][b] == 0) inv[a] = b;
      }
    }
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        for (int c = 0; c < k; ++c)
          if (t[t[a][b]][c] != t[a][t[b][c]]) throw ValidationError("multiplication table is not associative");

    std::vector<int> pos = s.finite_generators;
    if (pos.empty())
      for (int a = 1; a < k; ++a) pos.push_back(a);
    std::vector<int> gen_of(k, -1);
    std::vector<int> order;
    for (int g : pos) {
      if (g <= 0 || g >= k) throw ValidationError("finite generator must be a non-identity element");
      if (gen_of[g] != -1) continue;
      gen_of[g] = -2;
      order.push_back(g);
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
      const int g = order[i];
      std::string name;
      if (i < s.names.size()) name = s.names[i];
      else if (k == 2) name = "s";
      else name = "s" + std::to_string(g);
      Generator gen;
      gen.name = name;
      gen.element = encode(g);
      gen.local = static_cast<int>(gens.size());
      gen.positive = true;
      gen_of[g] = static_cast<int>(gens.size());
      gens.push_back(gen);
    }
    const std::size_t npos = gens.size();
    for (std::size_t i = 0; i < npos; ++i) {
      const int g = order[i];
      const int gi = inv[g];
      if (gen_of[gi] >= 0) {
        gens[i].inverse = gen_of[gi];
      } else {
        Generator h;
        h.name = capitalize(gens[i].name);
        h.element = encode(gi);
        h.inverse = static_cast<int>(i);
        h.local = static_cast<int>(gens.size());
        h.positive = false;
        gen_of[gi] = static_cast<int>(gens.size());
        gens[i].inverse = static_cast<int>(gens.size());
        gens.push_back(h);
      }
    }
    gen_elem.resize(gens.size());
    for (std::size_t i = 0; i < gens.size(); ++i) gen_elem[i] = index(gens[i].element);

    // BFS for word lengths and canonical geodesics
    dist.assign(k, -1);
    parent_gen.assign(k, -1);
    parent.assign(k, -1);
    dist[0] = 0;
    std::deque<int> queue{0};
    layers.push_back({0});
    while (!queue.empty()) {
      int a = queue.front();
      queue.pop_front();
      for (std::size_t g = 0; g < gens.size(); ++g) {
        int b = t[a][gen_elem[g]];
        if (dist[b] < 0) {
          dist[b] = dist[a] + 1;
          parent[b] = a;
          parent_gen[b] = static_cast<int>(g);
          if (static_cast<int>(layers.size()) <= dist[b]) layers.emplace_back();
          layers[dist[b]].push_back(b);
          queue.push_back(b);
        }
      }
    }
    for (int a = 0; a < k; ++a)
      if (dist[a] < 0) throw ValidationError("finite generators do not generate the group");
    index_names();
  }

  int k = 1;
  std::vector<int> inv, gen_elem, dist, parent, parent_gen;
  std::vector<std::vector<int>> layers;

  static Element encode(int a) {
    if (a == 0) return Element();
    std::string s;
    put_u16(s, static_cast<unsigned>(a));
    return Element(std::move(s));
  }
  static int index(const Element& a) { return a.code().empty() ? 0 : static_cast<int>(get_u16(a.code(), 0)); }

  Element multiply(const Element& a, const Element& b) const override {
    return encode(spec.table[index(a)][index(b)]);
  }
  Element multiply_generator(const Element& a, int gen) const override {
    return encode(spec.table[index(a)][gen_elem[gen]]);
  }
  Element inverse(const Element& a) const override { return encode(inv[index(a)]); }
  int word_length(const Element& a) const override { return dist[index(a)]; }

  Word geodesic(const Element& a) const override {
    Word w;
    for (int x = index(a); x != 0; x = parent[x]) w.push_back(parent_gen[x]);
    std::reverse(w.begin(), w.end());
    return w;
  }

  std::vector<double> sphere_sizes(int n_max) const override {
    std::vector<double> s(n_max + 1, 0.0);
    for (int n = 0; n <= n_max && n < static_cast<int>(layers.size()); ++n) s[n] = static_cast<double>(layers[n].size());
    return s;
  }

  void enumerate_sphere(int n, std::vector<Element>& out) const override {
    if (n >= static_cast<int>(layers.size())) return;
    for (int a : layers[n]) out.push_back(encode(a));
  }
};

// ---------------------------------------------------------------- free product

class ProductImpl final : public GroupImpl {
 public:
  explicit ProductImpl(const GroupSpec& s) {
    spec = s;
    spec.factors.clear();
    flatten(s);
    if (spec.factors.size() < 2) throw ValidationError("free product needs at least two factors");
    if (spec.factors.size() > 255) throw ValidationError("too many free factors");
    for (const auto& f : spec.factors) factors.emplace_back(f);

    std::unordered_map<std::string, int> used;
    for (std::size_t f = 0; f < factors.size(); ++f)
      for (const auto& g : factors[f].generators())
        if (g.positive) ++used[g.name];
    std::size_t next_name = 0;
    for (std::size_t f = 0; f < factors.size(); ++f) {
      const auto& fg = factors[f].generators();
      const int base = static_cast<int>(gens.size());
      for (std::size_t i = 0; i < fg.size(); ++i) {
        Generator g = fg[i];
        if (g.positive) {
          if (next_name < s.names.size()) g.name = s.names[next_name];
          else if (used[g.name] > 1) g.name += std::to_string(f);
          ++next_name;
        }
        g.element = embed(static_cast<int>(f), fg[i].element);
        g.inverse = base + fg[i].inverse;
        g.factor = static_cast<int>(f);
        g.local = static_cast<int>(i);
        gens.push_back(g);
      }
    }
    for (std::size_t i = 0; i < gens.size(); ++i)
      if (!gens[i].positive) gens[i].name = capitalize(gens[gens[i].inverse].name);
    index_names();
  }

  std::vector<Group> factors;

  void flatten(const GroupSpec& s) {
    for (const auto& f : s.factors) {
      if (f.kind == GroupKind::FreeProduct) flatten(f);
      else spec.factors.push_back(f);
    }
  }

  static Element embed(int f, const Element& x) {
    if (x.code().empty()) return Element();
    std::string s;
    s.push_back(static_cast<char>(f));
    put_u16(s, static_cast<unsigned>(x.code().size()));
    s += x.code();
    return Element(std::move(s));
  }

  static std::vector<Syllable> split(const Element& a) {
    std::vector<Syllable> out;
    const std::string& s = a.code();
    std::size_t pos = 0;
    while (pos < s.size()) {
      const int f = static_cast<unsigned char>(s[pos]);
      const unsigned len = get_u16(s, pos + 1);
      out.push_back({f, Element(s.substr(pos + 3, len))});
      pos += 3 + len;
    }
    return out;
  }

  static Element join(const std::vector<Syllable>& syl) {
    std::string s;
    for (const auto& x : syl) {
      if (x.element.code().empty()) continue;
      s.push_back(static_cast<char>(x.factor));
      put_u16(s, static_cast<unsigned>(x.element.code().size()));
      s += x.element.code();
    }
    return Element(std::move(s));
  }

  Element multiply(const Element& a, const Element& b) const override {
    auto x = split(a);
    auto y = split(b);
    std::size_t j = 0;
    while (!x.empty() && j < y.size() && x.back().factor == y[j].factor) {
      Element m = factors[x.back().factor].multiply(x.back().element, y[j].element);
      ++j;
      if (m.code().empty()) {
        x.pop_back();
      } else {
        x.back().element = std::move(m);
        break;
      }
    }
    for (; j < y.size(); ++j) x.push_back(y[j]);
    return join(x);
  }

  Element multiply_generator(const Element& a, int gen) const override {
    const Generator& g = gens[gen];
    const std::string& s = a.code();
    // locate the last syllable
    std::size_t pos = 0, last = std::string::npos;
    while (pos < s.size()) {
      last = pos;
      pos += 3 + get_u16(s, pos + 1);
    }
    if (last != std::string::npos && static_cast<unsigned char>(s[last]) == g.factor) {
      Element tail(s.substr(last + 3));
      Element m = factors[g.factor].multiply_generator(tail, g.local);
      std::string out = s.substr(0, last);
      if (!m.code().empty()) {
        out.push_back(static_cast<char>(g.factor));
        put_u16(out, static_cast<unsigned>(m.code().size()));
        out += m.code();
      }
      return Element(std::move(out));
    }
    return Element(s + embed(g.factor, factors[g.factor].generators()[g.local].element).code());
  }

  Element inverse(const Element& a) const override {
    auto x = split(a);
    std::reverse(x.begin(), x.end());
    for (auto& y : x) y.element = factors[y.factor].inverse(y.element);
    return join(x);
  }

  int word_length(const Element& a) const override {
    int n = 0;
    for (const auto& y : split(a)) n += factors[y.factor].word_length(y.element);
    return n;
  }

  int generator_offset(int f) const {
    int base = 0;
    for (int i = 0; i < f; ++i) base += static_cast<int>(factors[i].generators().size());
    return base;
  }

  Word geodesic(const Element& a) const override {
    Word w;
    for (const auto& y : split(a)) {
      const int base = generator_offset(y.factor);
      for (int g : factors[y.factor].geodesic(y.element)) w.push_back(base + g);
    }
    return w;
  }

  std::vector<double> sphere_sizes(int n_max) const override {
    const std::size_t k = factors.size();
    std::vector<std::vector<double>> fs(k);
    for (std::size_t f = 0; f < k; ++f) fs[f] = factors[f].sphere_sizes(n_max);
    // ending[f][n]: normal forms of length n whose last syllable lies in factor f
    std::vector<std::vector<double>> ending(k, std::vector<double>(n_max + 1, 0.0));
    std::vector<double> total(n_max + 1, 0.0);
    total[0] = 1;
    for (int n = 1; n <= n_max; ++n) {
      for (std::size_t f = 0; f < k; ++f) {
        double acc = 0;
        for (int l = 1; l <= n; ++l) {
          if (fs[f][l] == 0) continue;
          double prev = (n - l == 0) ? 1.0 : total[n - l] - ending[f][n - l];
          acc += fs[f][l] * prev;
        }
        ending[f][n] = acc;
        total[n] += acc;
      }
    }
    return total;
  }

  void enumerate_sphere(int n, std::vector<Element>& out) const override {
    std::vector<std::vector<std::vector<Element>>> cache(factors.size());
    std::vector<Syllable> cur;
    compose(n, -1, cur, cache, out);
  }

 private:
  const std::vector<Element>& factor_sphere(std::size_t f, int l,
                                            std::vector<std::vector<std::vector<Element>>>& cache) const {
    auto& c = cache[f];
    if (static_cast<int>(c.size()) <= l) c.resize(l + 1);
    if (c[l].empty()) c[l] = factors[f].sphere(l);
    return c[l];
  }

  void compose(int remaining, int prev_factor, std::vector<Syllable>& cur,
               std::vector<std::vector<std::vector<Element>>>& cache, std::vector<Element>& out) const {
    if (remaining == 0) {
      out.push_back(join(cur));
      return;
    }
    for (std::size_t f = 0; f < factors.size(); ++f) {
      if (static_cast<int>(f) == prev_factor) continue;
      for (int l = 1; l <= remaining; ++l) {
        const auto& sph = factor_sphere(f, l, cache);
        for (const auto& x : sph) {
          cur.push_back({static_cast<int>(f), x});
          compose(remaining - l, static_cast<int>(f), cur, cache, out);
          cur.pop_back();
        }
      }
    }
  }
};

}  // namespace

// ---------------------------------------------------------------- Group

Group::Group(GroupSpec spec) {
  switch (spec.kind) {
    case GroupKind::Free:
      impl_ = std::make_shared<FreeImpl>(spec);
      break;
    case GroupKind::FreeAbelian:
      impl_ = std::make_shared<AbelianImpl>(spec);
      break;
    case GroupKind::Finite:
      impl_ = std::make_shared<FiniteImpl>(spec);
      break;
    case GroupKind::FreeProduct:
      impl_ = std::make_shared<ProductImpl>(spec);
      break;
  }
}

const GroupSpec& Group::spec() const { return impl_->spec; }
GroupKind Group::kind() const { return impl_->spec.kind; }
const std::vector<Generator>& Group::generators() const { return impl_->gens; }

int Group::generator_index(std::string_view name) const {
  auto it = impl_->name_index.find(std::string(name));
  return it == impl_->name_index.end() ? -1 : it->second;
}

Element Group::identity() const { return Element(); }

Element Group::normalize(const Word& word) const {
  Element x;
  const int n = static_cast<int>(impl_->gens.size());
  for (int g : word) {
    if (g < 0 || g >= n) throw ValidationError("generator index out of range: " + std::to_string(g));
    x = impl_->multiply_generator(x, g);
  }
  return x;
}

Element Group::multiply(const Element& a, const Element& b) const { return impl_->multiply(a, b); }

Element Group::multiply_generator(const Element& a, int gen) const {
  if (gen < 0 || gen >= static_cast<int>(impl_->gens.size()))
    throw ValidationError("generator index out of range: " + std::to_string(gen));
  return impl_->multiply_generator(a, gen);
}

Element Group::inverse(const Element& a) const { return impl_->inverse(a); }
int Group::word_length(const Element& a) const { return impl_->word_length(a); }
Word Group::geodesic(const Element& a) const { return impl_->geodesic(a); }

std::string Group::format_word(const Word& w) const {
  if (w.empty()) return "e";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += impl_->gens.at(w[i]).name;
  }
  return out;
}

std::string Group::format(const Element& a) const { return format_word(geodesic(a)); }

Word Group::parse_word(std::string_view text) const {
  Word w;
  std::istringstream is{std::string(text)};
  std::string tok;
  bool single_char_names = true;
  for (const auto& g : impl_->gens)
    if (g.name.size() != 1) single_char_names = false;
  while (is >> tok) {
    if (tok == "e") continue;
    int g = generator_index(tok);
    if (g >= 0) {
      w.push_back(g);
      continue;
    }
    if (single_char_names) {
      for (char c : tok) {
        if (c == 'e') continue;
        int h = generator_index(std::string(1, c));
        if (h < 0) throw ValidationError("unknown generator symbol '" + std::string(1, c) + "'");
        w.push_back(h);
      }
      continue;
    }
    throw ValidationError("unknown generator symbol '" + tok + "'");
  }
  return w;
}

std::vector<Element> Group::sphere(int n, std::size_t cap) const {
  if (n < 0) throw ValidationError("sphere radius must be >= 0");
  const double size = impl_->sphere_sizes(n)[n];
  check_cap(size, cap, "sphere");
  std::vector<Element> out;
  out.reserve(static_cast<std::size_t>(size));
  impl_->enumerate_sphere(n, out);
  return out;
}

std::vector<Element> Group::ball(int n, std::size_t cap) const {
  if (n < 0) throw ValidationError("ball radius must be >= 0");
  auto sizes = impl_->sphere_sizes(n);
  check_cap(std::accumulate(sizes.begin(), sizes.end(), 0.0), cap, "ball");
  std::vector<Element> out;
  for (int k = 0; k <= n; ++k) impl_->enumerate_sphere(k, out);
  return out;
}

std::vector<double> Group::sphere_sizes(int n_max) const { return impl_->sphere_sizes(n_max); }

int Group::factor_count() const {
  auto p = dynamic_cast<const ProductImpl*>(impl_.get());
  return p ? static_cast<int>(p->factors.size()) : 0;
}

const Group& Group::factor(int i) const {
  auto p = dynamic_cast<const ProductImpl*>(impl_.get());
  if (!p) throw UnsupportedSpec("factor() needs a free product");
  return p->factors.at(i);
}

std::vector<Syllable> Group::syllables(const Element& a) const {
  if (kind() != GroupKind::FreeProduct) throw UnsupportedSpec("syllables() needs a free product");
  return ProductImpl::split(a);
}

Element Group::from_syllables(const std::vector<Syllable>& s) const {
  if (kind() != GroupKind::FreeProduct) throw UnsupportedSpec("from_syllables() needs a free product");
  Element x;
  for (const auto& y : s) x = multiply(x, ProductImpl::embed(y.factor, y.element));
  return x;
}

Element Group::embed(int f, const Element& x) const {
  if (kind() != GroupKind::FreeProduct) throw UnsupportedSpec("embed() needs a free product");
  if (f < 0 || f >= factor_count()) throw ValidationError("factor index out of range");
  return ProductImpl::embed(f, x);
}

std::vector<int> Group::letters(const Element& a) const {
  if (kind() != GroupKind::Free) throw UnsupportedSpec("letters() needs a free group");
  std::vector<int> out;
  for (char c : a.code()) out.push_back(static_cast<unsigned char>(c));
  return out;
}

std::vector<int> Group::coordinates(const Element& a) const {
  auto p = dynamic_cast<const AbelianImpl*>(impl_.get());
  if (!p) throw UnsupportedSpec("coordinates() needs a free abelian group");
  return p->decode(a);
}

Element Group::from_coordinates(const std::vector<int>& c) const {
  auto p = dynamic_cast<const AbelianImpl*>(impl_.get());
  if (!p) throw UnsupportedSpec("from_coordinates() needs a free abelian group");
  if (static_cast<int>(c.size()) != p->d) throw ValidationError("coordinate vector has wrong dimension");
  return p->encode(c);
}

int Group::finite_index(const Element& a) const {
  if (kind() != GroupKind::Finite) throw UnsupportedSpec("finite_index() needs a finite group");
  return FiniteImpl::index(a);
}

Element Group::from_finite_index(int i) const {
  if (kind() != GroupKind::Finite) throw UnsupportedSpec("from_finite_index() needs a finite group");
  if (i < 0 || i >= static_cast<int>(spec().table.size())) throw ValidationError("finite index out of range");
  return FiniteImpl::encode(i);
}

}  // namespace brwlab
