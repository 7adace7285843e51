#include "brwlab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <queue>

namespace brwlab {

FloydMetric::FloydMetric(const Group& g, double lambda, int N, const Element& basepoint, std::size_t cap)
    : g_(g), lambda_(lambda), N_(N), o_(basepoint) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("Floyd parameter must lie in (0,1)");
  if (N < 0) throw ValidationError("ball radius must be nonnegative");
  double total = 0.0;
  for (double s : g.sphere_sizes(N)) total += s;
  if (total > static_cast<double>(cap)) throw CapExceeded("Floyd ball exceeds the cap", total);
  nodes_ = g.ball(N, cap);
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i], i);

  const Element oinv = g.inverse(o_);
  std::vector<int> dist_o(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) dist_o[i] = g.word_length(g.multiply(oinv, nodes_[i]));
  adj_.resize(nodes_.size());
  const auto& gens = g.generators();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (std::size_t k = 0; k < gens.size(); ++k) {
      auto it = index_.find(g.multiply_generator(nodes_[i], static_cast<int>(k)));
      if (it == index_.end() || it->second == i) continue;
      const double w = std::pow(lambda_, std::min(dist_o[i], dist_o[it->second]));
      adj_[i].emplace_back(static_cast<std::uint32_t>(it->second), w);
    }
  }
}

std::size_t FloydMetric::node(const Element& x) const {
  auto it = index_.find(x);
  if (it == index_.end()) throw ValidationError("element " + g_.format(x) + " lies outside the Floyd ball");
  return it->second;
}

std::vector<double> FloydMetric::distances_from(const Element& x) const {
  std::vector<double> d(nodes_.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const auto s = static_cast<std::uint32_t>(node(x));
  d[s] = 0.0;
  pq.emplace(0.0, s);
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > d[u]) continue;
    for (auto [v, w] : adj_[u]) {
      if (du + w < d[v]) {
        d[v] = du + w;
        pq.emplace(d[v], v);
      }
    }
  }
  return d;
}

double FloydMetric::distance(const Element& x, const Element& y) const {
  if (x == y) {
    node(x);
    return 0.0;
  }
  // one canonical direction keeps the rounded sums symmetric
  return x < y ? distances_from(x)[node(y)] : distances_from(y)[node(x)];
}

FloydValue floyd_distance(const Group& g, const Element& x, const Element& y, double lambda, const Element& basepoint,
                          int N0, std::size_t cap) {
  int N = std::max({N0, g.word_length(x), g.word_length(y), 1});
  FloydValue out;
  out.value = FloydMetric(g, lambda, N, basepoint, cap).distance(x, y);
  out.N = N;
  while (true) {
    const int next = 2 * N;
    double total = 0.0;
    for (double s : g.sphere_sizes(next)) total += s;
    if (total > static_cast<double>(cap)) return out;
    const double v = FloydMetric(g, lambda, next, basepoint, cap).distance(x, y);
    const double change = out.value - v;
    out.value = v;
    out.N = N = next;
    if (change < 1e-9) {
      out.converged = true;
      return out;
    }
  }
}

namespace {

// Separation inside one factor coset: the smallest factor radius m such that
// removing B(m) cuts z1 from z2 (or removes one of them).
int factor_separation(const Group& f, const Element& z1, const Element& z2) {
  const int l1 = f.word_length(z1), l2 = f.word_length(z2);
  switch (f.kind()) {
    case GroupKind::Free: {
      auto a = f.letters(z1), b = f.letters(z2);
      std::size_t k = 0;
      while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
      return static_cast<int>(k);
    }
    case GroupKind::FreeAbelian:
      if (f.spec().rank == 1) {
        const int c1 = f.coordinates(z1)[0], c2 = f.coordinates(z2)[0];
        if ((c1 > 0) != (c2 > 0) && c1 != 0 && c2 != 0) return 0;
      }
      return std::min(l1, l2);
    case GroupKind::Finite: {
      // brute force over the factor's own Cayley graph
      const auto all = f.ball(64);
      std::map<Element, int> len;
      for (const auto& z : all) len[z] = f.word_length(z);
      for (int m = 0; m <= std::min(l1, l2); ++m) {
        if (l1 <= m || l2 <= m) return m;
        std::map<Element, bool> seen;
        std::vector<Element> stack{z1};
        seen[z1] = true;
        bool hit = false;
        while (!stack.empty() && !hit) {
          Element u = stack.back();
          stack.pop_back();
          for (std::size_t k = 0; k < f.generators().size(); ++k) {
            Element v = f.multiply_generator(u, static_cast<int>(k));
            if (len[v] <= m || seen[v]) continue;
            if (v == z2) hit = true;
            seen[v] = true;
            stack.push_back(v);
          }
        }
        if (!hit) return m;
      }
      return std::min(l1, l2);
    }
    default:
      throw UnsupportedSpec("nested free products are not supported");
  }
}

// Syllable i of the ray through `prefix`: the last two syllables repeat
// forever; a single syllable alternates with the first generator of the
// next factor.
Syllable ray_syllable(const Group& g, const std::vector<Syllable>& s, std::size_t i) {
  if (i < s.size()) return s[i];
  if (s.size() >= 2) return s[s.size() - 2 + (i - s.size()) % 2];
  const int other = (s[0].factor + 1) % g.factor_count();
  if ((i - s.size()) % 2 == 0) return {other, g.factor(other).generators()[0].element};
  return s[0];
}

int letter_ray(const std::vector<int>& w, std::size_t i) { return i < w.size() ? w[i] : w.back(); }

int free_product_separation(const Group& g, const std::vector<Syllable>& a, const std::vector<Syllable>& b,
                            std::size_t limit, bool rays) {
  int base = 0;
  for (std::size_t i = 0; i < limit; ++i) {
    if (!rays && (i >= a.size() || i >= b.size())) return base;
    const Syllable sa = rays ? ray_syllable(g, a, i) : a[i];
    const Syllable sb = rays ? ray_syllable(g, b, i) : b[i];
    if (sa.factor != sb.factor) return base;
    const Group& f = g.factor(sa.factor);
    if (sa.element != sb.element) return base + factor_separation(f, sa.element, sb.element);
    base += f.word_length(sa.element);
  }
  return rays ? -1 : base;
}

}  // namespace

int separation_radius(const Group& g, const EndPoint& xi, const EndPoint& zeta) {
  if (g.is_identity(xi.prefix) || g.is_identity(zeta.prefix)) throw ValidationError("an end needs a nonempty prefix");
  if (g.kind() == GroupKind::Free) {
    const auto a = g.letters(xi.prefix), b = g.letters(zeta.prefix);
    const std::size_t limit = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < limit; ++i)
      if (letter_ray(a, i) != letter_ray(b, i)) return static_cast<int>(i);
    return -1;
  }
  if (g.kind() == GroupKind::FreeProduct) {
    const auto a = g.syllables(xi.prefix), b = g.syllables(zeta.prefix);
    return free_product_separation(g, a, b, std::max(a.size(), b.size()) + 2, true);
  }
  throw UnsupportedSpec("ends are defined here for free groups and free products");
}

double visual_distance_ends(const Group& g, const EndPoint& xi, const EndPoint& zeta, double lambda) {
  const int n = separation_radius(g, xi, zeta);
  return n < 0 ? 0.0 : std::pow(lambda, n);
}

double visual_distance_cells(const Group& g, const Element& x, const Element& y, double lambda) {
  if (x == y) return std::pow(lambda, g.word_length(x));
  int n = 0;
  if (g.kind() == GroupKind::Free) {
    const auto a = g.letters(x), b = g.letters(y);
    while (static_cast<std::size_t>(n) < std::min(a.size(), b.size()) && a[n] == b[n]) ++n;
  } else if (g.kind() == GroupKind::FreeProduct) {
    const auto a = g.syllables(x), b = g.syllables(y);
    n = free_product_separation(g, a, b, std::min(a.size(), b.size()) + 1, false);
  } else {
    throw UnsupportedSpec("visual distance is defined here for free groups and free products");
  }
  n = std::min({n, g.word_length(x), g.word_length(y)});
  return std::pow(lambda, n);
}

std::vector<PointLabel> classify_transition_points(const Group& g, const Element& x, int eta, int L) {
  if (eta < 0 || L < 0) throw ValidationError("eta and L must be nonnegative");
  const int nf = g.kind() == GroupKind::FreeProduct ? g.factor_count() : 0;
  if (nf == 0) return std::vector<PointLabel>(static_cast<std::size_t>(g.word_length(x)) + 1);
  return classify_points(coset_runs(g, x), nf, eta, L);
}

Shadow shadow(const Group& g, const Element& x, int K, double lambda, int depth, bool with_floyd,
              std::size_t max_pairs_side) {
  if (K < 0) throw ValidationError("shadow width must be nonnegative");
  const int lx = g.word_length(x);
  if (depth < 0) depth = lx + K + 2;
  if (depth < lx + K) throw ValidationError("shadow depth must be at least |x| + K");
  Shadow out;
  out.center = x;
  out.length = lx;
  out.K = K;
  out.depth = depth;

  std::map<int, std::vector<Element>> spheres;
  auto sphere = [&](int n) -> const std::vector<Element>& {
    auto it = spheres.find(n);
    if (it == spheres.end()) it = spheres.emplace(n, g.sphere(n)).first;
    return it->second;
  };
  std::vector<Element> cells;
  for (const auto& b : g.ball(K)) {
    const Element y = g.multiply(x, b);
    const int ly = g.word_length(y);
    for (const auto& w : sphere(depth - ly)) {
      Element p = g.multiply(y, w);
      if (g.word_length(p) == depth) cells.push_back(std::move(p));
    }
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  out.cells = std::move(cells);
  if (out.cells.empty()) return out;

  // The visual distance is an ultrametric, so a double sweep gives the exact
  // diameter: the farthest cell from any cell realises it.
  auto sweep = [&](const Element& p0, Element* far) {
    double best = 0.0;
    for (const auto& q : out.cells) {
      if (q == p0) continue;
      const double d = visual_distance_cells(g, p0, q, lambda);
      if (d > best) {
        best = d;
        if (far) *far = q;
      }
    }
    return best;
  };
  if (out.cells.size() == 1) {
    out.visual_diameter = 0.0;
  } else {
    Element far = out.cells.front();
    out.visual_diameter = std::max(sweep(out.cells.front(), &far), sweep(far, nullptr));
  }

  out.floyd_diameter = std::numeric_limits<double>::quiet_NaN();
  if (with_floyd) {
    const std::size_t stride = std::max<std::size_t>(1, out.cells.size() / std::max<std::size_t>(1, max_pairs_side));
    out.subsampled = stride > 1;
    FloydMetric fm(g, lambda, depth);
    double best = 0.0;
    for (std::size_t i = 0; i < out.cells.size(); i += stride) {
      auto d = fm.distances_from(out.cells[i]);
      for (std::size_t j = 0; j < out.cells.size(); j += stride) {
        best = std::max(best, d[fm.node(out.cells[j])]);
      }
      if (i / stride >= 32) {
        out.subsampled = true;
        break;
      }
    }
    out.floyd_diameter = best;
  }
  return out;
}

ShadowFit fit_shadow_constant(const std::vector<Shadow>& shadows, double lambda, double tolerance) {
  if (shadows.empty()) throw ValidationError("no shadows to fit");
  ShadowFit fit;
  for (const auto& s : shadows) {
    const double ratio = s.visual_diameter / (std::max(s.K, 1) * std::pow(lambda, s.length - s.K));
    fit.ratios.push_back(ratio);
    fit.C_hat = std::max(fit.C_hat, ratio);
    auto& c = fit.per_length[s.length];
    c = std::max(c, ratio);
  }
  fit.stable = std::isfinite(fit.C_hat) && fit.C_hat > 0.0;
  for (const auto& [len, c] : fit.per_length)
    if (c < (1.0 - tolerance) * fit.C_hat) fit.stable = false;
  return fit;
}

void write_shadow_csv(const Group& g, const std::vector<Shadow>& shadows, double lambda, std::ostream& os) {
  os << "x,K,floyd_diam,visual_diam,bound\n";
  os.precision(17);
  for (const auto& s : shadows) {
    os << g.format(s.center) << ',' << s.K << ',';
    if (!std::isnan(s.floyd_diameter)) os << s.floyd_diameter;
    os << ',' << s.visual_diameter << ',' << std::max(s.K, 1) * std::pow(lambda, s.length - s.K) << '\n';
  }
}

}  // namespace brwlab
