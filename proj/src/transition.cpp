#include "brwlab/transition.hpp"

#include <algorithm>

#include "brwlab/errors.hpp"

namespace brwlab {

namespace {

bool window_inside(int p, int n, int L, int s, int t, int eta) {
  const int lo = std::max(0, p - 2 * L);
  const int hi = std::min(n, p + 2 * L);
  return lo >= s - eta && hi <= t + eta;
}

}  // namespace

std::vector<PointLabel> classify_points(const std::vector<CosetRun>& runs, int num_factors, int eta, int L) {
  if (eta < 0 || L < 0) throw ValidationError("eta and L must be nonnegative");
  int n = 0;
  for (const auto& r : runs) {
    if (r.length <= 0) throw ValidationError("syllable runs must have positive length");
    n += r.length;
  }
  std::vector<PointLabel> out(n + 1);
  if (num_factors == 0) return out;
  std::vector<int> starts(runs.size());
  for (std::size_t i = 0, s = 0; i < runs.size(); ++i) {
    starts[i] = static_cast<int>(s);
    s += runs[i].length;
  }
  for (int p = 0; p <= n; ++p) {
    int touching = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const int s = starts[i], t = starts[i] + runs[i].length;
      if (p >= s && p <= t) ++touching;
      if (window_inside(p, n, L, s, t, eta)) {
        out[p] = {false, runs[i].factor, s, t};
        break;
      }
    }
    if (out[p].transitional && touching < num_factors && window_inside(p, n, L, p, p, eta)) {
      int f = 0;
      for (; f < num_factors; ++f) {
        bool used = false;
        for (std::size_t i = 0; i < runs.size(); ++i)
          if (runs[i].factor == f && p >= starts[i] && p <= starts[i] + runs[i].length) used = true;
        if (!used) break;
      }
      out[p] = {false, f, p, p};
    }
  }
  return out;
}

bool transitional_geodesic(const std::vector<CosetRun>& runs, int num_factors, int eta, int L) {
  for (const auto& pl : classify_points(runs, num_factors, eta, L))
    if (!pl.transitional) return false;
  return true;
}

std::vector<CosetRun> coset_runs(const Group& g, const Element& x) {
  std::vector<CosetRun> runs;
  for (const auto& s : g.syllables(x)) runs.push_back({s.factor, g.factor(s.factor).word_length(s.element)});
  return runs;
}

bool transitional_element(const Group& g, const Element& x, int eta, int L) {
  if (g.kind() == GroupKind::Free) return true;
  if (g.kind() != GroupKind::FreeProduct) throw UnsupportedSpec("transition points need a free group or free product");
  return transitional_geodesic(coset_runs(g, x), g.factor_count(), eta, L);
}

}  // namespace brwlab
