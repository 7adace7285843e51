#include "brwlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

namespace brwlab {

void StepDistribution::canonicalize() {
  std::map<std::string, double> acc;
  for (const auto& [x, p] : support) acc[x.code()] += p;
  support.clear();
  for (const auto& [code, p] : acc)
    if (p != 0.0) support.emplace_back(Element(code), p);
}

StepDistribution StepDistribution::simple(const Group& g, double laziness) {
  if (laziness < 0 || laziness >= 1) throw ValidationError("holding probability must lie in [0,1)");
  StepDistribution mu;
  const auto& gens = g.generators();
  const double p = (1.0 - laziness) / static_cast<double>(gens.size());
  for (const auto& s : gens) mu.support.emplace_back(s.element, p);
  if (laziness > 0) mu.support.emplace_back(g.identity(), laziness);
  mu.canonicalize();
  return mu;
}

StepDistribution StepDistribution::adapted(const Group& g, const std::vector<double>& w) {
  if (g.kind() != GroupKind::FreeProduct) throw UnsupportedSpec("adapted measures need a free product");
  if (static_cast<int>(w.size()) != g.factor_count())
    throw ValidationError("adapted measure needs one weight per factor");
  double total = 0;
  for (double x : w) {
    if (!(x > 0)) throw ValidationError("adapted factor weights must be positive");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("adapted factor weights must sum to 1");
  StepDistribution mu;
  for (int f = 0; f < g.factor_count(); ++f) {
    const auto& fg = g.factor(f).generators();
    for (const auto& s : fg)
      mu.support.emplace_back(g.embed(f, s.element), w[f] / static_cast<double>(fg.size()));
  }
  mu.canonicalize();
  return mu;
}

StepDistribution StepDistribution::adapted(const Group& g, double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw ValidationError("alpha must lie in (0,1)");
  if (g.factor_count() != 2) throw ValidationError("alpha form of an adapted measure needs two factors");
  return adapted(g, std::vector<double>{1.0 - alpha, alpha});
}

StepDistribution StepDistribution::from_words(const Group& g,
                                              const std::vector<std::pair<std::string, double>>& entries) {
  StepDistribution mu;
  for (const auto& [word, p] : entries) {
    if (!(p >= 0)) throw ValidationError("step probabilities must be nonnegative");
    mu.support.emplace_back(g.parse(word), p);
  }
  mu.canonicalize();
  return mu;
}

double StepDistribution::mass(const Element& x) const {
  auto it = std::lower_bound(support.begin(), support.end(), x,
                             [](const auto& a, const Element& b) { return a.first.code() < b.code(); });
  return (it != support.end() && it->first == x) ? it->second : 0.0;
}

double StepDistribution::total() const {
  double t = 0;
  for (const auto& e : support) t += e.second;
  return t;
}

int StepDistribution::max_length(const Group& g) const {
  int m = 0;
  for (const auto& e : support) m = std::max(m, g.word_length(e.first));
  return m;
}

bool StepDistribution::is_symmetric(const Group& g, double tol) const {
  for (const auto& [x, p] : support)
    if (std::abs(mass(g.inverse(x)) - p) > tol) return false;
  return true;
}

bool StepDistribution::is_admissible(const Group& g) const {
  std::unordered_set<Element, ElementHash> reached{g.identity()};
  std::vector<Element> frontier{g.identity()};
  for (int depth = 0; depth < 3; ++depth) {
    std::vector<Element> next;
    for (const auto& x : frontier)
      for (const auto& [s, p] : support) {
        if (p <= 0) continue;
        Element y = g.multiply(x, s);
        if (reached.insert(y).second) next.push_back(y);
      }
    frontier.swap(next);
    if (reached.size() > 2'000'000) break;
  }
  for (const auto& gen : g.generators())
    if (!reached.count(gen.element)) return false;
  return true;
}

void StepDistribution::validate(const Group& g) const {
  if (support.empty()) throw ValidationError("step distribution is empty");
  for (const auto& e : support)
    if (!(e.second >= 0)) throw ValidationError("step probabilities must be nonnegative");
  if (std::abs(total() - 1.0) > 1e-12) throw ValidationError("step probabilities must sum to 1");
  if (!is_symmetric(g)) throw ValidationError("step distribution is not symmetric");
  if (!is_admissible(g)) throw ValidationError("step distribution support does not generate the group");
}

bool split_adapted(const Group& g, const StepDistribution& mu, AdaptedSplit& out) {
  if (g.kind() != GroupKind::FreeProduct) return false;
  const int k = g.factor_count();
  out = AdaptedSplit{};
  out.weights.assign(k, 0.0);
  out.factor_measures.assign(k, StepDistribution{});
  for (const auto& [x, p] : mu.support) {
    if (g.is_identity(x)) {
      out.identity_mass += p;
      continue;
    }
    auto syl = g.syllables(x);
    if (syl.size() != 1) return false;
    out.weights[syl[0].factor] += p;
    out.factor_measures[syl[0].factor].support.emplace_back(syl[0].element, p);
  }
  // holding mass is booked on factor 0; any split gives the same walk
  if (out.identity_mass > 0) {
    out.weights[0] += out.identity_mass;
    out.factor_measures[0].support.emplace_back(g.factor(0).identity(), out.identity_mass);
  }
  for (int f = 0; f < k; ++f) {
    if (out.weights[f] <= 0) return false;
    for (auto& e : out.factor_measures[f].support) e.second /= out.weights[f];
    out.factor_measures[f].canonicalize();
  }
  return true;
}

}  // namespace brwlab
