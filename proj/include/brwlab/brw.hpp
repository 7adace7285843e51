#pragma once

// Discrete-time branching random walk: every particle dies and leaves
// nu-distributed children (at least one), each displaced by an independent
// mu-step.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "brwlab/groups.hpp"
#include "brwlab/measure.hpp"

namespace brwlab {

class OffspringDistribution {
 public:
  /// p[k] = probability of k children; p[0] must vanish.
  explicit OffspringDistribution(std::vector<double> p);
  /// Exactly k children.
  static OffspringDistribution fixed(int k);
  /// Geometric on {1, ..., max_children} with the given mean.
  static OffspringDistribution geometric(double mean, int max_children = 64);

  const std::vector<double>& probabilities() const { return p_; }
  double mean() const { return mean_; }
  double second_moment() const { return m2_; }
  int sample(double u) const;

 private:
  std::vector<double> p_, cdf_;
  double mean_ = 0.0, m2_ = 0.0;
};

/// Sampler for a finitely supported step distribution (Walker alias table).
class StepSampler {
 public:
  explicit StepSampler(const StepDistribution& mu);
  const Element& sample(double u) const;

 private:
  std::vector<Element> steps_;
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

using RegionPredicate = std::function<bool(const Element&)>;

struct BrwConfig {
  StepDistribution mu;
  OffspringDistribution nu = OffspringDistribution::fixed(1);
  int T = 40;                          // generations
  std::uint64_t K = 2'000'000;         // live-particle cap
  std::uint64_t seed = 1;
  int replicas = 1;
  int threads = 1;
  bool track_visits = true;            // keep Z_x (otherwise only the visited set)
  RegionPredicate freeze;              // particles stop on first entry (optional)
};

struct FrozenParticle {
  Element position;
  int generation = 0;
  int ancestry = 0;  // number of ancestors, equal to the generation here
};

/// Particles alive at one generation, aggregated by position in code order.
struct GenerationState {
  int t = 0;
  std::vector<std::pair<Element, std::uint64_t>> particles;
  std::uint64_t population() const;
};

class Trace {
 public:
  int replica = 0;
  int generations = 0;             // generations actually simulated
  bool truncated = false;          // population cap hit; the run stopped early
  std::vector<std::uint64_t> population;  // live particles per generation
  std::vector<FrozenParticle> frozen;

  /// Z_x: particles (one per generation they live) ever located at x.
  /// Visited elements with tracking disabled report 1.
  std::uint64_t visits(const Element& x) const;
  bool visited(const Element& x) const { return z_.count(x) > 0; }
  std::size_t size() const { return z_.size(); }
  const std::unordered_map<Element, std::uint64_t, ElementHash>& elements() const { return z_; }
  /// M_n for n = 0..max radius.
  const std::vector<std::uint64_t>& sphere_counts() const { return M_; }
  /// M_{n,L}: visited elements of S_n with an (eta, L)-transitional geodesic.
  std::vector<std::uint64_t> transitional_counts(const Group& g, int eta, int L) const;
  int radius() const { return static_cast<int>(M_.size()) - 1; }
  /// Rows `x, |x|, Z_x` sorted by (|x|, code); throws CapExceeded above max_rows.
  void write_csv(const Group& g, std::ostream& os, std::size_t max_rows = 1'000'000) const;

 private:
  friend class BrwSimulator;
  void record(const Group& g, const Element& x, std::uint64_t count, bool track);
  std::unordered_map<Element, std::uint64_t, ElementHash> z_;
  std::vector<std::uint64_t> M_;
};

class BrwSimulator {
 public:
  BrwSimulator(const Group& g, BrwConfig config);
  const Group& group() const { return g_; }
  const BrwConfig& config() const { return cfg_; }

  /// One particle at e, recorded in the trace (frozen at once if e lies in the region).
  GenerationState initial(Trace& trace) const;
  /// One generation. Children are drawn in fixed blocks of positions with
  /// their own seeded streams, so the result does not depend on `threads`.
  GenerationState step(const GenerationState& state, Trace& trace, int replica) const;
  Trace run(int replica = 0) const;
  /// Replicas 0..replicas-1, in parallel over replicas.
  std::vector<Trace> run_replicas() const;

 private:
  Group g_;
  BrwConfig cfg_;
  StepSampler steps_;
};

struct ManyToOne {
  Element x;
  int replicas = 0;
  double mean = 0.0;       // sample mean of Z_x
  double stderr_ = 0.0;
  double expected = 0.0;   // sum_{n <= T} r^n p_n(e, x), the exact mean at horizon T
  double green = 0.0;      // G_r(e, x) (infinite horizon, NaN when r is beyond the radius)
  double z = 0.0;
  bool undersampled = false;
};

/// Monte-Carlo first moment of Z_x against the Green function.
std::vector<ManyToOne> many_to_one_check(const Group& g, const BrwConfig& config, const std::vector<Element>& xs);

/// Frozen-particle ledger of one replica (the config must carry a region).
std::vector<FrozenParticle> freeze(const Group& g, BrwConfig config, const RegionPredicate& region, int replica = 0);

/// Depth-`depth` prefixes of the canonical geodesics of visited elements at
/// word length >= radius (radius < 0: the largest radius reached).
std::vector<Element> limit_rays(const Group& g, const Trace& trace, int depth, int radius = -1);

struct TrackingDiagnostic {
  double kappa_hat = 0.0;           // sup of d(x, trace) / log|x|
  std::vector<int> positions;       // transition points examined
  std::vector<int> distances;       // d(x, trace) at each, -1 beyond the search radius
  bool censored = false;            // some distance exceeded the search radius
};

/// Transition points x on the geodesic [e, ray] with |x| >= n0, at their
/// distance from the visited set.
TrackingDiagnostic tracking_diagnostic(const Group& g, const Trace& trace, const Element& ray, int eta, int L,
                                       int n0 = 2, int search_radius = 6);

/// Slope of log M_n over [lo, hi] (sphere counts must be positive there).
double trace_growth_slope(const Trace& trace, int lo, int hi);

}  // namespace brwlab
