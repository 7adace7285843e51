#pragma once

// Floyd metric on enumerated balls, the visual metric on ends of free groups
// and free products, and shadows.

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "brwlab/groups.hpp"
#include "brwlab/transition.hpp"

namespace brwlab {

/// Cayley graph of the ball B(e, N) with edge weights lambda^{d(o, edge)},
/// where d(o, edge) is the smaller distance of its two endpoints from o.
class FloydMetric {
 public:
  FloydMetric(const Group& g, double lambda, int N, const Element& basepoint, std::size_t cap = 5'000'000);
  FloydMetric(const Group& g, double lambda, int N) : FloydMetric(g, lambda, N, g.identity()) {}

  double lambda() const { return lambda_; }
  int radius() const { return N_; }
  const Element& basepoint() const { return o_; }
  bool contains(const Element& x) const { return index_.count(x) > 0; }
  /// Shortest weighted path inside the ball; ValidationError outside it.
  double distance(const Element& x, const Element& y) const;
  /// Distances from x to every ball element, in enumeration order.
  std::vector<double> distances_from(const Element& x) const;
  const std::vector<Element>& elements() const { return nodes_; }
  /// Position of x in elements(); ValidationError outside the ball.
  std::size_t node(const Element& x) const;

 private:

  Group g_;
  double lambda_;
  int N_;
  Element o_;
  std::vector<Element> nodes_;
  std::unordered_map<Element, std::size_t, ElementHash> index_;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj_;
};

struct FloydValue {
  double value = 0.0;
  int N = 0;              // ball radius of the reported value
  bool converged = false; // last doubling changed the value by < 1e-9
};

/// Floyd distance with the ball radius doubled from N0 until the value
/// settles or the ball exceeds the cap.
FloydValue floyd_distance(const Group& g, const Element& x, const Element& y, double lambda, const Element& basepoint,
                          int N0 = 4, std::size_t cap = 2'000'000);

/// An end given by a finite normal-form prefix, extended forever by repeating
/// the last generator of its geodesic.
struct EndPoint {
  Element prefix;
};

/// Smallest radius n with the two ends in different components of the
/// complement of B(e, n); -1 when they define the same end.
int separation_radius(const Group& g, const EndPoint& xi, const EndPoint& zeta);
/// lambda^n with n the separation radius (0 for equal ends).
double visual_distance_ends(const Group& g, const EndPoint& xi, const EndPoint& zeta, double lambda);

/// Same rule for two finite elements seen as the cells they cut out: the
/// distance of x from y is lambda^n with n the radius where their geodesics
/// part; lambda^{|x|} on the diagonal.
double visual_distance_cells(const Group& g, const Element& x, const Element& y, double lambda);

/// Labels of the points of the canonical geodesic of x.
std::vector<PointLabel> classify_transition_points(const Group& g, const Element& x, int eta, int L);

struct Shadow {
  Element center;
  int length = 0;             // |center|
  int K = 0;
  int depth = 0;              // cells are elements of S_depth
  std::vector<Element> cells;
  double visual_diameter = 0.0;
  double floyd_diameter = 0.0;  // NaN when not computed
  bool subsampled = false;      // diameters taken over a deterministic subsample
};

/// Cells p in S_depth reached by a geodesic [e, p] through B(x, K).
/// depth defaults to |x| + K + 2.
Shadow shadow(const Group& g, const Element& x, int K, double lambda, int depth = -1, bool with_floyd = false,
              std::size_t max_pairs_side = 2000);

/// Ratios diam / (max(K,1) lambda^{|x|-K}). K = 0 is read as K = 1, otherwise
/// the bound vanishes. C_hat is the largest ratio; the per-length constants
/// are the largest ratios at each |x|, and the fit is stable when all of them
/// lie within the tolerance of C_hat.
struct ShadowFit {
  double C_hat = 0.0;
  std::map<int, double> per_length;
  std::vector<double> ratios;
  bool stable = false;
};
ShadowFit fit_shadow_constant(const std::vector<Shadow>& shadows, double lambda, double tolerance = 0.3);

/// CSV rows `x, K, floyd_diam, visual_diam, bound` (bound with C = 1).
void write_shadow_csv(const Group& g, const std::vector<Shadow>& shadows, double lambda, std::ostream& os);

}  // namespace brwlab
