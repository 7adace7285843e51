#pragma once

#include <vector>

#include "brwlab/groups.hpp"

namespace brwlab {

/// One syllable of a normal form seen as a stretch of the geodesic: the
/// points start..start+length all lie in one coset of the factor.
struct CosetRun {
  int factor = 0;
  int length = 0;
};

struct PointLabel {
  bool transitional = true;
  int factor = -1;  // factor of the coset the point is deep in
  int start = 0;    // geodesic positions of that coset's stretch
  int end = 0;
};

/// (eta, L) labels for the n+1 points of a free-product geodesic with the
/// given syllable runs. A point p is deep in a coset whose stretch is [s, t]
/// when the 2L-window around p (clipped to the geodesic) stays inside
/// [s - eta, t + eta]. Cosets met in a single point count as stretches of
/// length zero. With num_factors == 0 there are no parabolic cosets.
std::vector<PointLabel> classify_points(const std::vector<CosetRun>& runs, int num_factors, int eta, int L);

bool transitional_geodesic(const std::vector<CosetRun>& runs, int num_factors, int eta, int L);

/// Syllable runs of the normal form of x (one run per syllable).
std::vector<CosetRun> coset_runs(const Group& g, const Element& x);

/// Whether the canonical geodesic of x is (eta, L)-transitional. Free groups
/// have no parabolic cosets, so every element is.
bool transitional_element(const Group& g, const Element& x, int eta, int L);

}  // namespace brwlab
