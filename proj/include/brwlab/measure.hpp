#pragma once

#include <string>
#include <utility>
#include <vector>

#include "brwlab/groups.hpp"

namespace brwlab {

/// Finitely supported probability measure on a group, kept sorted by
/// normal-form code so that iteration order is reproducible.
struct StepDistribution {
  std::vector<std::pair<Element, double>> support;

  /// Uniform on the standard generators, with optional holding mass at e.
  static StepDistribution simple(const Group& g, double laziness = 0.0);
  /// sum_j weights[j] * (uniform measure on the generators of factor j).
  static StepDistribution adapted(const Group& g, const std::vector<double>& factor_weights);
  /// Two-factor convenience: alpha * mu_1 + (1 - alpha) * mu_0.
  static StepDistribution adapted(const Group& g, double alpha);
  static StepDistribution from_words(const Group& g, const std::vector<std::pair<std::string, double>>& entries);

  double mass(const Element& x) const;
  double total() const;
  int max_length(const Group& g) const;
  bool is_symmetric(const Group& g, double tol = 1e-12) const;
  bool is_admissible(const Group& g) const;

  /// Throws ValidationError unless the measure is a symmetric admissible
  /// probability measure.
  void validate(const Group& g) const;

  void canonicalize();
};

/// Weights of an adapted measure split by factor; empty when the measure
/// charges elements with more than one syllable.
struct AdaptedSplit {
  std::vector<double> weights;                    // alpha_j, including identity mass share
  std::vector<StepDistribution> factor_measures;  // normalised mu_j on factor j
  double identity_mass = 0.0;
};
bool split_adapted(const Group& g, const StepDistribution& mu, AdaptedSplit& out);

}  // namespace brwlab
