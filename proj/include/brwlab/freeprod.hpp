#pragma once

// Adapted random walks on free products. A step picks factor j with
// probability alpha_j and then moves inside that factor by mu_j. Watching
// the walk on one factor coset collapses every excursion into the other
// factors into a holding weight w_j, which turns the Green function of the
// product into rescaled Green functions of the factors.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "brwlab/randwalk.hpp"

namespace brwlab {

/// Green function G^{mu}_t of a walk on one factor group.
class FactorOracle {
 public:
  FactorOracle(const Group& factor, const StepDistribution& mu, const EngineOptions& opt = {});

  const Group& group() const { return g_; }
  std::string method() const { return closed_ ? "closed-form" : "chain"; }
  /// Radius of convergence R_mu.
  double radius() const { return R_; }
  double green_ee(double t) const;
  double green(double t, const Element& x) const;
  /// First-passage function F_t(e, x) = G_t(e, x) / G_t(e, e).
  double first_passage(double t, const Element& x) const { return green(t, x) / green_ee(t); }
  /// First-return function U(t) = 1 - 1/G_t(e, e).
  double first_return(double t) const { return 1.0 - 1.0 / green_ee(t); }
  /// sum over the factor sphere S_n of G_t(e, x), n = 0..n_max.
  std::vector<double> sphere_sums(double t, int n_max) const;

 private:
  void check(double t) const;
  std::shared_ptr<const Eigen::VectorXd> totals(double t) const;

  Group g_;
  StepDistribution mu_;
  double R_ = 1.0;
  bool closed_ = false;
  double p_ = 0.0, pe_ = 0.0;  // closed form: generator mass, holding mass
  int q_ = 0;
  std::shared_ptr<const OrbitChain> chain_;
  std::vector<double> ja_, jb_;  // Jacobi coefficients of the return measure
  bool tail_ = false;            // close the continued fraction with its limiting square-root tail
  double a_inf_ = 0.0, b_inf_ = 0.0;
  mutable std::mutex m_;
  mutable std::map<double, std::shared_ptr<const Eigen::VectorXd>> cache_;
};

/// Solution of the coupled return-weight equations at one r.
struct ProductState {
  double r = 0.0;
  std::vector<double> w;     // w_i: returns to e whose first step leaves factor i
  std::vector<double> zeta;  // zeta_i = alpha_i r / (1 - w_i)
  int iterations = 0;
};

class ProductEngine final : public GreenEngine {
 public:
  ProductEngine(const Group& g, const StepDistribution& mu, const EngineOptions& opt = {});

  /// True when mu is adapted to the free-product structure of g.
  static bool applicable(const Group& g, const StepDistribution& mu);

  std::string method() const override { return "free-product"; }
  const Group& group() const override { return g_; }
  double critical_radius() const override { return R_; }
  double green(double r, const Element& x) const override;
  std::vector<double> sphere_sums(double r, int n_max) const override;
  std::vector<double> factor_sphere_sums(double r, int factor, int n_max) const override;
  std::vector<double> transitional_sphere_sums(double r, int n_max, int eta, int L) const override;

  /// Throws DivergentSeries beyond the critical radius.
  ProductState solve(double r) const;
  double green_ee(double r) const;
  const FactorOracle& oracle(int f) const { return *oracles_[f]; }
  const AdaptedSplit& split() const { return split_; }
  const StepDistribution& measure() const { return mu_; }

 private:
  std::optional<ProductState> try_solve(double r) const;
  std::vector<std::vector<double>> factor_series(const ProductState& st, int n_max) const;

  Group g_;
  StepDistribution mu_;
  AdaptedSplit split_;
  std::vector<std::unique_ptr<FactorOracle>> oracles_;
  double R_ = 1.0;
  mutable std::mutex m_;
  mutable std::map<double, ProductState> cache_;
};

// ---------------------------------------------------------------- operations

struct ReturnWeights {
  double s = 0.0;
  double w = 0.0;        // first step in factor 1, as seen from factor 0
  double w_prime = 0.0;  // first step in factor 0, as seen from factor 1
  int cap = 0;
  double w_truncated = 0.0;  // paths of length <= cap only
  double w_prime_truncated = 0.0;
  double residual = 0.0;     // max of the two truncation gaps
  bool valid = true;         // both weights below 1
};

/// Return weights of a two-factor adapted walk at s, with the path-length
/// truncated values used as a cross-check.
ReturnWeights return_weights(const ProductEngine& engine, double s, int cap);

struct ZetaMaps {
  double s = 0.0;
  double zeta0 = 0.0, zeta1 = 0.0;
  double R_mu0 = 0.0, R_mu1 = 0.0;
  bool valid = true;
};
ZetaMaps zeta_maps(const ProductEngine& engine, double s);

struct TransferRow {
  Element x, y;
  double lhs = 0.0;  // G_s(x, y) (1 - w) from the direct engine
  double rhs = 0.0;  // G^{mu_0}_{zeta_0}(x, y)
  double rel_error = 0.0;
};
struct TransferCheck {
  double s = 0.0;
  std::vector<TransferRow> rows;
  double max_rel_error = 0.0;
  double budget = 0.0;
  bool pass = false;
};
/// x, y are factor-0 elements (factor encoding).
TransferCheck verify_transfer(const ProductEngine& analytic, const GreenEngine& direct, double s,
                              const std::vector<std::pair<Element, Element>>& pairs, double budget = 1e-3);

struct MultiplicativityCheck {
  double r = 0.0;
  int max_length = 0;
  std::size_t elements = 0;          // orbit representatives checked
  double max_split_error = 0.0;      // G(e,x)/G(e,e) vs product over syllable splits, direct engine only
  double max_formula_error = 0.0;    // direct engine vs the analytic syllable formula
};
MultiplicativityCheck check_multiplicativity(const ProductEngine& analytic, const ChainEngine& direct, double r,
                                             int max_length);

struct LandscapeRow {
  double alpha = 0.0;
  double r = 0.0;
  double R_hat = 0.0;
  double omega_gamma = 0.0;
  double residual = 0.0;
  std::vector<double> omega_P;
  std::vector<bool> gap;
  std::vector<bool> degenerate;    // R_P(R_hat) within tolerance of 1
  std::vector<double> R_P_at_critical;
  std::vector<bool> theta_divergent_looking;  // Poincare series of H_P at s = omega_P (heuristic)
};

/// Two-factor grid over alpha and r (given as fractions of R_hat(alpha)).
std::vector<LandscapeRow> example_landscape(const Group& g, const std::vector<double>& alphas,
                                            const std::vector<double>& r_fractions, int n_max,
                                            const EngineOptions& opt = {}, double degeneracy_tol = 1e-6);

}  // namespace brwlab
