#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "brwlab/chain.hpp"
#include "brwlab/groups.hpp"
#include "brwlab/measure.hpp"

namespace brwlab {

// ---------------------------------------------------------------- convolution powers

struct ConvolveOptions {
  bool lump = true;
  std::size_t cap = Group::kDefaultSphereCap;
};

class ConvolutionTable {
 public:
  int steps() const { return N_; }
  bool lumped() const { return chain_ != nullptr; }
  /// p_n(e, x); zero outside the support of p_n.
  double p(int n, const Element& x) const;
  double row_sum(int n) const;
  /// Rows `n, x, p_n`. Lumped tables print one representative per orbit.
  void write_csv(std::ostream& os) const;

 private:
  friend ConvolutionTable convolve(const Group&, const StepDistribution&, int, const ConvolveOptions&);
  int N_ = 0;
  std::shared_ptr<const OrbitChain> chain_;
  std::vector<Eigen::VectorXd> mass_;
  std::vector<std::unordered_map<Element, double, ElementHash>> rows_;
  std::shared_ptr<const Group> group_;
};

/// Exact n-step distributions for n <= N. Uses the lumped chain when the
/// measure admits one, else dynamic programming over explicit elements.
ConvolutionTable convolve(const Group& g, const StepDistribution& mu, int N, const ConvolveOptions& opt = {});

// ---------------------------------------------------------------- spectral radius

struct SpectralRadiusEstimate {
  int steps = 0;
  double rho_lower = 0.0;         // certified lower bound (top Ritz value)
  double rho_extrapolated = 0.0;  // Richardson on the 1/N^2 approach
  double R_hat = 0.0;             // 1 / rho_lower
  double root_form = 0.0;         // p_{2N}(e,e)^{1/(2N)}
  std::vector<double> sequence;   // rho_lower after 1..N steps
  bool monotone = true;
  bool nonamenable = false;
};

/// Uses N Lanczos steps on the symmetrised walk started at e, which consumes
/// the return probabilities p_k(e,e) for k < 2N.
SpectralRadiusEstimate spectral_radius(const Group& g, const StepDistribution& mu, int N, std::size_t class_cap = 5'000'000);

// ---------------------------------------------------------------- Green functions

struct GreenValue {
  double r = 0.0;
  int N = 0;
  double value = 0.0;         // partial sum over n <= N
  double tail_bound = 0.0;    // sum_{n>N} (r rho_hat)^n, infinite when not certified
  bool certified = false;
  double extrapolated = 0.0;  // Aitken delta^2 on the last partial sums
  bool domain_truncated = false;
};

struct GreenOptions {
  double rho_hat = std::numeric_limits<double>::quiet_NaN();  // computed when NaN
  int spectral_steps = 400;
  double tolerance = 1e-9;
  int radius = -1;  // green_restricted: domain radius around x (auto when < 0)
  std::size_t cap = 2'000'000;
};

GreenValue green(const Group& g, const StepDistribution& mu, double r, const Element& x, int N,
                 const GreenOptions& opt = {});
/// Several targets sharing one convolution.
std::vector<GreenValue> green_many(const Group& g, const StepDistribution& mu, double r, const std::vector<Element>& xs,
                                   int N, const GreenOptions& opt = {});

using ElementPredicate = std::function<bool(const Element&)>;

/// Paths from x to y whose interior points satisfy A; endpoints are free.
/// The n = 0 term counts when x == y.
GreenValue green_restricted(const Group& g, const StepDistribution& mu, double r, const Element& x, const Element& y,
                            const ElementPredicate& A, int N, const GreenOptions& opt = {});

// ---------------------------------------------------------------- engines

struct EngineOptions {
  int chain_radius = -1;                 // auto when < 0
  std::size_t class_cap = 5'000'000;
  std::vector<int> factor_costs;
  int spectral_steps = 1000;
  double r_hat = std::numeric_limits<double>::quiet_NaN();
  bool analytic_products = true;         // use factor generating functions for adapted measures
  int factor_radius = -1;                // domain radius for chain-based factor oracles
};

/// Source of Green values and sphere sums at a fixed measure.
class GreenEngine {
 public:
  virtual ~GreenEngine() = default;
  virtual std::string method() const = 0;
  virtual const Group& group() const = 0;
  virtual double critical_radius() const = 0;
  virtual double green(double r, const Element& x) const = 0;
  /// H_r(n) for n = 0..n_max.
  virtual std::vector<double> sphere_sums(double r, int n_max) const = 0;
  /// Sums over S_n intersected with the factor subgroup `factor`.
  virtual std::vector<double> factor_sphere_sums(double r, int factor, int n_max) const = 0;
  /// Sums over elements whose canonical geodesic is L-transitional.
  virtual std::vector<double> transitional_sphere_sums(double r, int n_max, int eta, int L) const = 0;
};

class ChainEngine final : public GreenEngine {
 public:
  ChainEngine(const Group& g, const StepDistribution& mu, const EngineOptions& opt = {});
  std::string method() const override { return "chain:" + to_string(chain_->lumping()); }
  const Group& group() const override { return group_; }
  double critical_radius() const override { return r_hat_; }
  double green(double r, const Element& x) const override;
  std::vector<double> sphere_sums(double r, int n_max) const override;
  std::vector<double> factor_sphere_sums(double r, int factor, int n_max) const override;
  std::vector<double> transitional_sphere_sums(double r, int n_max, int eta, int L) const override;
  const OrbitChain& chain() const { return *chain_; }

 private:
  std::shared_ptr<const Eigen::VectorXd> totals(double r) const;
  std::vector<double> sums_where(double r, int n_max, const std::function<bool(std::size_t)>& keep) const;

  Group group_;
  std::shared_ptr<const OrbitChain> chain_;
  double r_hat_ = 0.0;
  mutable std::mutex mu_;
  mutable std::unordered_map<double, std::shared_ptr<const Eigen::VectorXd>> cache_;
};

/// Analytic engine for adapted measures on free products when available,
/// otherwise the lumped chain.
std::unique_ptr<GreenEngine> make_green_engine(const Group& g, const StepDistribution& mu,
                                               const EngineOptions& opt = {});

/// Default chain radius for a group and measure (see ChainEngine).
int default_chain_radius(const Group& g, const StepDistribution& mu);

// ---------------------------------------------------------------- growth rates

struct GrowthRateEstimate {
  double r = 0.0;
  int n_max = 0;
  int window_start = 0;
  int window_end = 0;
  std::vector<double> H;
  std::vector<double> log_H;
  double omega_hat = 0.0;     // least-squares slope over the window
  double intercept = 0.0;
  double residual = 0.0;      // rms residual of the fit
  double slope_stderr = 0.0;
  double C_hat = 0.0;         // max H(m)H(n)/H(m+n) over m+n <= n_max
  double adjacent_C = 0.0;    // max over n of H(n)/H(n+1) and H(n+1)/H(n)
  double omega_sup = 0.0;     // sup_n (1/n) log(H(n)/C_hat)
  double spread = 0.0;        // max/min of H(n) e^{-n omega_hat} over the window
  bool agree = true;          // slope and sup form agree within the joint tolerance
};

/// Slope of log H over the last ceil(n_max/2) points plus the sup form.
GrowthRateEstimate omega_from_sums(double r, const std::vector<double>& H);
GrowthRateEstimate omega_estimate(const GreenEngine& engine, double r, int n_max);

/// Least-squares slope of log |S_n| over the same window.
double volume_growth(const Group& g, int n_max);

struct PoincareSeries {
  double r = 0.0;
  double s = 0.0;
  std::vector<double> terms;
  std::vector<double> partial_sums;
  bool divergent_looking = false;  // heuristic: terms nondecreasing over the last third
};
PoincareSeries poincare_series(double r, const std::vector<double>& H, double s);
PoincareSeries poincare_series(const GreenEngine& engine, double r, double s, int n_max);

// ---------------------------------------------------------------- parabolic structure

struct FirstReturnKernel {
  int factor = 0;
  double r = 0.0;
  int cap = 0;
  std::vector<std::pair<Element, double>> kernel;  // factor elements
  double row_sum = 0.0;
  double rho = 0.0;
  double R_P = 0.0;
  bool degenerate = false;
};

/// Kernel of first returns to the factor subgroup P from e, truncated at
/// `cap` steps, and the spectral radius of the induced walk on P.
FirstReturnKernel first_return_kernel(const Group& g, const StepDistribution& mu, double r, int factor, int cap,
                                      const EngineOptions& opt = {}, double degeneracy_tol = 1e-6);

struct FactorGap {
  int factor = 0;
  std::string label;
  double omega_P = 0.0;
  double residual = 0.0;
  bool subexponential = false;  // finite or free abelian factor
  bool gap = false;
  double margin = 0.0;
  std::string confidence;
};

struct GapReport {
  double r = 0.0;
  double omega_gamma = 0.0;
  double residual = 0.0;
  std::vector<FactorGap> factors;
};

GapReport parabolic_gap_check(const GreenEngine& engine, double r, int n_max);

}  // namespace brwlab
