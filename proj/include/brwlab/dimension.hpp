#pragma once

// Dimension estimates for the sampled limit set: box counting and covering
// sums from above, energies of the empirical measures chi_n from below.

#include <cstdint>
#include <vector>

#include "brwlab/brw.hpp"
#include "brwlab/groups.hpp"

namespace brwlab {

struct BoxCount {
  double dimension = 0.0;   // slope of log N(eps) against log(1/eps)
  double residual = 0.0;    // rms residual of the fit
  std::vector<int> scales;  // eps = lambda^k
  std::vector<std::size_t> counts;
  bool degenerate = false;  // single cell: dimension 0 by convention
};

/// Greedy eps-covers of depth-d cells under the visual metric. Needs at least
/// four scales k with 0 < k < d.
BoxCount box_counting_dim(const Group& g, const std::vector<Element>& cells, double lambda,
                          const std::vector<int>& scales);

struct CoveringSums {
  double h = 0.0;
  double alpha = 0.0;
  int m0 = 0;                 // tails[i] = sum over n >= m0 + i
  std::vector<double> terms;  // M_n lambda^{hn} n^{h alpha} (log n)^h, n = 0..n_max
  std::vector<double> tails;
  double log_slope = 0.0;     // slope of log terms over the fit window
  bool decaying = false;
};

/// Covering sums of sphere counts M_n (n = 0..n_max). The verdict reads the
/// slope of the log-terms over [lo, hi].
CoveringSums covering_sum(const std::vector<double>& M, double lambda, double h, int lo, int hi, double alpha = 0.0);

/// The exponent where the covering verdict flips (bisection on the slope).
double covering_threshold(const std::vector<double>& M, double lambda, int lo, int hi, double alpha = 0.0);

struct EmpiricalMeasure {
  int n = 0;
  int eta = 0;
  int L = 0;
  double C = 0.0;
  double E_hat = 0.0;         // held-out estimate of E[M_{n,L}]
  std::uint64_t M = 0;        // M_{n,L} of this replica
  bool in_B = false;          // E/2 <= M <= C E
  std::vector<Element> atoms; // the visited transitional elements of S_n
  double mass() const { return in_B ? static_cast<double>(M) / E_hat : 0.0; }
};

/// Mean of M_{n,L} over a batch of traces.
double mean_transitional_count(const Group& g, const std::vector<Trace>& batch, int n, int eta, int L);

EmpiricalMeasure chi_n(const Group& g, const Trace& trace, int n, int eta, int L, double C, double E_hat);

/// Double sum of dhat(x,y)^{-h} over atom pairs divided by E_hat^2, zero off
/// B_n. dhat is the visual distance with lambda^{|x|} on the diagonal.
double energy_W(const Group& g, const EmpiricalMeasure& chi, double h, double lambda);

struct EnergyReport {
  double h = 0.0;
  std::vector<int> ns;
  std::vector<double> mean_W;    // replica mean of W_n
  std::vector<double> stderr_W;
  std::vector<double> fraction_in_B;
  double slope = 0.0;            // mean of per-replica least-squares slopes of W_n
  double slope_stderr = 0.0;
  double t_stat = 0.0;
  bool upward = false;           // t_stat above the one-sided 2.5% normal quantile
};

/// W_n over [lo, hi] for every trace; E_hat from the held-out batch.
EnergyReport energy_trend(const Group& g, const std::vector<Trace>& traces, const std::vector<Trace>& held_out,
                          double h, double lambda, int lo, int hi, int eta, int L, double C);

struct HdimReport {
  double r = 0.0;
  double lambda = 0.0;
  double omega_hat = 0.0;
  double target = 0.0;           // omega_hat / (-log lambda)
  double h_lower = 0.0;          // largest grid h without an upward energy trend
  double h_upper = 0.0;          // covering threshold
  double box_dimension = 0.0;    // of the limit-ray cells
  int lo = 0, hi = 0;
  int replicas = 0;
  std::vector<EnergyReport> energies;
  bool contains_target() const { return h_lower <= target && target <= h_upper; }
  double width() const { return h_upper - h_lower; }
};

struct HdimOptions {
  int lo = 8, hi = 14;
  int eta = 0, L = 0;
  double C = 10.0;
  double alpha = 0.0;
  std::vector<double> h_grid;    // default: 0, 0.05, ..., up to 1.5 target
  int ray_depth = 10;
};

/// The sandwich [h_lower, h_upper] around omega_hat / (-log lambda).
HdimReport hdim_report(const Group& g, const std::vector<Trace>& traces, const std::vector<Trace>& held_out, double r,
                       double lambda, double omega_hat, const HdimOptions& opt = {});

}  // namespace brwlab
