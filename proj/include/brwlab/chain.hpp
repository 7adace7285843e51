#pragma once

// Random walk lumped over orbits of Cayley-graph automorphisms that fix e and
// preserve the step weights. The lumped chain is exact: every element of a
// class has the same transition probabilities into every other class, so
// per-element quantities are class totals divided by the class size.

#include <Eigen/Sparse>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "brwlab/groups.hpp"

namespace brwlab {

enum class Lumping { Radial, SignedPermutation, Syllabic, Identity };

std::string to_string(Lumping l);

struct ChainOptions {
  int radius = 64;                    // domain: weighted word length <= radius
  std::size_t class_cap = 5'000'000;
  std::vector<int> factor_costs;      // free products: cost of one letter of factor i
  bool lump = true;                   // false forces element-level classes
};

struct LanczosResult {
  std::vector<double> ritz;   // top Ritz value after k+1 steps
  std::vector<double> alpha;  // Jacobi matrix of the spectral measure at e
  std::vector<double> beta;
  bool exhausted = false;     // Krylov space stopped growing
};

class OrbitChain {
 public:
  using Weights = std::vector<std::pair<Element, double>>;

  OrbitChain(const Group& g, const Weights& weights, ChainOptions opt = {});

  const Group& group() const { return group_; }
  Lumping lumping() const { return lumping_; }
  std::size_t size() const { return classes_.size(); }
  int radius() const { return opt_.radius; }
  bool symmetric() const { return symmetric_; }
  double step_mass() const { return step_mass_; }
  int max_step_cost() const { return max_step_cost_; }

  const Element& representative(std::size_t c) const { return classes_[c].rep; }
  int length(std::size_t c) const { return classes_[c].length; }
  int weighted_length(std::size_t c) const { return classes_[c].wlen; }
  double log_multiplicity(std::size_t c) const { return classes_[c].logm; }
  std::optional<std::size_t> class_of(const Element& x) const;
  int weighted_length(const Element& x) const;
  /// Mass leaving the domain in one step from class c.
  double exit_mass(std::size_t c) const { return exit_[c]; }

  /// Row-substochastic class transition matrix K (row = from).
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& transitions() const { return K_; }
  /// Symmetrised form sqrt(m_i/m_j) K_ij (requires a symmetric measure).
  const Eigen::SparseMatrix<double>& symmetrized() const;

  /// Green function of the walk killed on leaving the domain, per element of
  /// each class. Throws DivergentSeries when r is at or beyond the domain's
  /// critical parameter.
  Eigen::VectorXd green(double r) const;
  /// Class totals of the same (green(r)[c] * multiplicity), valid for classes
  /// with moderate multiplicity.
  Eigen::VectorXd green_totals(double r) const;

  /// Class masses of the n-step distribution from e, n = 0..N.
  std::vector<Eigen::VectorXd> powers(int N) const;
  /// True when the domain contains every path of N steps.
  bool covers_steps(int N) const { return static_cast<long>(N) * max_step_cost_ <= opt_.radius; }

  /// Sum over n <= N of r^n * (class mass of paths from e whose interior
  /// points lie in allowed classes). The n = 0 term is included.
  Eigen::VectorXd restricted_series(double r, const std::vector<char>& allowed, int N) const;

  /// Lanczos on the symmetrised chain started at e. With every_step false
  /// only the final Ritz value is computed (earlier entries are NaN).
  LanczosResult lanczos(int steps, bool every_step = true) const;

 private:
  struct Class {
    Element rep;
    int length = 0;
    int wlen = 0;
    double logm = 0.0;
  };

  Eigen::VectorXd solve_resolvent(double r) const;
  std::string key(const Element& x) const;
  std::string factor_key(int f, const Element& x) const;
  double log_mult_of(const Element& x) const;
  double factor_log_mult(int f, const Element& x) const;

  Group group_;
  ChainOptions opt_;
  Lumping lumping_ = Lumping::Identity;
  std::vector<Lumping> factor_lumping_;
  std::vector<Class> classes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> exit_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> K_;
  mutable Eigen::SparseMatrix<double> S_;
  mutable bool S_built_ = false;
  bool symmetric_ = false;
  double step_mass_ = 0.0;
  int max_step_cost_ = 1;
};

/// Lumping that the given weights admit on a group (Identity if none).
Lumping detect_lumping(const Group& g, const OrbitChain::Weights& weights);

}  // namespace brwlab
