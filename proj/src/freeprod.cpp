#include "brwlab/freeprod.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "brwlab/stats.hpp"
#include "brwlab/transition.hpp"

namespace brwlab {

namespace {

double scaled(double u, double s) { return u == 0.0 ? 0.0 : std::copysign(std::exp(std::log(std::abs(u)) + s), u); }

bool amenable(GroupKind k) { return k == GroupKind::FreeAbelian || k == GroupKind::Finite; }

}  // namespace

// ---------------------------------------------------------------- factor oracle

FactorOracle::FactorOracle(const Group& factor, const StepDistribution& mu, const EngineOptions& opt)
    : g_(factor), mu_(mu) {
  if (!mu.is_symmetric(factor)) throw ValidationError("factor measure must be symmetric");
  if (factor.kind() == GroupKind::Free) {
    bool uniform = true;
    double p = -1;
    std::size_t count = 0;
    for (const auto& [x, m] : mu.support) {
      if (factor.is_identity(x)) {
        pe_ = m;
        continue;
      }
      if (factor.word_length(x) != 1 || (p >= 0 && std::abs(m - p) > 1e-14)) uniform = false;
      p = m;
      ++count;
    }
    if (uniform && count == factor.generators().size()) {
      closed_ = true;
      p_ = p;
      q_ = factor.spec().rank;
      R_ = 1.0 / (pe_ + 2.0 * p_ * std::sqrt(2.0 * q_ - 1.0));
      return;
    }
  }
  ChainOptions co;
  co.radius = opt.factor_radius >= 0 ? opt.factor_radius : default_chain_radius(factor, mu);
  co.class_cap = opt.class_cap;
  chain_ = std::make_shared<OrbitChain>(factor, mu.support, co);
  // Krylov vectors stay inside the domain, so the coefficients are those of
  // the infinite walk
  const int k = static_cast<int>(std::min<std::size_t>(
      {static_cast<std::size_t>(std::max(1, co.radius / chain_->max_step_cost())), 1000, chain_->size()}));
  const auto lz = chain_->lanczos(k, false);
  ja_ = lz.alpha;
  jb_ = lz.beta;
  if (!lz.exhausted && ja_.size() > 16) {
    // edges of the spectrum: 1/R above, lowest Ritz value below
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(ja_.data(), static_cast<Eigen::Index>(ja_.size()));
    Eigen::VectorXd off = Eigen::Map<const Eigen::VectorXd>(jb_.data(), static_cast<Eigen::Index>(jb_.size()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()[0];
    const double hi = amenable(factor.kind()) ? 1.0 : lz.ritz.back();
    a_inf_ = 0.5 * (hi + lo);
    b_inf_ = 0.25 * (hi - lo);
    tail_ = true;
  }
  R_ = amenable(factor.kind()) ? 1.0 : 1.0 / lz.ritz.back();
}

void FactorOracle::check(double t) const {
  if (!(t >= 0)) throw ValidationError("factor Green function needs t >= 0");
  if (t > R_ * (1.0 + 1e-12)) throw DivergentSeries("factor Green function evaluated beyond its radius");
}

double FactorOracle::green_ee(double t) const {
  check(t);
  if (closed_) {
    if (t == 0) return 1.0;
    const double a = 1.0 - t * pe_;
    const double b = (2.0 * q_ - 1.0) * t * p_;
    const double F = (a - std::sqrt(std::max(0.0, a * a - 4.0 * b * t * p_))) / (2.0 * b);
    return 1.0 / (a - t * 2.0 * q_ * p_ * F);
  }
  // continued fraction of the Jacobi matrix
  double d = 1.0 - t * ja_.back();
  if (tail_) {
    const double u = 1.0 - t * a_inf_;
    const double tail = 0.5 * (u + std::sqrt(std::max(0.0, u * u - 4.0 * t * t * b_inf_ * b_inf_)));
    d -= t * t * b_inf_ * b_inf_ / tail;
  }
  for (int i = static_cast<int>(ja_.size()) - 2; i >= 0; --i) d = 1.0 - t * ja_[i] - t * t * jb_[i] * jb_[i] / d;
  return 1.0 / d;
}

std::shared_ptr<const Eigen::VectorXd> FactorOracle::totals(double t) const {
  {
    std::lock_guard<std::mutex> lock(m_);
    if (auto it = cache_.find(t); it != cache_.end()) return it->second;
  }
  auto v = std::make_shared<const Eigen::VectorXd>(chain_->green_totals(t));
  std::lock_guard<std::mutex> lock(m_);
  if (cache_.size() > 64) cache_.clear();
  cache_.emplace(t, v);
  return v;
}

double FactorOracle::green(double t, const Element& x) const {
  check(t);
  if (closed_) {
    if (t == 0) return g_.is_identity(x) ? 1.0 : 0.0;
    const double a = 1.0 - t * pe_;
    const double b = (2.0 * q_ - 1.0) * t * p_;
    const double F = (a - std::sqrt(std::max(0.0, a * a - 4.0 * b * t * p_))) / (2.0 * b);
    return green_ee(t) * std::pow(F, g_.word_length(x));
  }
  auto c = chain_->class_of(x);
  if (!c) throw ValidationError(g_.format(x) + " lies outside the factor domain");
  return scaled((*totals(t))[static_cast<Eigen::Index>(*c)], -chain_->log_multiplicity(*c));
}

std::vector<double> FactorOracle::sphere_sums(double t, int n_max) const {
  check(t);
  std::vector<double> out(n_max + 1, 0.0);
  if (closed_) {
    const auto sizes = g_.sphere_sizes(n_max);
    const double G = green_ee(t);
    if (t == 0) {
      out[0] = 1.0;
      return out;
    }
    const double a = 1.0 - t * pe_;
    const double b = (2.0 * q_ - 1.0) * t * p_;
    const double F = (a - std::sqrt(std::max(0.0, a * a - 4.0 * b * t * p_))) / (2.0 * b);
    for (int n = 0; n <= n_max; ++n) out[n] = sizes[n] * G * std::pow(F, n);
    return out;
  }
  if (n_max > chain_->radius()) throw ValidationError("factor sphere lies outside the factor domain");
  const auto T = totals(t);
  std::vector<CompensatedSum> acc(n_max + 1);
  for (std::size_t c = 0; c < chain_->size(); ++c)
    if (chain_->length(c) <= n_max) acc[chain_->length(c)].add((*T)[static_cast<Eigen::Index>(c)]);
  for (int n = 0; n <= n_max; ++n) out[n] = acc[n].value();
  return out;
}

// ---------------------------------------------------------------- product engine

bool ProductEngine::applicable(const Group& g, const StepDistribution& mu) {
  AdaptedSplit s;
  if (!split_adapted(g, mu, s)) return false;
  for (int f = 0; f < g.factor_count(); ++f)
    if (!s.factor_measures[f].is_symmetric(g.factor(f))) return false;
  return true;
}

ProductEngine::ProductEngine(const Group& g, const StepDistribution& mu, const EngineOptions& opt) : g_(g), mu_(mu) {
  if (!split_adapted(g, mu, split_)) throw UnsupportedSpec("measure is not adapted to the free-product structure");
  mu.validate(g);
  for (int f = 0; f < g.factor_count(); ++f)
    oracles_.push_back(std::make_unique<FactorOracle>(g.factor(f), split_.factor_measures[f], opt));
  if (!std::isnan(opt.r_hat)) {
    R_ = opt.r_hat;
    return;
  }
  double lo = 0.0, hi = 1.0;
  while (try_solve(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw DivergentSeries("return-weight equations solvable for all r; measure is degenerate");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (try_solve(mid) ? lo : hi) = mid;
  }
  R_ = lo;
}

std::optional<ProductState> ProductEngine::try_solve(double r) const {
  const int k = g_.factor_count();
  const auto& a = split_.weights;
  auto phi = [&](const std::vector<double>& w, std::vector<double>& out) {
    std::vector<double> term(k);
    for (int j = 0; j < k; ++j) {
      if (!(w[j] < 1.0)) return false;
      const double z = a[j] * r / (1.0 - w[j]);
      if (z > oracles_[j]->radius()) return false;
      term[j] = (1.0 - w[j]) * oracles_[j]->first_return(z);
    }
    out.assign(k, 0.0);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (j != i) out[i] += term[j];
    return true;
  };
  ProductState st;
  st.r = r;
  std::vector<double> w(k, 0.0), nw;
  bool converged = false;
  // monotone iteration from below, then Newton (the map is convex and
  // nondecreasing, so Newton from below stays below the minimal solution)
  for (int it = 0; it < 60 && !converged; ++it, ++st.iterations) {
    if (!phi(w, nw)) return std::nullopt;
    double diff = 0;
    for (int i = 0; i < k; ++i) diff = std::max(diff, std::abs(nw[i] - w[i]));
    w = nw;
    converged = diff <= 1e-16;
  }
  for (int it = 0; it < 200 && !converged; ++it, ++st.iterations) {
    std::vector<double> f0;
    if (!phi(w, f0)) return std::nullopt;
    Eigen::VectorXd res(k);
    for (int i = 0; i < k; ++i) res[i] = f0[i] - w[i];
    if (res.cwiseAbs().maxCoeff() <= 1e-15) {
      converged = true;
      break;
    }
    Eigen::MatrixXd J(k, k);
    for (int j = 0; j < k; ++j) {
      const double h = 1e-7 * std::max(1e-3, 1.0 - w[j]);
      auto wp = w;
      std::vector<double> f1;
      wp[j] -= h;
      if (!phi(wp, f1)) return std::nullopt;
      for (int i = 0; i < k; ++i) J(i, j) = (f0[i] - f1[i]) / h;
    }
    Eigen::VectorXd delta = (Eigen::MatrixXd::Identity(k, k) - J).fullPivLu().solve(res);
    if (!delta.allFinite()) return std::nullopt;
    std::vector<double> trial(k);
    bool ok = false;
    for (int damp = 0; damp < 40 && !ok; ++damp, delta *= 0.5) {
      for (int i = 0; i < k; ++i) trial[i] = w[i] + delta[i];
      std::vector<double> tmp;
      ok = phi(trial, tmp);
    }
    if (!ok) return std::nullopt;
    w = trial;
  }
  if (!converged) return std::nullopt;
  st.w = w;
  for (int j = 0; j < k; ++j) st.zeta.push_back(a[j] * r / (1.0 - w[j]));
  return st;
}

ProductState ProductEngine::solve(double r) const {
  if (!(r >= 0)) throw ValidationError("r must be nonnegative");
  if (r > R_ * (1.0 + 1e-12)) throw DivergentSeries("r beyond the critical radius of the free product");
  r = std::min(r, R_);
  {
    std::lock_guard<std::mutex> lock(m_);
    if (auto it = cache_.find(r); it != cache_.end()) return it->second;
  }
  auto st = try_solve(r);
  if (!st) throw DivergentSeries("return-weight equations have no solution at r");
  std::lock_guard<std::mutex> lock(m_);
  if (cache_.size() > 256) cache_.clear();
  cache_.emplace(r, *st);
  return *st;
}

double ProductEngine::green_ee(double r) const {
  const auto st = solve(r);
  return oracles_[0]->green_ee(st.zeta[0]) / (1.0 - st.w[0]);
}

double ProductEngine::green(double r, const Element& x) const {
  const auto st = solve(r);
  double v = oracles_[0]->green_ee(st.zeta[0]) / (1.0 - st.w[0]);
  for (const auto& s : g_.syllables(x)) v *= oracles_[s.factor]->first_passage(st.zeta[s.factor], s.element);
  return v;
}

std::vector<std::vector<double>> ProductEngine::factor_series(const ProductState& st, int n_max) const {
  std::vector<std::vector<double>> a;
  for (int j = 0; j < g_.factor_count(); ++j) {
    auto s = oracles_[j]->sphere_sums(st.zeta[j], n_max);
    const double g0 = s[0];
    for (auto& v : s) v /= g0;
    s[0] = 0.0;
    a.push_back(std::move(s));
  }
  return a;
}

std::vector<double> ProductEngine::sphere_sums(double r, int n_max) const {
  if (n_max < 0) throw ValidationError("n_max must be >= 0");
  const auto st = solve(r);
  const auto a = factor_series(st, n_max);
  const int k = g_.factor_count();
  // E[j][n]: alternating syllable sequences of total length n ending in factor j
  std::vector<std::vector<double>> E(k, std::vector<double>(n_max + 1, 0.0));
  for (int n = 1; n <= n_max; ++n)
    for (int j = 0; j < k; ++j) {
      CompensatedSum s;
      for (int m = 1; m <= n; ++m) {
        if (a[j][m] == 0.0) continue;
        double rest = n == m ? 1.0 : 0.0;
        if (n > m)
          for (int i = 0; i < k; ++i)
            if (i != j) rest += E[i][n - m];
        s.add(a[j][m] * rest);
      }
      E[j][n] = s.value();
    }
  const double G = green_ee(r);
  std::vector<double> H(n_max + 1);
  H[0] = G;
  for (int n = 1; n <= n_max; ++n) {
    CompensatedSum s;
    for (int j = 0; j < k; ++j) s.add(E[j][n]);
    H[n] = G * s.value();
  }
  return H;
}

std::vector<double> ProductEngine::factor_sphere_sums(double r, int factor, int n_max) const {
  if (factor < 0 || factor >= g_.factor_count()) throw ValidationError("factor index out of range");
  const auto st = solve(r);
  const auto a = factor_series(st, n_max);
  const double G = green_ee(r);
  std::vector<double> H(n_max + 1);
  H[0] = G;
  for (int n = 1; n <= n_max; ++n) H[n] = G * a[factor][n];
  return H;
}

std::vector<double> ProductEngine::transitional_sphere_sums(double r, int n_max, int eta, int L) const {
  if (n_max > 22) throw CapExceeded("transitional sums enumerate syllable compositions; n_max must be <= 22", n_max);
  const auto st = solve(r);
  const auto a = factor_series(st, n_max);
  const int k = g_.factor_count();
  std::vector<CompensatedSum> acc(n_max + 1);
  std::vector<CosetRun> runs;
  std::function<void(int, int, double)> rec = [&](int total, int last, double weight) {
    if (total > 0 && transitional_geodesic(runs, k, eta, L)) acc[total].add(weight);
    for (int f = 0; f < k; ++f) {
      if (f == last) continue;
      for (int m = 1; total + m <= n_max; ++m) {
        if (a[f][m] == 0.0) continue;
        runs.push_back({f, m});
        rec(total + m, f, weight * a[f][m]);
        runs.pop_back();
      }
    }
  };
  rec(0, -1, 1.0);
  const double G = green_ee(r);
  std::vector<double> H(n_max + 1);
  H[0] = transitional_geodesic({}, k, eta, L) ? G : 0.0;
  for (int n = 1; n <= n_max; ++n) H[n] = G * acc[n].value();
  return H;
}

std::unique_ptr<GreenEngine> make_green_engine(const Group& g, const StepDistribution& mu, const EngineOptions& opt) {
  if (opt.analytic_products && ProductEngine::applicable(g, mu)) return std::make_unique<ProductEngine>(g, mu, opt);
  return std::make_unique<ChainEngine>(g, mu, opt);
}

// ---------------------------------------------------------------- operations

namespace {

void require_two_factors(const ProductEngine& e) {
  if (e.group().factor_count() != 2) throw UnsupportedSpec("this operation is defined for two factors");
}

double kernel_at_identity(const FirstReturnKernel& k) {
  for (const auto& [x, v] : k.kernel)
    if (x.code().empty()) return v;
  return 0.0;
}

}  // namespace

ReturnWeights return_weights(const ProductEngine& engine, double s, int cap) {
  require_two_factors(engine);
  if (cap < 2) throw ValidationError("cap must be >= 2");
  ReturnWeights rw;
  rw.s = s;
  rw.cap = cap;
  if (s == 0.0) return rw;
  const auto st = engine.solve(s);
  rw.w = st.w[0];
  rw.w_prime = st.w[1];
  rw.valid = rw.w < 1.0 && rw.w_prime < 1.0;
  const Group& g = engine.group();
  const double hold = s * engine.split().identity_mass;
  // one-step holding paths are factor-0 steps, so they belong to w' only
  rw.w_truncated = kernel_at_identity(first_return_kernel(g, engine.measure(), s, 0, cap)) - hold;
  rw.w_prime_truncated = kernel_at_identity(first_return_kernel(g, engine.measure(), s, 1, cap));
  rw.residual = std::max(rw.w - rw.w_truncated, rw.w_prime - rw.w_prime_truncated);
  return rw;
}

ZetaMaps zeta_maps(const ProductEngine& engine, double s) {
  require_two_factors(engine);
  ZetaMaps z;
  z.s = s;
  z.R_mu0 = engine.oracle(0).radius();
  z.R_mu1 = engine.oracle(1).radius();
  const auto st = engine.solve(s);
  z.zeta0 = st.zeta[0];
  z.zeta1 = st.zeta[1];
  z.valid = st.w[0] < 1.0 && st.w[1] < 1.0;
  return z;
}

TransferCheck verify_transfer(const ProductEngine& analytic, const GreenEngine& direct, double s,
                              const std::vector<std::pair<Element, Element>>& pairs, double budget) {
  const Group& g = analytic.group();
  const Group& f0 = g.factor(0);
  const auto st = analytic.solve(s);
  TransferCheck tc;
  tc.s = s;
  tc.budget = budget;
  for (const auto& [x, y] : pairs) {
    const Element z = f0.multiply(f0.inverse(x), y);
    TransferRow row;
    row.x = x;
    row.y = y;
    row.lhs = direct.green(s, g.embed(0, z)) * (1.0 - st.w[0]);
    row.rhs = analytic.oracle(0).green(st.zeta[0], z);
    row.rel_error = std::abs(row.lhs - row.rhs) / std::abs(row.rhs);
    tc.max_rel_error = std::max(tc.max_rel_error, row.rel_error);
    tc.rows.push_back(row);
  }
  tc.pass = tc.max_rel_error <= budget;
  return tc;
}

MultiplicativityCheck check_multiplicativity(const ProductEngine& analytic, const ChainEngine& direct, double r,
                                             int max_length) {
  const Group& g = direct.group();
  const auto& ch = direct.chain();
  MultiplicativityCheck mc;
  mc.r = r;
  mc.max_length = max_length;
  const double G = direct.green(r, g.identity());
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  for (std::size_t c = 0; c < ch.size(); ++c) {
    if (ch.length(c) > max_length) continue;
    const Element& x = ch.representative(c);
    const double gx = direct.green(r, x);
    ++mc.elements;
    mc.max_formula_error = std::max(mc.max_formula_error, rel(gx, analytic.green(r, x)));
    const auto syl = g.syllables(x);
    for (std::size_t k = 1; k < syl.size(); ++k) {
      const Element head = g.from_syllables({syl.begin(), syl.begin() + static_cast<long>(k)});
      const Element tail = g.from_syllables({syl.begin() + static_cast<long>(k), syl.end()});
      const double pred = direct.green(r, head) * direct.green(r, tail) / G;
      mc.max_split_error = std::max(mc.max_split_error, rel(gx, pred));
    }
  }
  return mc;
}

std::vector<LandscapeRow> example_landscape(const Group& g, const std::vector<double>& alphas,
                                            const std::vector<double>& r_fractions, int n_max,
                                            const EngineOptions& opt, double degeneracy_tol) {
  if (g.kind() != GroupKind::FreeProduct || g.factor_count() != 2)
    throw UnsupportedSpec("landscape needs a free product of two factors");
  std::vector<LandscapeRow> rows;
  for (double alpha : alphas) {
    const auto mu = StepDistribution::adapted(g, alpha);
    ProductEngine eng(g, mu, opt);
    const double R = eng.critical_radius();
    const auto stR = eng.solve(R);
    std::vector<double> RP(2);
    std::vector<bool> degenerate(2);
    for (int i = 0; i < 2; ++i) {
      const double rho_i = 1.0 / eng.oracle(i).radius();
      RP[i] = 1.0 / (eng.split().weights[i] * R * rho_i + stR.w[i]);
      degenerate[i] = std::abs(RP[i] - 1.0) <= degeneracy_tol;
    }
    for (double fr : r_fractions) {
      LandscapeRow row;
      row.alpha = alpha;
      row.r = fr * R;
      row.R_hat = R;
      const auto gap = parabolic_gap_check(eng, row.r, n_max);
      row.omega_gamma = gap.omega_gamma;
      row.residual = gap.residual;
      for (int i = 0; i < 2; ++i) {
        row.omega_P.push_back(gap.factors[i].omega_P);
        row.gap.push_back(gap.factors[i].gap);
        const double s = std::isfinite(gap.factors[i].omega_P) ? std::max(0.0, gap.factors[i].omega_P) : 0.0;
        row.theta_divergent_looking.push_back(
            poincare_series(row.r, eng.factor_sphere_sums(row.r, i, n_max), s).divergent_looking);
      }
      row.degenerate = degenerate;
      row.R_P_at_critical = RP;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace brwlab
