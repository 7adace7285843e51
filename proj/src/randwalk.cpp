#include "brwlab/randwalk.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "brwlab/stats.hpp"
#include "brwlab/transition.hpp"

namespace brwlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double scaled(double u, double s) { return u == 0.0 ? 0.0 : std::copysign(std::exp(std::log(std::abs(u)) + s), u); }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

int support_length(const Group& g, const StepDistribution& mu) { return std::max(1, mu.max_length(g)); }

double resolve_rho(const Group& g, const StepDistribution& mu, const GreenOptions& opt) {
  if (!std::isnan(opt.rho_hat)) return opt.rho_hat;
  if (!mu.is_symmetric(g)) return kNaN;
  for (int k = opt.spectral_steps; k >= 8; k /= 2) {
    try {
      return spectral_radius(g, mu, k, 200'000).rho_lower;
    } catch (const CapExceeded&) {
    }
  }
  return kNaN;
}

void finish_value(GreenValue& v, const std::vector<double>& partial, double r, double rho) {
  v.value = partial.back();
  if (std::isfinite(rho) && r * rho < 1.0) {
    const double q = r * rho;
    v.tail_bound = std::pow(q, v.N + 1) / (1.0 - q);
    v.certified = true;
  } else {
    v.tail_bound = kInf;
    v.certified = false;
  }
  v.extrapolated = v.value;
  const std::size_t n = partial.size();
  if (n >= 5) {
    const double d1 = partial[n - 3] - partial[n - 5];
    const double d2 = partial[n - 1] - partial[n - 3];
    const double den = d2 - d1;
    if (d1 > 0 && d2 > 0 && d2 < d1 && std::abs(den) > 0) v.extrapolated = v.value - d2 * d2 / den;
  }
}

bool structurally_nonamenable(const GroupSpec& s) {
  switch (s.kind) {
    case GroupKind::Free: return true;
    case GroupKind::FreeAbelian:
    case GroupKind::Finite: return false;
    case GroupKind::FreeProduct: {
      if (s.factors.size() > 2) return true;
      auto order2 = [](const GroupSpec& f) { return f.kind == GroupKind::Finite && f.table.size() == 2; };
      return !(order2(s.factors[0]) && order2(s.factors[1]));
    }
  }
  return false;
}


}  // namespace

// ---------------------------------------------------------------- convolution

double ConvolutionTable::p(int n, const Element& x) const {
  if (n < 0 || n > N_) throw ValidationError("step index outside the table");
  if (chain_) {
    auto c = chain_->class_of(x);
    if (!c) return 0.0;
    return scaled(mass_[n][static_cast<Eigen::Index>(*c)], -chain_->log_multiplicity(*c));
  }
  auto it = rows_[n].find(x);
  return it == rows_[n].end() ? 0.0 : it->second;
}

double ConvolutionTable::row_sum(int n) const {
  if (n < 0 || n > N_) throw ValidationError("step index outside the table");
  CompensatedSum s;
  if (chain_) {
    for (Eigen::Index c = 0; c < mass_[n].size(); ++c) s.add(mass_[n][c]);
  } else {
    for (const auto& e : rows_[n]) s.add(e.second);
  }
  return s.value();
}

void ConvolutionTable::write_csv(std::ostream& os) const {
  os << "n,x,p_n\n";
  for (int n = 0; n <= N_; ++n) {
    std::vector<std::pair<Element, double>> rows;
    if (chain_) {
      for (std::size_t c = 0; c < chain_->size(); ++c) {
        const double m = mass_[n][static_cast<Eigen::Index>(c)];
        if (m != 0.0) rows.emplace_back(chain_->representative(c), scaled(m, -chain_->log_multiplicity(c)));
      }
    } else {
      rows.assign(rows_[n].begin(), rows_[n].end());
    }
    std::sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
      const int la = group_->word_length(a.first), lb = group_->word_length(b.first);
      return la != lb ? la < lb : a.first < b.first;
    });
    for (const auto& [x, p] : rows) os << n << ',' << group_->format(x) << ',' << fmt(p) << '\n';
  }
}

ConvolutionTable convolve(const Group& g, const StepDistribution& mu, int N, const ConvolveOptions& opt) {
  if (N < 0) throw ValidationError("number of steps must be >= 0");
  ConvolutionTable t;
  t.N_ = N;
  t.group_ = std::make_shared<Group>(g);
  const int maxlen = support_length(g, mu);
  if (opt.lump && detect_lumping(g, mu.support) != Lumping::Identity) {
    ChainOptions co;
    co.radius = N * maxlen;
    co.class_cap = opt.cap;
    auto ch = std::make_shared<OrbitChain>(g, mu.support, co);
    t.mass_ = ch->powers(N);
    t.chain_ = std::move(ch);
    return t;
  }
  t.rows_.resize(N + 1);
  t.rows_[0][g.identity()] = 1.0;
  for (int n = 0; n < N; ++n) {
    auto& next = t.rows_[n + 1];
    for (const auto& [x, p] : t.rows_[n])
      for (const auto& [s, q] : mu.support) next[g.multiply(x, s)] += p * q;
    if (next.size() > opt.cap)
      throw CapExceeded("convolution support exceeds cap " + std::to_string(opt.cap), static_cast<double>(next.size()));
  }
  return t;
}

// ---------------------------------------------------------------- spectral radius

SpectralRadiusEstimate spectral_radius(const Group& g, const StepDistribution& mu, int N, std::size_t class_cap) {
  if (N < 1) throw ValidationError("spectral radius needs N >= 1");
  if (!mu.is_symmetric(g)) throw ValidationError("monotone certificate needs a symmetric measure");
  SpectralRadiusEstimate est;
  est.steps = N;
  ChainOptions co;
  co.radius = N * support_length(g, mu);
  co.class_cap = class_cap;
  OrbitChain ch(g, mu.support, co);
  est.sequence = ch.lanczos(N).ritz;
  for (std::size_t k = 1; k < est.sequence.size(); ++k)
    if (est.sequence[k] < est.sequence[k - 1] - 1e-14) est.monotone = false;
  est.rho_lower = est.sequence.back();
  est.R_hat = 1.0 / est.rho_lower;
  const int M = N / 2;
  if (M >= 1) {
    const double n2 = double(N) * N, m2 = double(M) * M;
    est.rho_extrapolated = (n2 * est.rho_lower - m2 * est.sequence[M - 1]) / (n2 - m2);
  } else {
    est.rho_extrapolated = est.rho_lower;
  }
  Eigen::SparseMatrix<double> KT = ch.transitions().transpose();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ch.size()));
  v[0] = 1.0;
  for (int k = 0; k < 2 * N; ++k) v = KT * v;
  est.root_form = std::pow(std::max(v[0], 0.0), 1.0 / (2.0 * N));
  est.nonamenable = structurally_nonamenable(g.spec());
  return est;
}

// ---------------------------------------------------------------- Green functions

std::vector<GreenValue> green_many(const Group& g, const StepDistribution& mu, double r, const std::vector<Element>& xs,
                                   int N, const GreenOptions& opt) {
  if (!(r >= 0)) throw ValidationError("r must be nonnegative");
  if (N < 0) throw ValidationError("N must be >= 0");
  const int maxlen = support_length(g, mu);
  for (const auto& x : xs)
    if (g.word_length(x) > static_cast<long>(N) * maxlen)
      throw ValidationError("N is too small for the walk to reach " + g.format(x));
  const double rho = resolve_rho(g, mu, opt);
  if (std::isfinite(rho) && r * rho > 1.0 + opt.tolerance)
    throw DivergentSeries("r=" + fmt(r) + " exceeds the estimated convergence radius " + fmt(1.0 / rho));
  ConvolveOptions co;
  co.cap = opt.cap;
  const auto table = convolve(g, mu, N, co);
  std::vector<GreenValue> out;
  for (const auto& x : xs) {
    GreenValue v;
    v.r = r;
    v.N = N;
    CompensatedSum s;
    std::vector<double> partial;
    double rn = 1.0;
    for (int n = 0; n <= N; ++n) {
      s.add(rn * table.p(n, x));
      partial.push_back(s.value());
      rn *= r;
    }
    finish_value(v, partial, r, rho);
    out.push_back(v);
  }
  return out;
}

GreenValue green(const Group& g, const StepDistribution& mu, double r, const Element& x, int N,
                 const GreenOptions& opt) {
  return green_many(g, mu, r, {x}, N, opt).front();
}

GreenValue green_restricted(const Group& g, const StepDistribution& mu, double r, const Element& x, const Element& y,
                            const ElementPredicate& A, int N, const GreenOptions& opt) {
  if (!(r >= 0)) throw ValidationError("r must be nonnegative");
  if (N < 0) throw ValidationError("N must be >= 0");
  const int maxlen = support_length(g, mu);
  const Element xinv = g.inverse(x);
  const int dxy = g.word_length(g.multiply(xinv, y));
  if (dxy > static_cast<long>(N) * maxlen) throw ValidationError("N is too small to connect the endpoints");
  const double rho = resolve_rho(g, mu, opt);
  if (std::isfinite(rho) && r * rho > 1.0 + opt.tolerance)
    throw DivergentSeries("r=" + fmt(r) + " exceeds the estimated convergence radius " + fmt(1.0 / rho));

  // every point of a path of length <= N from x to y lies this close to x
  const int needed = (N * maxlen + dxy) / 2;
  int radius = opt.radius >= 0 ? std::min(opt.radius, needed) : needed;
  {
    const auto sizes = g.sphere_sizes(radius);
    double ball = 0;
    int fit = -1;
    for (int n = 0; n <= radius; ++n) {
      ball += sizes[n];
      if (ball > static_cast<double>(opt.cap)) break;
      fit = n;
    }
    radius = std::max(fit, 0);
  }
  GreenValue v;
  v.r = r;
  v.N = N;
  std::unordered_map<Element, double, ElementHash> cur{{x, 1.0}};
  CompensatedSum total;
  if (x == y) total.add(1.0);
  std::vector<double> partial{total.value()};
  double rn = 1.0;
  for (int n = 1; n <= N; ++n) {
    std::unordered_map<Element, double, ElementHash> next;
    for (const auto& [z, p] : cur)
      for (const auto& [s, q] : mu.support) {
        Element w = g.multiply(z, s);
        if (g.word_length(g.multiply(g.inverse(w), y)) > static_cast<long>(N - n) * maxlen) continue;
        if (g.word_length(g.multiply(xinv, w)) > radius) {
          v.domain_truncated = true;
          continue;
        }
        next[w] += p * q;
      }
    rn *= r;
    if (auto it = next.find(y); it != next.end()) total.add(rn * it->second);
    partial.push_back(total.value());
    for (auto it = next.begin(); it != next.end();) it = A(it->first) ? std::next(it) : next.erase(it);
    cur.swap(next);
  }
  finish_value(v, partial, r, rho);
  return v;
}

// ---------------------------------------------------------------- chain engine

int default_chain_radius(const Group& g, const StepDistribution& mu) {
  switch (detect_lumping(g, mu.support)) {
    case Lumping::Radial: return 4096;
    case Lumping::SignedPermutation:
      switch (g.spec().rank) {
        case 1: return 4096;
        case 2: return 600;
        case 3: return 150;
        default: return 60;
      }
    case Lumping::Syllabic: return 12;
    case Lumping::Identity: break;
  }
  const auto sizes = g.sphere_sizes(4096);
  double ball = 0;
  int n = 0;
  for (; n < static_cast<int>(sizes.size()); ++n) {
    ball += sizes[n];
    if (ball > 2e5) break;
  }
  return std::max(1, n - 1);
}

ChainEngine::ChainEngine(const Group& g, const StepDistribution& mu, const EngineOptions& opt) : group_(g) {
  mu.validate(g);
  ChainOptions co;
  co.radius = opt.chain_radius >= 0 ? opt.chain_radius : default_chain_radius(g, mu);
  co.class_cap = opt.class_cap;
  if (g.kind() == GroupKind::FreeProduct) co.factor_costs = opt.factor_costs;
  chain_ = std::make_shared<OrbitChain>(g, mu.support, co);
  if (!std::isnan(opt.r_hat)) {
    r_hat_ = opt.r_hat;
    return;
  }
  const auto l = chain_->lumping();
  if (l == Lumping::Radial || (l == Lumping::SignedPermutation && g.spec().rank == 1)) {
    // Ritz value from a Krylov space twice as deep as the domain, so that the
    // domain resolvent stays positive definite at r = R_hat
    const int len = chain_->max_step_cost();
    const int k = std::max(2, 2 * co.radius / len);
    ChainOptions ao;
    ao.radius = k * len;
    OrbitChain aux(g, mu.support, ao);
    r_hat_ = 1.0 / aux.lanczos(k, false).ritz.back();
  } else {
    const int k = static_cast<int>(std::min<std::size_t>(std::max(opt.spectral_steps, 2), chain_->size()));
    r_hat_ = 1.0 / chain_->lanczos(k, false).ritz.back();
  }
}

std::shared_ptr<const Eigen::VectorXd> ChainEngine::totals(double r) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = cache_.find(r); it != cache_.end()) return it->second;
  }
  auto t = std::make_shared<const Eigen::VectorXd>(chain_->green_totals(r));
  std::lock_guard<std::mutex> lock(mu_);
  if (cache_.size() > 64) cache_.clear();
  cache_.emplace(r, t);
  return t;
}

double ChainEngine::green(double r, const Element& x) const {
  auto c = chain_->class_of(x);
  if (!c) throw ValidationError(group_.format(x) + " lies outside the computational domain");
  return scaled((*totals(r))[static_cast<Eigen::Index>(*c)], -chain_->log_multiplicity(*c));
}

std::vector<double> ChainEngine::sums_where(double r, int n_max, const std::function<bool(std::size_t)>& keep) const {
  if (n_max < 0) throw ValidationError("n_max must be >= 0");
  int cost = 1;
  if (group_.kind() == GroupKind::FreeProduct)
    for (int f = 0; f < group_.factor_count(); ++f) {
      // cost of one letter equals the weighted length of a factor generator
      const auto& gens = group_.factor(f).generators();
      cost = std::max(cost, chain_->weighted_length(group_.embed(f, gens.front().element)));
    }
  if (static_cast<long>(n_max) * cost > chain_->radius())
    throw ValidationError("sphere " + std::to_string(n_max) + " is not inside the computational domain (radius " +
                          std::to_string(chain_->radius()) + ")");
  const auto T = totals(r);
  std::vector<CompensatedSum> acc(n_max + 1);
  for (std::size_t c = 0; c < chain_->size(); ++c) {
    const int n = chain_->length(c);
    if (n <= n_max && keep(c)) acc[n].add((*T)[static_cast<Eigen::Index>(c)]);
  }
  std::vector<double> H;
  for (const auto& s : acc) H.push_back(s.value());
  return H;
}

std::vector<double> ChainEngine::sphere_sums(double r, int n_max) const {
  return sums_where(r, n_max, [](std::size_t) { return true; });
}

std::vector<double> ChainEngine::factor_sphere_sums(double r, int factor, int n_max) const {
  if (group_.kind() != GroupKind::FreeProduct) throw UnsupportedSpec("factor sums need a free product");
  if (factor < 0 || factor >= group_.factor_count()) throw ValidationError("factor index out of range");
  return sums_where(r, n_max, [&](std::size_t c) {
    auto s = group_.syllables(chain_->representative(c));
    return s.empty() || (s.size() == 1 && s[0].factor == factor);
  });
}

std::vector<double> ChainEngine::transitional_sphere_sums(double r, int n_max, int eta, int L) const {
  if (group_.kind() == GroupKind::Free) return sphere_sums(r, n_max);
  if (group_.kind() != GroupKind::FreeProduct) throw UnsupportedSpec("transition points need a free group or free product");
  const int k = group_.factor_count();
  return sums_where(r, n_max, [&](std::size_t c) {
    return transitional_geodesic(coset_runs(group_, chain_->representative(c)), k, eta, L);
  });
}

// ---------------------------------------------------------------- growth rates

GrowthRateEstimate omega_from_sums(double r, const std::vector<double>& H) {
  if (H.size() < 7) throw ValidationError("growth rate needs n_max >= 6");
  GrowthRateEstimate est;
  est.r = r;
  est.n_max = static_cast<int>(H.size()) - 1;
  est.H = H;
  for (double h : H) est.log_H.push_back(h > 0 ? std::log(h) : -kInf);
  const int k = (est.n_max + 1) / 2;
  est.window_start = est.n_max - k + 1;
  est.window_end = est.n_max;
  std::vector<double> xs, ys;
  for (int n = est.window_start; n <= est.window_end; ++n) {
    xs.push_back(n);
    ys.push_back(est.log_H[n]);
  }
  if (std::any_of(ys.begin(), ys.end(), [](double y) { return !std::isfinite(y); })) {
    // sums vanish on the window (finite factor)
    est.omega_hat = -kInf;
    est.omega_sup = -kInf;
    est.agree = true;
    return est;
  }
  const auto fit = fit_line(xs, ys);
  est.omega_hat = fit.slope;
  est.intercept = fit.intercept;
  est.residual = fit.rms_residual;
  est.slope_stderr = fit.slope_stderr;

  est.C_hat = 0;
  for (int m = 1; m <= est.n_max; ++m)
    for (int n = m; m + n <= est.n_max; ++n)
      if (H[m + n] > 0) est.C_hat = std::max(est.C_hat, H[m] * H[n] / H[m + n]);
  est.adjacent_C = 0;
  for (int n = 0; n < est.n_max; ++n)
    if (H[n] > 0 && H[n + 1] > 0) est.adjacent_C = std::max({est.adjacent_C, H[n] / H[n + 1], H[n + 1] / H[n]});
  est.omega_sup = -kInf;
  for (int n = 1; n <= est.n_max; ++n)
    if (H[n] > 0) est.omega_sup = std::max(est.omega_sup, (est.log_H[n] - std::log(est.C_hat)) / n);
  double lo = kInf, hi = -kInf;
  for (int n = est.window_start; n <= est.window_end; ++n) {
    const double v = est.log_H[n] - n * est.omega_hat;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  est.spread = std::exp(hi - lo);
  const double tol = est.residual + 2.0 * est.slope_stderr + std::log(std::max(est.C_hat, 1.0)) / est.n_max;
  est.agree = std::abs(est.omega_hat - est.omega_sup) <= tol;
  return est;
}

GrowthRateEstimate omega_estimate(const GreenEngine& engine, double r, int n_max) {
  if (n_max < 6) throw ValidationError("growth rate needs n_max >= 6");
  return omega_from_sums(r, engine.sphere_sums(r, n_max));
}

double volume_growth(const Group& g, int n_max) {
  if (n_max < 6) throw ValidationError("growth rate needs n_max >= 6");
  const auto sizes = g.sphere_sizes(n_max);
  const int k = (n_max + 1) / 2;
  std::vector<double> xs, ys;
  for (int n = n_max - k + 1; n <= n_max; ++n) {
    xs.push_back(n);
    ys.push_back(std::log(sizes[n]));
  }
  return fit_line(xs, ys).slope;
}

PoincareSeries poincare_series(double r, const std::vector<double>& H, double s) {
  if (!(s >= 0)) throw ValidationError("s must be >= 0");
  PoincareSeries ps;
  ps.r = r;
  ps.s = s;
  CompensatedSum acc;
  for (std::size_t n = 0; n < H.size(); ++n) {
    const double t = H[n] * std::exp(-s * static_cast<double>(n));
    ps.terms.push_back(t);
    acc.add(t);
    ps.partial_sums.push_back(acc.value());
  }
  const std::size_t len = ps.terms.size();
  const std::size_t third = (len + 2) / 3;
  if (len >= 3) {
    ps.divergent_looking = true;
    for (std::size_t i = len - third; i + 1 < len; ++i)
      if (ps.terms[i + 1] < ps.terms[i] * (1.0 - 1e-9)) ps.divergent_looking = false;
  }
  return ps;
}

PoincareSeries poincare_series(const GreenEngine& engine, double r, double s, int n_max) {
  return poincare_series(r, engine.sphere_sums(r, n_max), s);
}

// ---------------------------------------------------------------- parabolic structure

FirstReturnKernel first_return_kernel(const Group& g, const StepDistribution& mu, double r, int factor, int cap,
                                      const EngineOptions& opt, double degeneracy_tol) {
  if (g.kind() != GroupKind::FreeProduct) throw UnsupportedSpec("first-return kernels need a free product");
  if (factor < 0 || factor >= g.factor_count()) throw ValidationError("factor index out of range");
  if (cap < 2) throw ValidationError("cap too small for any path that leaves the factor and returns");
  if (!(r > 0)) throw ValidationError("r must be positive");
  const int len = support_length(g, mu);
  ChainOptions co;
  co.radius = opt.chain_radius >= 0 ? opt.chain_radius : (cap / 2 + 1) * len;
  co.class_cap = opt.class_cap;
  OrbitChain ch(g, mu.support, co);

  auto in_factor = [&](const Element& x) {
    auto s = g.syllables(x);
    return s.empty() || (s.size() == 1 && s[0].factor == factor);
  };
  std::vector<char> allowed(ch.size());
  for (std::size_t c = 0; c < ch.size(); ++c) allowed[c] = !in_factor(ch.representative(c));
  Eigen::VectorXd acc = ch.restricted_series(r, allowed, cap);
  acc[0] -= 1.0;

  FirstReturnKernel out;
  out.factor = factor;
  out.r = r;
  out.cap = cap;
  const Group& P = g.factor(factor);
  int reach = 0;
  for (std::size_t c = 0; c < ch.size(); ++c)
    if (!allowed[c] && acc[static_cast<Eigen::Index>(c)] > 0) reach = std::max(reach, ch.length(c));
  CompensatedSum row;
  for (int n = 0; n <= reach; ++n)
    for (const auto& p : P.sphere(n)) {
      const Element x = g.embed(factor, p);
      auto c = ch.class_of(x);
      if (!c) continue;
      const double v = scaled(acc[static_cast<Eigen::Index>(*c)], -ch.log_multiplicity(*c));
      if (v > 0) {
        out.kernel.emplace_back(p, v);
        row.add(v);
      }
    }
  out.row_sum = row.value();

  // spectral radius of the induced walk on P
  int klen = 1;
  for (const auto& [x, v] : out.kernel) klen = std::max(klen, P.word_length(x));
  for (int k = std::max(opt.spectral_steps, 8); k >= 4; k /= 2) {
    try {
      ChainOptions pc;
      pc.radius = k * klen;
      pc.class_cap = 200'000;
      OrbitChain pch(P, out.kernel, pc);
      out.rho = pch.lanczos(std::min<int>(k, static_cast<int>(pch.size())), false).ritz.back();
      break;
    } catch (const CapExceeded&) {
    }
  }
  out.R_P = out.rho > 0 ? 1.0 / out.rho : kInf;
  out.degenerate = std::abs(out.R_P - 1.0) <= degeneracy_tol;
  return out;
}

GapReport parabolic_gap_check(const GreenEngine& engine, double r, int n_max) {
  const Group& g = engine.group();
  if (g.kind() != GroupKind::FreeProduct) throw UnsupportedSpec("parabolic gap check needs a free product");
  GapReport rep;
  rep.r = r;
  const auto whole = omega_estimate(engine, r, n_max);
  rep.omega_gamma = whole.omega_hat;
  rep.residual = whole.residual;
  for (int f = 0; f < g.factor_count(); ++f) {
    FactorGap fg;
    fg.factor = f;
    fg.label = g.factor(f).spec().label();
    const auto kind = g.factor(f).kind();
    fg.subexponential = kind == GroupKind::FreeAbelian || kind == GroupKind::Finite;
    const auto part = omega_from_sums(r, engine.factor_sphere_sums(r, f, n_max));
    fg.omega_P = part.omega_hat;
    fg.residual = part.residual;
    fg.margin = rep.omega_gamma - fg.omega_P;
    if (fg.subexponential) {
      // sub-exponential growth forces omega_P <= 0 < omega_Gamma for r > 1
      fg.gap = r > 1.0;
      fg.confidence = fg.gap ? "structural" : "none";
    } else {
      const double sigma = whole.residual + part.residual + 2.0 * (whole.slope_stderr + part.slope_stderr);
      fg.gap = fg.margin > 0;
      if (fg.margin > 3 * sigma) fg.confidence = "high";
      else if (fg.margin > sigma) fg.confidence = "moderate";
      else if (fg.margin > 0) fg.confidence = "low";
      else fg.confidence = "none";
    }
    rep.factors.push_back(fg);
  }
  return rep;
}

}  // namespace brwlab
