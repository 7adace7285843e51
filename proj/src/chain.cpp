#include "brwlab/chain.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>

namespace brwlab {

std::string to_string(Lumping l) {
  switch (l) {
    case Lumping::Radial: return "radial";
    case Lumping::SignedPermutation: return "signed-permutation";
    case Lumping::Syllabic: return "syllabic";
    case Lumping::Identity: return "identity";
  }
  return "?";
}

namespace {

void put_i32(std::string& s, int v) {
  char b[4];
  std::memcpy(b, &v, 4);
  s.append(b, 4);
}

bool equal_rel(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

double free_sphere_log(int q, int n) {
  if (n == 0) return 0.0;
  return std::log(2.0 * q) + (n - 1) * std::log(2.0 * q - 1.0);
}

double signed_log_mult(std::vector<int> c) {
  for (int& v : c) v = std::abs(v);
  std::sort(c.begin(), c.end());
  double lm = std::lgamma(c.size() + 1.0);
  std::size_t i = 0;
  while (i < c.size()) {
    std::size_t j = i;
    while (j < c.size() && c[j] == c[i]) ++j;
    lm -= std::lgamma(static_cast<double>(j - i) + 1.0);
    if (c[i] != 0) lm += static_cast<double>(j - i) * std::log(2.0);
    i = j;
  }
  return lm;
}

std::string simple_key(const Group& g, Lumping l, const Element& x) {
  std::string k;
  switch (l) {
    case Lumping::Radial:
      put_i32(k, g.word_length(x));
      return k;
    case Lumping::SignedPermutation: {
      auto c = g.coordinates(x);
      for (int& v : c) v = std::abs(v);
      std::sort(c.begin(), c.end());
      for (int v : c) put_i32(k, v);
      return k;
    }
    default:
      return x.code();
  }
}

double simple_log_mult(const Group& g, Lumping l, const Element& x) {
  switch (l) {
    case Lumping::Radial: return free_sphere_log(g.spec().rank, g.word_length(x));
    case Lumping::SignedPermutation: return signed_log_mult(g.coordinates(x));
    default: return 0.0;
  }
}

// weights exclude the identity
Lumping detect_simple(const Group& g, const OrbitChain::Weights& w) {
  if (g.kind() == GroupKind::Free) {
    std::map<int, std::vector<double>> by_len;
    int max_len = 0;
    for (const auto& [x, p] : w) {
      int n = g.word_length(x);
      by_len[n].push_back(p);
      max_len = std::max(max_len, n);
    }
    auto sizes = g.sphere_sizes(max_len);
    for (const auto& [n, ps] : by_len) {
      if (static_cast<double>(ps.size()) != sizes[n]) return Lumping::Identity;
      for (double p : ps)
        if (!equal_rel(p, ps[0])) return Lumping::Identity;
    }
    return Lumping::Radial;
  }
  if (g.kind() == GroupKind::FreeAbelian) {
    std::map<std::string, std::vector<double>> by_key;
    std::map<std::string, double> lm;
    for (const auto& [x, p] : w) {
      auto k = simple_key(g, Lumping::SignedPermutation, x);
      by_key[k].push_back(p);
      lm[k] = signed_log_mult(g.coordinates(x));
    }
    for (const auto& [k, ps] : by_key) {
      if (std::llround(std::exp(lm[k])) != static_cast<long long>(ps.size())) return Lumping::Identity;
      for (double p : ps)
        if (!equal_rel(p, ps[0])) return Lumping::Identity;
    }
    return Lumping::SignedPermutation;
  }
  return Lumping::Identity;
}

OrbitChain::Weights merged(const OrbitChain::Weights& w) {
  std::map<std::string, double> acc;
  for (const auto& [x, p] : w) acc[x.code()] += p;
  OrbitChain::Weights out;
  for (const auto& [c, p] : acc)
    if (p != 0.0) out.emplace_back(Element(c), p);
  return out;
}

double top_ritz(const std::vector<double>& alpha, const std::vector<double>& beta) {
  if (alpha.size() == 1) return alpha[0];
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
  Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(alpha.size() - 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[es.eigenvalues().size() - 1];
}

}  // namespace

Lumping detect_lumping(const Group& g, const OrbitChain::Weights& weights) {
  OrbitChain::Weights w;
  for (const auto& e : merged(weights))
    if (!g.is_identity(e.first)) w.push_back(e);
  if (g.kind() != GroupKind::FreeProduct) return detect_simple(g, w);
  for (const auto& [x, p] : w)
    if (g.syllables(x).size() != 1) return Lumping::Identity;
  return Lumping::Syllabic;
}

OrbitChain::OrbitChain(const Group& g, const Weights& raw, ChainOptions opt) : group_(g), opt_(std::move(opt)) {
  const Weights weights = merged(raw);
  if (weights.empty()) throw ValidationError("chain needs at least one step");
  for (const auto& e : weights) {
    if (!(e.second >= 0)) throw ValidationError("chain weights must be nonnegative");
    step_mass_ += e.second;
  }
  if (opt_.radius < 0) throw ValidationError("chain radius must be >= 0");

  lumping_ = opt_.lump ? detect_lumping(g, weights) : Lumping::Identity;
  if (g.kind() == GroupKind::FreeProduct) {
    const int k = g.factor_count();
    if (opt_.factor_costs.empty()) opt_.factor_costs.assign(k, 1);
    if (static_cast<int>(opt_.factor_costs.size()) != k) throw ValidationError("one letter cost per factor expected");
    for (int c : opt_.factor_costs)
      if (c < 1) throw ValidationError("letter costs must be >= 1");
    if (lumping_ == Lumping::Syllabic) {
      std::vector<Weights> per(k);
      for (const auto& [x, p] : weights) {
        if (g.is_identity(x)) continue;
        auto s = g.syllables(x);
        per[s[0].factor].emplace_back(s[0].element, p);
      }
      factor_lumping_.resize(k);
      for (int f = 0; f < k; ++f) factor_lumping_[f] = detect_simple(g.factor(f), per[f]);
    }
  } else if (!opt_.factor_costs.empty()) {
    throw ValidationError("letter costs only apply to free products");
  }

  max_step_cost_ = 1;
  for (const auto& [x, p] : weights) max_step_cost_ = std::max(max_step_cost_, weighted_length(x));

  classes_.push_back({g.identity(), 0, 0, 0.0});
  index_.emplace(key(g.identity()), 0);
  exit_.push_back(0.0);
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    const Element x = classes_[i].rep;
    for (const auto& [s, p] : weights) {
      Element y = g.multiply(x, s);
      const int wl = weighted_length(y);
      if (wl > opt_.radius) {
        exit_[i] += p;
        continue;
      }
      std::string k = key(y);
      auto it = index_.find(k);
      std::size_t j;
      if (it == index_.end()) {
        if (classes_.size() >= opt_.class_cap)
          throw CapExceeded("orbit chain exceeds class cap " + std::to_string(opt_.class_cap),
                            static_cast<double>(classes_.size()) * 2.0);
        j = classes_.size();
        index_.emplace(std::move(k), j);
        classes_.push_back({y, g.word_length(y), wl, log_mult_of(y)});
        exit_.push_back(0.0);
      } else {
        j = it->second;
      }
      trip.emplace_back(static_cast<int>(i), static_cast<int>(j), p);
    }
  }
  const auto n = static_cast<Eigen::Index>(classes_.size());
  K_.resize(n, n);
  K_.setFromTriplets(trip.begin(), trip.end());
  K_.makeCompressed();

  // symmetrise and test reversibility
  std::vector<Eigen::Triplet<double>> st;
  st.reserve(trip.size());
  for (Eigen::Index i = 0; i < K_.outerSize(); ++i)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(K_, i); it; ++it)
      st.emplace_back(static_cast<int>(i), static_cast<int>(it.col()),
                      it.value() * std::exp(0.5 * (classes_[i].logm - classes_[it.col()].logm)));
  Eigen::SparseMatrix<double> S(n, n);
  S.setFromTriplets(st.begin(), st.end());
  Eigen::SparseMatrix<double> St = S.transpose();
  Eigen::SparseMatrix<double> diff = S - St;
  double dmax = 0, smax = 0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it) dmax = std::max(dmax, std::abs(it.value()));
  for (Eigen::Index k = 0; k < S.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(S, k); it; ++it) smax = std::max(smax, std::abs(it.value()));
  symmetric_ = dmax <= 1e-10 * std::max(smax, 1e-300);
  if (symmetric_) {
    S_ = 0.5 * (S + St);
    S_.makeCompressed();
    S_built_ = true;
  }
}

int OrbitChain::weighted_length(const Element& x) const {
  if (group_.kind() != GroupKind::FreeProduct) return group_.word_length(x);
  int n = 0;
  for (const auto& s : group_.syllables(x))
    n += opt_.factor_costs[s.factor] * group_.factor(s.factor).word_length(s.element);
  return n;
}

std::string OrbitChain::factor_key(int f, const Element& x) const {
  return simple_key(group_.factor(f), factor_lumping_[f], x);
}

std::string OrbitChain::key(const Element& x) const {
  if (lumping_ != Lumping::Syllabic) return simple_key(group_, lumping_, x);
  std::string k;
  for (const auto& s : group_.syllables(x)) {
    std::string fk = factor_key(s.factor, s.element);
    k.push_back(static_cast<char>(s.factor));
    put_i32(k, static_cast<int>(fk.size()));
    k += fk;
  }
  return k;
}

double OrbitChain::factor_log_mult(int f, const Element& x) const {
  return simple_log_mult(group_.factor(f), factor_lumping_[f], x);
}

double OrbitChain::log_mult_of(const Element& x) const {
  if (lumping_ != Lumping::Syllabic) return simple_log_mult(group_, lumping_, x);
  double lm = 0;
  for (const auto& s : group_.syllables(x)) lm += factor_log_mult(s.factor, s.element);
  return lm;
}

std::optional<std::size_t> OrbitChain::class_of(const Element& x) const {
  if (weighted_length(x) > opt_.radius) return std::nullopt;
  auto it = index_.find(key(x));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Eigen::SparseMatrix<double>& OrbitChain::symmetrized() const {
  if (!S_built_) throw ValidationError("step weights are not symmetric; symmetrised chain unavailable");
  return S_;
}

namespace {

// u * exp(s) without overflowing when u is tiny and s is huge
double scaled(double u, double s) { return u == 0.0 ? 0.0 : std::copysign(std::exp(std::log(std::abs(u)) + s), u); }

}  // namespace

Eigen::VectorXd OrbitChain::green(double r) const {
  Eigen::VectorXd u = solve_resolvent(r);
  for (Eigen::Index c = 0; c < u.size(); ++c) u[c] = scaled(u[c], -0.5 * classes_[c].logm);
  return u;
}

Eigen::VectorXd OrbitChain::green_totals(double r) const {
  Eigen::VectorXd u = solve_resolvent(r);
  for (Eigen::Index c = 0; c < u.size(); ++c) u[c] = scaled(u[c], 0.5 * classes_[c].logm);
  return u;
}

namespace {

// Above this many classes the sparse factorisation fills in too much
// (three-dimensional domains); conjugate gradients need only products.
constexpr Eigen::Index kDirectSolveLimit = 50'000;

// S is substochastic after symmetrisation, so the terms shrink like r^k;
// positive terms keep every entry accurate relative to itself.
Eigen::VectorXd solve_resolvent_neumann(const Eigen::SparseMatrix<double>& S, double r) {
  const auto n = S.rows();
  Eigen::VectorXd term = Eigen::VectorXd::Zero(n), next(n);
  term[0] = 1.0;
  Eigen::VectorXd x = term;
  const int steps = r > 0 ? static_cast<int>(std::ceil(std::log(1e-18) / std::log(r))) : 0;
  for (int k = 0; k < steps; ++k) {
    next.noalias() = r * (S * term);
    term.swap(next);
    x += term;
  }
  return x;
}

Eigen::VectorXd solve_resolvent_cg(const Eigen::SparseMatrix<double>& S, double r) {
  const auto n = S.rows();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), res = Eigen::VectorXd::Zero(n);
  res[0] = 1.0;
  Eigen::VectorXd p = res, Ap(n);
  double rr = 1.0;
  for (int it = 0; it < 100'000; ++it) {
    Ap.noalias() = p - r * (S * p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 1e-14 * p.squaredNorm()))
      throw DivergentSeries("r=" + std::to_string(r) + " is beyond the convergence radius on this domain");
    const double a = rr / pAp;
    x += a * p;
    res -= a * Ap;
    const double rr_new = res.squaredNorm();
    if (std::sqrt(rr_new) <= 1e-15) return x;
    p = res + (rr_new / rr) * p;
    rr = rr_new;
  }
  throw DivergentSeries("conjugate gradients did not converge at r=" + std::to_string(r));
}

}  // namespace

Eigen::VectorXd OrbitChain::solve_resolvent(double r) const {
  const auto& S = symmetrized();
  const auto n = S.rows();
  if (n > kDirectSolveLimit) return r <= 0.9 ? solve_resolvent_neumann(S, r) : solve_resolvent_cg(S, r);
  Eigen::SparseMatrix<double> A(n, n);
  A.setIdentity();
  A -= r * S;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw DivergentSeries("resolvent factorisation failed at r=" + std::to_string(r));
  const Eigen::VectorXd& D = ldlt.vectorD();
  for (Eigen::Index i = 0; i < D.size(); ++i)
    if (!(D[i] > 1e-14)) throw DivergentSeries("r=" + std::to_string(r) + " is beyond the convergence radius on this domain");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[0] = 1.0;
  return ldlt.solve(rhs);
}

std::vector<Eigen::VectorXd> OrbitChain::powers(int N) const {
  Eigen::SparseMatrix<double> KT = K_.transpose();
  std::vector<Eigen::VectorXd> out;
  out.reserve(N + 1);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  v[0] = 1.0;
  out.push_back(v);
  for (int n = 1; n <= N; ++n) {
    v = KT * v;
    out.push_back(v);
  }
  return out;
}

Eigen::VectorXd OrbitChain::restricted_series(double r, const std::vector<char>& allowed, int N) const {
  if (allowed.size() != size()) throw ValidationError("mask size does not match the chain");
  Eigen::SparseMatrix<double> KT = K_.transpose();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  v[0] = 1.0;
  Eigen::VectorXd acc = v;
  double rn = 1.0;
  for (int n = 1; n <= N; ++n) {
    v = KT * v;
    rn *= r;
    acc += rn * v;
    for (std::size_t c = 0; c < size(); ++c)
      if (!allowed[c]) v[static_cast<Eigen::Index>(c)] = 0.0;
  }
  return acc;
}

LanczosResult OrbitChain::lanczos(int steps, bool every_step) const {
  const auto& S = symmetrized();
  const auto n = S.rows();
  LanczosResult res;
  std::vector<Eigen::VectorXd> Q;
  const bool full_reorth = static_cast<double>(steps) * steps * static_cast<double>(n) <= 2e9;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n), q_prev = Eigen::VectorXd::Zero(n);
  q[0] = 1.0;
  std::vector<double> alpha, beta;
  double beta_prev = 0.0;
  for (int k = 0; k < steps; ++k) {
    if (full_reorth) Q.push_back(q);
    Eigen::VectorXd w = S * q - beta_prev * q_prev;
    const double a = q.dot(w);
    w -= a * q;
    if (full_reorth)
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& v : Q) w -= v.dot(w) * v;
    alpha.push_back(a);
    const double b = w.norm();
    const bool last = k + 1 == steps || b < 1e-13;
    if (every_step || last) {
      const double top = top_ritz(alpha, beta);
      if (!every_step) res.ritz.assign(alpha.size() - 1, std::numeric_limits<double>::quiet_NaN());
      res.ritz.push_back(top);
    }
    if (b < 1e-13) {
      res.exhausted = true;
      while (static_cast<int>(res.ritz.size()) < steps) res.ritz.push_back(res.ritz.back());
      break;
    }
    if (last) break;
    q_prev = q;
    q = w / b;
    beta_prev = b;
    beta.push_back(b);
  }
  res.alpha = alpha;
  res.beta = beta;
  return res;
}

}  // namespace brwlab
