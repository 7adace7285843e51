#include "brwlab/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "brwlab/boundary.hpp"
#include "brwlab/errors.hpp"
#include "brwlab/stats.hpp"

namespace brwlab {

namespace {

// Visual distances between a fixed set of cells, with the letter sequences
// of free-group cells cached.
class CellMetric {
 public:
  CellMetric(const Group& g, const std::vector<Element>& cells, double lambda)
      : g_(g), cells_(cells), lambda_(lambda), free_(g.kind() == GroupKind::Free) {
    if (free_)
      for (const auto& c : cells) letters_.push_back(g.letters(c));
  }

  double operator()(std::size_t i, std::size_t j) const {
    if (!free_) return visual_distance_cells(g_, cells_[i], cells_[j], lambda_);
    const auto& a = letters_[i];
    const auto& b = letters_[j];
    if (i == j || a == b) return std::pow(lambda_, static_cast<double>(a.size()));
    std::size_t k = 0;
    while (k < a.size() && k < b.size() && a[k] == b[k]) ++k;
    return std::pow(lambda_, static_cast<double>(k));
  }

 private:
  const Group& g_;
  const std::vector<Element>& cells_;
  double lambda_;
  bool free_;
  std::vector<std::vector<int>> letters_;
};

}  // namespace

BoxCount box_counting_dim(const Group& g, const std::vector<Element>& cells, double lambda,
                          const std::vector<int>& scales) {
  if (cells.empty()) throw ValidationError("box counting needs a nonempty sample");
  if (scales.size() < 4) throw ValidationError("box counting needs at least four scales");
  int depth = 0;
  for (const auto& c : cells) depth = std::max(depth, g.word_length(c));
  for (int k : scales)
    if (k <= 0 || k >= depth) throw ValidationError("scales must lie strictly between the cell resolution and 1");
  BoxCount out;
  out.scales = scales;
  if (cells.size() == 1) {
    out.degenerate = true;
    out.counts.assign(scales.size(), 1);
    return out;
  }
  CellMetric dist(g, cells, lambda);
  std::vector<double> xs, ys;
  for (int k : scales) {
    const double eps = std::pow(lambda, k) * (1.0 + 1e-12);
    std::vector<char> covered(cells.size(), 0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (covered[i]) continue;
      ++count;
      for (std::size_t j = i + 1; j < cells.size(); ++j)
        if (!covered[j] && dist(i, j) <= eps) covered[j] = 1;
    }
    out.counts.push_back(count);
    xs.push_back(k * -std::log(lambda));
    ys.push_back(std::log(static_cast<double>(count)));
  }
  const auto fit = fit_line(xs, ys);
  out.dimension = fit.slope;
  out.residual = fit.rms_residual;
  return out;
}

CoveringSums covering_sum(const std::vector<double>& M, double lambda, double h, int lo, int hi, double alpha) {
  if (!(h > 0.0)) throw ValidationError("covering exponent must be positive");
  if (lo < 2 || hi <= lo || hi >= static_cast<int>(M.size())) throw ValidationError("covering window outside the counts");
  CoveringSums out;
  out.h = h;
  out.alpha = alpha;
  out.m0 = lo;
  out.terms.assign(M.size(), 0.0);
  for (std::size_t n = 2; n < M.size(); ++n) {
    const double dn = static_cast<double>(n);
    out.terms[n] = M[n] * std::pow(lambda, h * dn) * std::pow(dn, h * alpha) * std::pow(std::log(dn), h);
  }
  double tail = 0.0;
  out.tails.assign(M.size() - static_cast<std::size_t>(lo), 0.0);
  for (std::size_t n = M.size(); n-- > static_cast<std::size_t>(lo);) {
    tail += out.terms[n];
    out.tails[n - static_cast<std::size_t>(lo)] = tail;
  }
  std::vector<double> xs, ys;
  for (int n = lo; n <= hi; ++n) {
    if (!(out.terms[static_cast<std::size_t>(n)] > 0.0)) throw ValidationError("empty sphere inside the covering window");
    xs.push_back(n);
    ys.push_back(std::log(out.terms[static_cast<std::size_t>(n)]));
  }
  out.log_slope = fit_line(xs, ys).slope;
  out.decaying = out.log_slope < 0.0;
  return out;
}

double covering_threshold(const std::vector<double>& M, double lambda, int lo, int hi, double alpha) {
  double a = 1e-6, b = 1.0;
  while (!covering_sum(M, lambda, b, lo, hi, alpha).decaying) {
    b *= 2.0;
    if (b > 1e6) throw ValidationError("covering sums never decay");
  }
  if (covering_sum(M, lambda, a, lo, hi, alpha).decaying) return a;
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (a + b);
    (covering_sum(M, lambda, m, lo, hi, alpha).decaying ? b : a) = m;
  }
  return b;
}

double mean_transitional_count(const Group& g, const std::vector<Trace>& batch, int n, int eta, int L) {
  if (batch.empty()) throw ValidationError("empty replica batch");
  double total = 0.0;
  for (const auto& tr : batch) {
    const auto c = tr.transitional_counts(g, eta, L);
    if (n < static_cast<int>(c.size())) total += static_cast<double>(c[static_cast<std::size_t>(n)]);
  }
  return total / static_cast<double>(batch.size());
}

EmpiricalMeasure chi_n(const Group& g, const Trace& trace, int n, int eta, int L, double C, double E_hat) {
  if (!(E_hat > 0.0)) throw ValidationError("the held-out estimate of E[M_{n,L}] vanishes");
  EmpiricalMeasure chi;
  chi.n = n;
  chi.eta = eta;
  chi.L = L;
  chi.C = C;
  chi.E_hat = E_hat;
  for (const auto& [x, z] : trace.elements())
    if (g.word_length(x) == n && transitional_element(g, x, eta, L)) chi.atoms.push_back(x);
  std::sort(chi.atoms.begin(), chi.atoms.end());
  chi.M = chi.atoms.size();
  const double M = static_cast<double>(chi.M);
  chi.in_B = 0.5 * E_hat <= M && M <= C * E_hat;
  return chi;
}

double energy_W(const Group& g, const EmpiricalMeasure& chi, double h, double lambda) {
  if (!chi.in_B) return 0.0;
  CellMetric dist(g, chi.atoms, lambda);
  CompensatedSum s;
  for (std::size_t i = 0; i < chi.atoms.size(); ++i) {
    s.add(std::pow(dist(i, i), -h));
    for (std::size_t j = i + 1; j < chi.atoms.size(); ++j) s.add(2.0 * std::pow(dist(i, j), -h));
  }
  return s.value() / (chi.E_hat * chi.E_hat);
}

EnergyReport energy_trend(const Group& g, const std::vector<Trace>& traces, const std::vector<Trace>& held_out,
                          double h, double lambda, int lo, int hi, int eta, int L, double C) {
  if (traces.size() < 2) throw ValidationError("energy trends need at least two replicas");
  if (hi <= lo) throw ValidationError("energy window must contain two radii");
  EnergyReport rep;
  rep.h = h;
  std::vector<std::vector<double>> W(traces.size());
  for (int n = lo; n <= hi; ++n) {
    rep.ns.push_back(n);
    const double E = mean_transitional_count(g, held_out, n, eta, L);
    std::vector<double> w;
    double inB = 0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const auto chi = chi_n(g, traces[i], n, eta, L, C, E);
      inB += chi.in_B;
      W[i].push_back(energy_W(g, chi, h, lambda));
      w.push_back(W[i].back());
    }
    const auto st = mean_stat(w);
    rep.mean_W.push_back(st.mean);
    rep.stderr_W.push_back(st.stderr_);
    rep.fraction_in_B.push_back(inB / static_cast<double>(traces.size()));
  }
  std::vector<double> xs(rep.ns.begin(), rep.ns.end()), slopes;
  for (const auto& w : W) slopes.push_back(fit_line(xs, w).slope);
  const auto st = mean_stat(slopes);
  rep.slope = st.mean;
  rep.slope_stderr = st.stderr_;
  rep.t_stat = st.stderr_ > 0 ? st.mean / st.stderr_ : (st.mean > 0 ? INFINITY : 0.0);
  rep.upward = rep.t_stat > normal_quantile(0.975);
  return rep;
}

HdimReport hdim_report(const Group& g, const std::vector<Trace>& traces, const std::vector<Trace>& held_out, double r,
                       double lambda, double omega_hat, const HdimOptions& opt) {
  if (traces.empty() || held_out.empty()) throw ValidationError("hdim needs a main and a held-out batch");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("lambda must lie in (0,1)");
  HdimReport rep;
  rep.r = r;
  rep.lambda = lambda;
  rep.omega_hat = omega_hat;
  rep.target = omega_hat / -std::log(lambda);
  rep.lo = opt.lo;
  rep.hi = opt.hi;
  rep.replicas = static_cast<int>(traces.size());

  std::size_t radius = 0;
  for (const auto& tr : traces) radius = std::max(radius, tr.sphere_counts().size());
  std::vector<double> M(radius, 0.0);
  for (const auto& tr : traces)
    for (std::size_t n = 0; n < tr.sphere_counts().size(); ++n) M[n] += static_cast<double>(tr.sphere_counts()[n]);
  for (auto& m : M) m /= static_cast<double>(traces.size());
  rep.h_upper = covering_threshold(M, lambda, opt.lo, opt.hi, opt.alpha);

  std::vector<double> grid = opt.h_grid;
  if (grid.empty())
    for (double h = 0.0; h <= 1.5 * std::max(rep.target, 0.1) + 1e-12; h += 0.05) grid.push_back(h);
  std::sort(grid.begin(), grid.end());
  rep.h_lower = 0.0;
  for (double h : grid) {
    rep.energies.push_back(energy_trend(g, traces, held_out, h, lambda, opt.lo, opt.hi, opt.eta, opt.L, opt.C));
    if (rep.energies.back().upward) break;
    rep.h_lower = h;
  }

  std::vector<Element> cells;
  for (const auto& tr : traces) {
    if (tr.radius() < opt.ray_depth) continue;
    for (auto& c : limit_rays(g, tr, opt.ray_depth, opt.hi)) cells.push_back(std::move(c));
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  if (!cells.empty() && opt.ray_depth >= 6) {
    std::vector<int> scales;
    for (int k = opt.ray_depth / 2; k < opt.ray_depth; ++k) scales.push_back(k);
    if (scales.size() >= 4) rep.box_dimension = box_counting_dim(g, cells, lambda, scales).dimension;
  }
  return rep;
}

}  // namespace brwlab
