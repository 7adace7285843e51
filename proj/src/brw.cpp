#include "brwlab/brw.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "brwlab/errors.hpp"
#include "brwlab/randwalk.hpp"
#include "brwlab/stats.hpp"
#include "brwlab/transition.hpp"

namespace brwlab {

namespace {

constexpr std::size_t kBlock = 256;  // positions per seeded block

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::mt19937_64 stream(std::uint64_t seed, int replica, int generation, std::size_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(generation),
                    static_cast<std::uint32_t>(block)};
  return std::mt19937_64(seq);
}

template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  const int w = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex m;
  for (int t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

std::vector<std::pair<Element, std::uint64_t>> aggregate(std::vector<Element>& xs) {
  std::sort(xs.begin(), xs.end());
  std::vector<std::pair<Element, std::uint64_t>> out;
  for (auto& x : xs) {
    if (!out.empty() && out.back().first == x) ++out.back().second;
    else out.emplace_back(std::move(x), 1);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- offspring

OffspringDistribution::OffspringDistribution(std::vector<double> p) : p_(std::move(p)) {
  if (p_.size() < 2) throw ValidationError("offspring distribution needs support in {1, 2, ...}");
  if (p_[0] != 0.0) throw ValidationError("offspring distribution must not charge 0 (no extinction)");
  double total = 0;
  for (std::size_t k = 0; k < p_.size(); ++k) {
    if (!(p_[k] >= 0)) throw ValidationError("offspring probabilities must be nonnegative");
    total += p_[k];
    mean_ += static_cast<double>(k) * p_[k];
    m2_ += static_cast<double>(k * k) * p_[k];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("offspring probabilities must sum to 1");
  double acc = 0;
  for (double q : p_) cdf_.push_back(acc += q);
  cdf_.back() = 1.0;
}

OffspringDistribution OffspringDistribution::fixed(int k) {
  if (k < 1) throw ValidationError("fixed offspring number must be >= 1");
  std::vector<double> p(k + 1, 0.0);
  p[k] = 1.0;
  return OffspringDistribution(std::move(p));
}

OffspringDistribution OffspringDistribution::geometric(double mean, int max_children) {
  if (!(mean >= 1.0) || !(mean < max_children)) throw ValidationError("geometric offspring mean must lie in [1, max_children)");
  if (mean == 1.0) return fixed(1);
  auto weights = [&](double q) {
    std::vector<double> w(max_children + 1, 0.0);
    double x = 1.0, total = 0.0;
    for (int k = 1; k <= max_children; ++k, x *= q) total += (w[k] = x);
    for (double& v : w) v /= total;
    return w;
  };
  auto mean_of = [](const std::vector<double>& w) {
    double m = 0;
    for (std::size_t k = 0; k < w.size(); ++k) m += static_cast<double>(k) * w[k];
    return m;
  };
  double lo = 0.0, hi = 1.0;
  while (mean_of(weights(hi)) < mean) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_of(weights(mid)) < mean ? lo : hi) = mid;
  }
  return OffspringDistribution(weights(0.5 * (lo + hi)));
}

int OffspringDistribution::sample(double u) const {
  return static_cast<int>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
}

StepSampler::StepSampler(const StepDistribution& mu) {
  const std::size_t n = mu.support.size();
  if (n == 0) throw ValidationError("empty step distribution");
  double total = mu.total();
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) {
    steps_.push_back(mu.support[i].first);
    scaled[i] = mu.support[i].second / total * static_cast<double>(n);
  }
  prob_.assign(n, 1.0);
  alias_.resize(n);
  std::iota(alias_.begin(), alias_.end(), 0u);
  std::vector<std::uint32_t> small, large;
  for (std::uint32_t i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
  while (!small.empty() && !large.empty()) {
    const auto s = small.back(), l = large.back();
    small.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
}

const Element& StepSampler::sample(double u) const {
  const double x = u * static_cast<double>(steps_.size());
  const auto i = std::min(static_cast<std::size_t>(x), steps_.size() - 1);
  return (x - static_cast<double>(i) < prob_[i]) ? steps_[i] : steps_[alias_[i]];
}

// ---------------------------------------------------------------- trace

std::uint64_t GenerationState::population() const {
  std::uint64_t n = 0;
  for (const auto& p : particles) n += p.second;
  return n;
}

std::uint64_t Trace::visits(const Element& x) const {
  auto it = z_.find(x);
  return it == z_.end() ? 0 : it->second;
}

void Trace::record(const Group& g, const Element& x, std::uint64_t count, bool track) {
  auto [it, inserted] = z_.try_emplace(x, 0);
  if (inserted) {
    const auto len = static_cast<std::size_t>(g.word_length(x));
    if (M_.size() <= len) M_.resize(len + 1, 0);
    ++M_[len];
  }
  it->second = track ? it->second + count : 1;
}

std::vector<std::uint64_t> Trace::transitional_counts(const Group& g, int eta, int L) const {
  std::vector<std::uint64_t> out(M_.size(), 0);
  for (const auto& [x, z] : z_)
    if (transitional_element(g, x, eta, L)) ++out[static_cast<std::size_t>(g.word_length(x))];
  return out;
}

void Trace::write_csv(const Group& g, std::ostream& os, std::size_t max_rows) const {
  if (z_.size() > max_rows) throw CapExceeded("trace export exceeds the row cap", static_cast<double>(z_.size()));
  std::vector<std::pair<int, const Element*>> rows;
  for (const auto& [x, z] : z_) rows.emplace_back(g.word_length(x), &x);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second->code() < b.second->code();
  });
  os << "x,|x|,Z_x\n";
  for (const auto& [len, x] : rows) os << g.format(*x) << ',' << len << ',' << z_.at(*x) << '\n';
}

// ---------------------------------------------------------------- simulator

BrwSimulator::BrwSimulator(const Group& g, BrwConfig config) : g_(g), cfg_(std::move(config)), steps_(cfg_.mu) {
  cfg_.mu.validate(g_);
  if (cfg_.T < 0) throw ValidationError("T must be >= 0");
  if (cfg_.K < 1) throw ValidationError("K must be >= 1");
  if (cfg_.replicas < 1) throw ValidationError("replicas must be >= 1");
}

GenerationState BrwSimulator::initial(Trace& trace) const {
  GenerationState st;
  const Element e = g_.identity();
  trace.record(g_, e, 1, cfg_.track_visits);
  trace.population = {1};
  if (cfg_.freeze && cfg_.freeze(e)) {
    trace.frozen.push_back({e, 0, 0});
    return st;
  }
  st.particles.emplace_back(e, 1);
  return st;
}

GenerationState BrwSimulator::step(const GenerationState& state, Trace& trace, int replica) const {
  const std::size_t blocks = (state.particles.size() + kBlock - 1) / kBlock;
  std::vector<std::vector<Element>> kids(blocks), frozen(blocks);
  parallel_for(blocks, cfg_.threads, [&](std::size_t b) {
    auto rng = stream(cfg_.seed, replica, state.t + 1, b);
    const std::size_t end = std::min(state.particles.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const auto& [x, count] = state.particles[i];
      for (std::uint64_t c = 0; c < count; ++c) {
        const int k = cfg_.nu.sample(uniform01(rng));
        for (int j = 0; j < k; ++j) {
          Element y = g_.multiply(x, steps_.sample(uniform01(rng)));
          if (cfg_.freeze && cfg_.freeze(y)) frozen[b].push_back(std::move(y));
          else kids[b].push_back(std::move(y));
        }
      }
    }
  });
  std::vector<Element> all, halted;
  for (auto& v : kids) std::move(v.begin(), v.end(), std::back_inserter(all));
  for (auto& v : frozen) std::move(v.begin(), v.end(), std::back_inserter(halted));
  GenerationState next;
  next.t = state.t + 1;
  if (all.size() + halted.size() > cfg_.K) {
    trace.truncated = true;
    return next;
  }
  next.particles = aggregate(all);
  for (const auto& [y, c] : next.particles) trace.record(g_, y, c, cfg_.track_visits);
  for (auto& [y, c] : aggregate(halted)) {
    trace.record(g_, y, c, cfg_.track_visits);
    for (std::uint64_t i = 0; i < c; ++i) trace.frozen.push_back({y, next.t, next.t});
  }
  trace.population.push_back(all.size());
  trace.generations = next.t;
  return next;
}

Trace BrwSimulator::run(int replica) const {
  Trace tr;
  tr.replica = replica;
  auto st = initial(tr);
  while (st.t < cfg_.T && !st.particles.empty() && !tr.truncated) st = step(st, tr, replica);
  return tr;
}

std::vector<Trace> BrwSimulator::run_replicas() const {
  std::vector<Trace> out(cfg_.replicas);
  if (cfg_.replicas == 1) {
    out[0] = run(0);
    return out;
  }
  BrwConfig inner = cfg_;
  inner.threads = 1;
  BrwSimulator serial(g_, inner);
  parallel_for(out.size(), cfg_.threads, [&](std::size_t i) { out[i] = serial.run(static_cast<int>(i)); });
  return out;
}

// ---------------------------------------------------------------- diagnostics

std::vector<ManyToOne> many_to_one_check(const Group& g, const BrwConfig& config, const std::vector<Element>& xs) {
  BrwConfig cfg = config;
  cfg.track_visits = true;
  cfg.freeze = nullptr;
  const auto traces = BrwSimulator(g, cfg).run_replicas();
  const double r = cfg.nu.mean();
  const auto expected = green_many(g, cfg.mu, r, xs, cfg.T);
  std::unique_ptr<GreenEngine> engine;
  try {
    engine = make_green_engine(g, cfg.mu);
  } catch (const DivergentSeries&) {
  }
  std::vector<ManyToOne> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Element& x = xs[i];
    ManyToOne m;
    m.x = x;
    m.replicas = cfg.replicas;
    std::vector<double> z;
    for (const auto& tr : traces) z.push_back(static_cast<double>(tr.visits(x)));
    const auto st = mean_stat(z);
    m.mean = st.mean;
    m.stderr_ = st.stderr_;
    m.expected = expected[i].value;
    m.green = std::numeric_limits<double>::quiet_NaN();
    try {
      if (engine) m.green = engine->green(r, x);
    } catch (const DivergentSeries&) {
    }
    if (m.stderr_ > 0) m.z = (m.mean - m.expected) / m.stderr_;
    else m.z = m.mean == m.expected ? 0.0 : std::numeric_limits<double>::infinity();
    m.undersampled = m.mean == 0.0 && m.expected * cfg.replicas >= 1.0;
    out.push_back(m);
  }
  return out;
}

std::vector<FrozenParticle> freeze(const Group& g, BrwConfig config, const RegionPredicate& region, int replica) {
  if (!region) throw ValidationError("freeze needs a region predicate");
  config.freeze = region;
  return BrwSimulator(g, std::move(config)).run(replica).frozen;
}

std::vector<Element> limit_rays(const Group& g, const Trace& trace, int depth, int radius) {
  if (g.kind() != GroupKind::Free && g.kind() != GroupKind::FreeProduct)
    throw UnsupportedSpec("limit rays need a free group or free product");
  if (radius < 0) radius = trace.radius();
  if (depth < 0 || depth > trace.radius() || depth > radius) throw ValidationError("depth exceeds the trace radius");
  std::vector<Element> cells;
  for (const auto& [x, z] : trace.elements()) {
    if (g.word_length(x) < radius) continue;
    Word w = g.geodesic(x);
    w.resize(static_cast<std::size_t>(depth));
    cells.push_back(g.normalize(w));
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

TrackingDiagnostic tracking_diagnostic(const Group& g, const Trace& trace, const Element& ray, int eta, int L, int n0,
                                       int search_radius) {
  const Word w = g.geodesic(ray);
  const int n = static_cast<int>(w.size());
  if (n < std::max(n0, 2)) throw ValidationError("ray too short for the tracking diagnostic");
  std::vector<PointLabel> labels;
  if (g.kind() == GroupKind::FreeProduct) labels = classify_points(coset_runs(g, ray), g.factor_count(), eta, L);
  else if (g.kind() == GroupKind::Free) labels.assign(static_cast<std::size_t>(n) + 1, PointLabel{});
  else throw UnsupportedSpec("tracking needs a free group or free product");
  std::vector<std::vector<Element>> spheres;
  for (int d = 0; d <= search_radius; ++d) spheres.push_back(g.sphere(d));
  TrackingDiagnostic out;
  for (int p = std::max(n0, 2); p <= n; ++p) {
    if (!labels[static_cast<std::size_t>(p)].transitional) continue;
    const Element x = g.normalize(Word(w.begin(), w.begin() + p));
    int dist = -1;
    for (int d = 0; d <= search_radius && dist < 0; ++d)
      for (const auto& s : spheres[static_cast<std::size_t>(d)])
        if (trace.visited(g.multiply(x, s))) {
          dist = d;
          break;
        }
    out.positions.push_back(p);
    out.distances.push_back(dist);
    if (dist < 0) out.censored = true;
    const double v = (dist < 0 ? search_radius + 1 : dist) / std::log(static_cast<double>(p));
    out.kappa_hat = std::max(out.kappa_hat, v);
  }
  return out;
}

double trace_growth_slope(const Trace& trace, int lo, int hi) {
  const auto& M = trace.sphere_counts();
  if (lo < 0 || hi <= lo || hi >= static_cast<int>(M.size())) throw ValidationError("slope window outside the trace");
  std::vector<double> xs, ys;
  for (int n = lo; n <= hi; ++n) {
    if (M[static_cast<std::size_t>(n)] == 0) throw ValidationError("empty sphere inside the slope window");
    xs.push_back(n);
    ys.push_back(std::log(static_cast<double>(M[static_cast<std::size_t>(n)])));
  }
  return fit_line(xs, ys).slope;
}

}  // namespace brwlab
