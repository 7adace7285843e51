#include "brwlab/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "brwlab/boundary.hpp"
#include "brwlab/brw.hpp"
#include "brwlab/config.hpp"
#include "brwlab/dimension.hpp"
#include "brwlab/freeprod.hpp"
#include "brwlab/randwalk.hpp"
#include "brwlab/stats.hpp"

namespace brwlab {

namespace {

using json = nlohmann::json;

// Simple random walk on F_2: first passage to a neighbour and G_r(e,e).
double f2_F(double r) { return (1.0 - std::sqrt(1.0 - 0.75 * r * r)) / (1.5 * r); }
double f2_G(double r) { return 1.0 / (1.0 - r * f2_F(r)); }

Group f2() { return Group(GroupSpec::free_group(2)); }
Group f2_z3() { return Group(GroupSpec::free_product({GroupSpec::free_group(2), GroupSpec::free_abelian(3)})); }

Element random_of_length(const Group& g, int len, std::mt19937_64& rng) {
  Element x = g.identity();
  std::uniform_int_distribution<int> pick(0, static_cast<int>(g.generators().size()) - 1);
  while (g.word_length(x) < len) {
    Element y = g.multiply_generator(x, pick(rng));
    if (g.word_length(y) > g.word_length(x)) x = std::move(y);
  }
  return x;
}

struct Context {
  AcceptanceOptions opt;
  // BRW batches shared by criteria 8 and 12
  std::vector<Trace> hdim_main, hdim_held;

  std::vector<Trace> brw_batch(const Group& g, double mean, int T, int replicas, const std::string& task) const {
    BrwConfig c{.mu = StepDistribution::simple(g)};
    c.nu = OffspringDistribution::geometric(mean);
    c.T = T;
    c.replicas = replicas;
    c.threads = opt.threads;
    c.seed = task_seed(opt.seed, task);
    return BrwSimulator(g, c).run_replicas();
  }

  void ensure_hdim() {
    if (!hdim_main.empty()) return;
    Group g = f2();
    hdim_main = brw_batch(g, 1.1, 80, 50, "hdim/main");
    hdim_held = brw_batch(g, 1.1, 80, 50, "hdim/held-out");
  }
};

CriterionResult ac1(Context&) {
  CriterionResult r{.id = 1, .title = "spectral radius of F2", .time_limit = 10};
  Group g = f2();
  auto est = spectral_radius(g, StepDistribution::simple(g), 40);
  const double rho = std::sqrt(3.0) / 2.0;
  r.values = {{"rho_lower", est.rho_lower},
              {"rho_extrapolated", est.rho_extrapolated},
              {"monotone", est.monotone},
              {"extrapolation_error", std::abs(est.rho_extrapolated - rho)}};
  r.pass = est.monotone && est.rho_lower >= 0.860 && est.rho_lower <= 0.8660 &&
           std::abs(est.rho_extrapolated - rho) <= 2e-3;
  return r;
}

CriterionResult ac2(Context&) {
  CriterionResult r{.id = 2, .title = "Green function against the closed form", .time_limit = 30};
  Group g = f2();
  auto mu = StepDistribution::simple(g);
  const auto xs = g.ball(6);
  double worst = -INFINITY;
  bool certified = true;
  json per_r = json::array();
  for (double s : {1.0, 1.05, 1.1}) {
    const auto vals = green_many(g, mu, s, xs, 60);
    double excess = -INFINITY, max_tail = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double exact = f2_G(s) * std::pow(f2_F(s), g.word_length(xs[i]));
      certified = certified && vals[i].certified;
      excess = std::max(excess, std::abs(vals[i].value - exact) - vals[i].tail_bound - 1e-8);
      max_tail = std::max(max_tail, vals[i].tail_bound);
    }
    worst = std::max(worst, excess);
    per_r.push_back({{"r", s}, {"max_excess", excess}, {"max_tail_bound", max_tail}});
  }
  r.values = {{"elements", xs.size()}, {"per_r", per_r}, {"certified", certified}};
  r.pass = certified && worst <= 0.0;
  return r;
}

CriterionResult ac3(Context&) {
  CriterionResult r{.id = 3, .title = "growth rate at r = 1 and r = R", .time_limit = 60};
  Group g = f2();
  ChainEngine eng(g, StepDistribution::simple(g));
  const double R = eng.critical_radius();
  const double w1 = omega_estimate(eng, 1.0, 14).omega_hat;
  const double wR = omega_estimate(eng, R, 14).omega_hat;
  r.values = {{"R_hat", R}, {"omega_1", w1}, {"omega_R", wR}, {"half_log3", 0.5 * std::log(3.0)}};
  r.pass = std::abs(w1) <= 0.02 && wR >= 0.52 && wR <= 0.58;
  return r;
}

CriterionResult ac4(Context&) {
  CriterionResult r{.id = 4, .title = "growth rate increasing and below v/2", .time_limit = 120};
  Group g = f2();
  ChainEngine eng(g, StepDistribution::simple(g));
  const double R = eng.critical_radius();
  const double v = volume_growth(g, 14);
  json rows = json::array();
  bool increasing = true, bounded = true;
  double prev = -INFINITY;
  for (int i = 0; i < 6; ++i) {
    const double s = 1.0 + (R - 1.0) * i / 5.0;
    const double w = omega_estimate(eng, s, 14).omega_hat;
    increasing = increasing && w > prev;
    bounded = bounded && w <= v / 2.0 + 0.03;
    prev = w;
    rows.push_back({{"r", s}, {"omega", w}});
  }
  r.values = {{"v_hat", v}, {"grid", rows}, {"increasing", increasing}, {"bounded", bounded}};
  r.pass = increasing && bounded;
  return r;
}

CriterionResult ac5(Context&) {
  CriterionResult r{.id = 5, .title = "supermultiplicativity constant and spread", .time_limit = 120};
  json rows = json::array();
  bool pass = true;
  auto check = [&](const std::string& label, const GreenEngine& eng) {
    const double R = eng.critical_radius();
    for (double s : {1.0, 0.5 * (1.0 + R), R}) {
      const auto est = omega_estimate(eng, s, 14);
      pass = pass && est.C_hat <= 10.0 && est.spread <= 10.0;
      rows.push_back({{"group", label}, {"r", s}, {"C_hat", est.C_hat}, {"spread", est.spread}});
    }
  };
  Group g = f2();
  check("F2", ChainEngine(g, StepDistribution::simple(g)));
  Group h = f2_z3();
  check("F2*Z3", *make_green_engine(h, StepDistribution::adapted(h, 0.1)));
  r.values = {{"rows", rows}};
  r.pass = pass;
  return r;
}

CriterionResult ac6(Context& ctx) {
  CriterionResult r{.id = 6, .title = "many-to-one first moment", .time_limit = 120};
  Group g = f2();
  BrwConfig c{.mu = StepDistribution::simple(g)};
  c.nu = OffspringDistribution::geometric(1.05);
  c.T = 40;
  c.replicas = 10000;
  c.threads = ctx.opt.threads;
  c.seed = task_seed(ctx.opt.seed, "many-to-one");
  const auto m = many_to_one_check(g, c, {g.identity(), g.parse("a"), g.parse("a a")});
  json rows = json::array();
  bool pass = true;
  for (const auto& v : m) {
    pass = pass && std::abs(v.z) <= 3.0 && !v.undersampled;
    rows.push_back({{"x", g.format(v.x)}, {"mean", v.mean}, {"stderr", v.stderr_}, {"expected", v.expected},
                    {"green", v.green}, {"z", v.z}});
  }
  r.values = {{"rows", rows}};
  r.pass = pass;
  return r;
}

CriterionResult ac7(Context& ctx) {
  CriterionResult r{.id = 7, .title = "BRW trace growth rate", .time_limit = 300};
  Group g = f2();
  ChainEngine eng(g, StepDistribution::simple(g));
  const double omega = omega_estimate(eng, 1.1, 14).omega_hat;
  const auto traces = ctx.brw_batch(g, 1.1, 60, 20, "growth");
  std::vector<double> mean_M(17, 0.0), slopes;
  bool complete = true;
  for (const auto& tr : traces) {
    if (tr.radius() < 16) {
      complete = false;
      continue;
    }
    for (int n = 8; n <= 16; ++n) mean_M[n] += static_cast<double>(tr.sphere_counts()[n]) / traces.size();
    slopes.push_back(trace_growth_slope(tr, 8, 16));
  }
  std::vector<double> xs, ys;
  for (int n = 8; n <= 16; ++n) {
    xs.push_back(n);
    ys.push_back(std::log(mean_M[n]));
  }
  const double slope = complete ? fit_line(xs, ys).slope : NAN;
  const double max_slope = slopes.empty() ? NAN : *std::max_element(slopes.begin(), slopes.end());
  const auto over = std::count_if(slopes.begin(), slopes.end(), [&](double s) { return s > omega + 0.05; });
  r.values = {{"omega_hat", omega},   {"slope_of_mean", slope},       {"replica_slopes", slopes},
              {"max_replica_slope", max_slope}, {"replicas_above_bound", over}, {"complete", complete}};
  r.pass = complete && std::abs(slope - omega) <= 0.1 && over == 0;
  return r;
}

CriterionResult ac8(Context& ctx) {
  CriterionResult r{.id = 8, .title = "dimension sandwich", .time_limit = 600};
  ctx.ensure_hdim();
  Group g = f2();
  ChainEngine eng(g, StepDistribution::simple(g));
  const double omega = omega_estimate(eng, 1.1, 14).omega_hat;
  const auto rep = hdim_report(g, ctx.hdim_main, ctx.hdim_held, 1.1, 0.5, omega);
  r.values = {{"target", rep.target},   {"h_lower", rep.h_lower},        {"h_upper", rep.h_upper},
              {"width", rep.width()},   {"box_dimension", rep.box_dimension}, {"replicas", rep.replicas},
              {"n_window", {rep.lo, rep.hi}}};
  r.pass = rep.contains_target() && rep.width() <= 0.25 && std::abs(rep.h_upper - rep.target) <= 0.1;
  return r;
}

CriterionResult ac9(Context&) {
  CriterionResult r{.id = 9, .title = "free-product Green identities", .time_limit = 300};
  Group g = f2_z3();
  auto mu = StepDistribution::adapted(g, 0.1);
  ProductEngine analytic(g, mu);
  ChainEngine direct(g, mu, {.chain_radius = 16, .analytic_products = false});
  const auto mc = check_multiplicativity(analytic, direct, 1.0, 6);
  const Group& f = g.factor(0);
  const auto tc = verify_transfer(analytic, direct, 1.0,
                                  {{f.identity(), f.parse("a")},
                                   {f.identity(), f.identity()},
                                   {f.parse("a"), f.parse("b")},
                                   {f.identity(), f.parse("a b")}});
  json rows = json::array();
  for (const auto& t : tc.rows)
    rows.push_back({{"x", f.format(t.x)}, {"y", f.format(t.y)}, {"rel_error", t.rel_error}});
  r.values = {{"elements", mc.elements},
              {"max_split_error", mc.max_split_error},
              {"max_formula_error", mc.max_formula_error},
              {"transfer", rows},
              {"max_transfer_error", tc.max_rel_error}};
  r.pass = mc.max_split_error <= 1e-6 && mc.max_formula_error <= 1e-6 && tc.max_rel_error <= 1e-3;
  return r;
}

CriterionResult ac10(Context&) {
  CriterionResult r{.id = 10, .title = "parabolic gap on F2*Z3", .time_limit = 600};
  Group g = f2_z3();
  ProductEngine eng(g, StepDistribution::adapted(g, 0.1));
  const double R = eng.critical_radius();
  bool pass = true;
  json rows = json::array();
  for (double s : {1.02, 0.95 * R}) {
    const auto rep = parabolic_gap_check(eng, s, 14);
    const double wz = rep.factors[1].omega_P;
    pass = pass && wz < 0.0 && rep.omega_gamma > 0.0;
    rows.push_back({{"r", s}, {"omega_gamma", rep.omega_gamma}, {"omega_Z3", wz}, {"omega_F2", rep.factors[0].omega_P}});
  }
  json witness = nullptr;
  for (double frac : {0.9, 0.95, 0.98, 0.99, 1.0}) {
    const double s = frac * R;
    const auto rep = parabolic_gap_check(eng, s, 14);
    const double wf = rep.factors[0].omega_P;
    if (wf > 0.0 && wf < rep.omega_gamma - 0.05) {
      witness = {{"r", s}, {"omega_F2", wf}, {"omega_gamma", rep.omega_gamma}};
      break;
    }
  }
  r.values = {{"R_hat", R}, {"rows", rows}, {"witness", witness}};
  r.pass = pass && !witness.is_null();
  return r;
}

CriterionResult ac11(Context& ctx) {
  CriterionResult r{.id = 11, .title = "shadow diameters", .time_limit = 300};
  json rows = json::array();
  bool pass = true;
  for (const auto& g : {f2(), f2_z3()}) {
    std::mt19937_64 rng(task_seed(ctx.opt.seed, "shadows/" + g.spec().label()));
    std::vector<Shadow> all;
    for (int len = 0; len <= 10; ++len)
      for (int k = 0; k < 3; ++k) {
        const Element x = random_of_length(g, len, rng);
        for (int K = 0; K <= 2; ++K) all.push_back(shadow(g, x, K, 0.5));
      }
    const auto fit = fit_shadow_constant(all, 0.5, 0.3);
    json per_length = json::object();
    for (const auto& [len, c] : fit.per_length) per_length[std::to_string(len)] = c;
    pass = pass && fit.stable && std::isfinite(fit.C_hat);
    rows.push_back({{"group", g.spec().label()}, {"C_hat", fit.C_hat}, {"per_length", per_length}, {"stable", fit.stable}});
  }
  r.values = {{"rows", rows}};
  r.pass = pass;
  return r;
}

CriterionResult ac12(Context& ctx) {
  CriterionResult r{.id = 12, .title = "energy boundedness", .time_limit = 600};
  ctx.ensure_hdim();
  Group g = f2();
  ChainEngine eng(g, StepDistribution::simple(g));
  const double omega = omega_estimate(eng, 1.1, 14).omega_hat;
  const double target = omega / std::log(2.0);
  const auto below = energy_trend(g, ctx.hdim_main, ctx.hdim_held, 0.8 * target, 0.5, 8, 14, 0, 0, 10.0);
  std::size_t radius = 0;
  for (const auto& tr : ctx.hdim_main) radius = std::max(radius, tr.sphere_counts().size());
  std::vector<double> M(radius, 0.0);
  for (const auto& tr : ctx.hdim_main)
    for (std::size_t n = 0; n < tr.sphere_counts().size(); ++n)
      M[n] += static_cast<double>(tr.sphere_counts()[n]) / ctx.hdim_main.size();
  const auto above = covering_sum(M, 0.5, 1.2 * target, 8, 14);
  r.values = {{"target", target},
              {"h_low", 0.8 * target},
              {"mean_W", below.mean_W},
              {"t_stat", below.t_stat},
              {"upward", below.upward},
              {"h_high", 1.2 * target},
              {"covering_log_slope", above.log_slope},
              {"decaying", above.decaying}};
  r.pass = !below.upward && above.decaying;
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  const std::vector<std::function<CriterionResult(Context&)>> all{ac1, ac2, ac3, ac4,  ac5,  ac6,
                                                                  ac7, ac8, ac9, ac10, ac11, ac12};
  Context ctx{.opt = opt};
  std::vector<CriterionResult> out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    auto res = all[i](ctx);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(res));
  }
  return out;
}

json acceptance_summary(const std::vector<CriterionResult>& results, std::uint64_t seed) {
  json crit = json::array();
  bool all = true;
  for (const auto& r : results) {
    crit.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"values", r.values}});
    all = all && r.pass;
  }
  return {{"seed", seed}, {"criteria", crit}, {"all_pass", all}};
}

std::string format_result_line(const CriterionResult& r) {
  char buf[256];
  const bool ok = r.pass && r.within_time();
  std::snprintf(buf, sizeof buf, "AC%-2d %s  %s (%.1fs%s)", r.id, ok ? "PASS" : "FAIL", r.title.c_str(), r.seconds,
                r.within_time() ? "" : ", over the time limit");
  return buf;
}

}  // namespace brwlab
