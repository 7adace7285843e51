#include "brwlab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "brwlab/acceptance.hpp"
#include "brwlab/boundary.hpp"
#include "brwlab/brw.hpp"
#include "brwlab/dimension.hpp"
#include "brwlab/errors.hpp"
#include "brwlab/freeprod.hpp"
#include "brwlab/randwalk.hpp"

namespace brwlab {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no infinities; they become strings so the summary stays lossless.
json jnum(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

class Run {
 public:
  Run(const ExperimentConfig& c, RunManifest& m) : c_(c), m_(m), dir_(c.out) {}

  std::ofstream open(const std::string& name) {
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
    m_.outputs.push_back(name);
    return os;
  }
  void write_text(const std::string& name, const std::string& text) { open(name) << text; }
  void cap(const std::string& what) { m_.caps_hit.push_back(what); }
  void check(const std::string& name, bool ok) { m_.checks[name] = ok; }
  json& summary() { return m_.summary; }
  const ExperimentConfig& config() const { return c_; }

 private:
  const ExperimentConfig& c_;
  RunManifest& m_;
  fs::path dir_;
};

EngineOptions engine_options(const ExperimentConfig& c) {
  EngineOptions o;
  o.chain_radius = c.chain_radius;
  return o;
}

std::vector<double> resolved_grid(const ExperimentConfig& c, double R_hat) {
  std::vector<double> rs;
  for (const auto& e : c.r_grid) rs.push_back(resolve_r(e, R_hat));
  return rs;
}

BrwConfig brw_config(const Group& g, const ExperimentConfig& c, const std::string& task) {
  BrwConfig b{.mu = make_measure(g, c.mu)};
  b.nu = make_offspring(c.nu);
  b.T = c.T;
  b.K = c.K;
  b.replicas = c.replicas;
  b.threads = c.threads;
  b.seed = task_seed(c.seed, task);
  return b;
}

void run_green(Run& run, const Group& g) {
  const auto& c = run.config();
  const auto mu = make_measure(g, c.mu);
  const auto rho = spectral_radius(g, mu, c.N);
  GreenOptions opt;
  opt.rho_hat = rho.rho_lower;
  const auto xs = config_elements(g, c);
  auto os = run.open("green.csv");
  os << "r,x,|x|,N,value,tail_bound,certified,extrapolated\n";
  json rows = json::array();
  bool certified = true;
  for (double r : resolved_grid(c, rho.R_hat)) {
    const auto vals = green_many(g, mu, r, xs, c.N, opt);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto& v = vals[i];
      os << num(r) << ',' << g.format(xs[i]) << ',' << g.word_length(xs[i]) << ',' << v.N << ',' << num(v.value) << ','
         << num(v.tail_bound) << ',' << v.certified << ',' << num(v.extrapolated) << '\n';
      rows.push_back({{"r", r}, {"x", g.format(xs[i])}, {"value", v.value}, {"tail_bound", jnum(v.tail_bound)},
                      {"certified", v.certified}});
      if (r < rho.R_hat) certified = certified && v.certified;
    }
  }
  run.summary()["rho_lower"] = rho.rho_lower;
  run.summary()["rho_extrapolated"] = rho.rho_extrapolated;
  run.summary()["R_hat"] = rho.R_hat;
  run.summary()["rows"] = rows;
  run.check("tails_certified_below_R", certified);
  run.check("rho_sequence_monotone", rho.monotone);
}

void run_omega(Run& run, const Group& g) {
  const auto& c = run.config();
  const auto engine = make_green_engine(g, make_measure(g, c.mu), engine_options(c));
  const double R = engine->critical_radius();
  auto os = run.open("omega.csv");
  os << "r,omega_hat,residual,slope_stderr,C_hat,omega_sup,spread,agree\n";
  auto hs = run.open("sphere_sums.csv");
  hs << "r,n,H\n";
  json rows = json::array();
  bool agree = true;
  for (double r : resolved_grid(c, R)) {
    const auto e = omega_estimate(*engine, r, c.n_max);
    os << num(r) << ',' << num(e.omega_hat) << ',' << num(e.residual) << ',' << num(e.slope_stderr) << ','
       << num(e.C_hat) << ',' << num(e.omega_sup) << ',' << num(e.spread) << ',' << e.agree << '\n';
    for (std::size_t n = 0; n < e.H.size(); ++n) hs << num(r) << ',' << n << ',' << num(e.H[n]) << '\n';
    rows.push_back({{"r", r}, {"omega_hat", e.omega_hat}, {"residual", e.residual}, {"C_hat", e.C_hat},
                    {"agree", e.agree}});
    agree = agree && e.agree;
  }
  run.summary()["method"] = engine->method();
  run.summary()["R_hat"] = R;
  run.summary()["volume_growth"] = volume_growth(g, c.n_max);
  run.summary()["rows"] = rows;
  run.check("slope_and_sup_forms_agree", agree);
}

void run_brw(Run& run, const Group& g) {
  const auto& c = run.config();
  const auto cfg = brw_config(g, c, "brw");
  const auto traces = BrwSimulator(g, cfg).run_replicas();
  auto sc = run.open("sphere_counts.csv");
  sc << "replica,n,M_n\n";
  auto pc = run.open("population.csv");
  pc << "replica,t,population\n";
  json reps = json::array();
  std::vector<double> slopes;
  int truncated = 0;
  for (const auto& tr : traces) {
    for (std::size_t n = 0; n < tr.sphere_counts().size(); ++n)
      sc << tr.replica << ',' << n << ',' << tr.sphere_counts()[n] << '\n';
    for (std::size_t t = 0; t < tr.population.size(); ++t) pc << tr.replica << ',' << t << ',' << tr.population[t] << '\n';
    json rj = {{"replica", tr.replica}, {"generations", tr.generations}, {"truncated", tr.truncated},
               {"visited", tr.size()}, {"radius", tr.radius()}};
    if (tr.radius() >= c.hi) {
      try {
        const double s = trace_growth_slope(tr, c.lo, c.hi);
        rj["growth_slope"] = s;
        slopes.push_back(s);
      } catch (const ValidationError&) {
      }
    }
    truncated += tr.truncated;
    reps.push_back(rj);
  }
  try {
    std::ostringstream buf;
    traces.front().write_csv(g, buf);
    run.write_text("trace.csv", buf.str());
  } catch (const CapExceeded& e) {
    run.cap(std::string("trace.csv: ") + e.what());
  }
  if (truncated > 0) run.cap("population cap K reached in " + std::to_string(truncated) + " replicas");
  double mean_slope = NAN;
  if (!slopes.empty()) {
    mean_slope = 0.0;
    for (double s : slopes) mean_slope += s / static_cast<double>(slopes.size());
  }
  run.summary()["offspring_mean"] = cfg.nu.mean();
  run.summary()["replicas"] = reps;
  run.summary()["mean_growth_slope"] = jnum(mean_slope);

  if (!c.elements.empty()) {
    auto m1 = many_to_one_check(g, brw_config(g, c, "brw/many-to-one"), config_elements(g, c));
    auto os = run.open("many_to_one.csv");
    os << "x,replicas,mean,stderr,expected,green,z,undersampled\n";
    json rows = json::array();
    bool ok = true;
    for (const auto& v : m1) {
      os << g.format(v.x) << ',' << v.replicas << ',' << num(v.mean) << ',' << num(v.stderr_) << ',' << num(v.expected)
         << ',' << num(v.green) << ',' << num(v.z) << ',' << v.undersampled << '\n';
      rows.push_back({{"x", g.format(v.x)}, {"mean", v.mean}, {"expected", v.expected}, {"z", jnum(v.z)}});
      ok = ok && std::abs(v.z) <= 3.0 && !v.undersampled;
    }
    run.summary()["many_to_one"] = rows;
    run.check("many_to_one_within_3_stderr", ok);
  }
}

void run_hdim(Run& run, const Group& g) {
  const auto& c = run.config();
  const auto mu = make_measure(g, c.mu);
  const double r = make_offspring(c.nu).mean();
  const auto engine = make_green_engine(g, mu, engine_options(c));
  const double omega = omega_estimate(*engine, r, c.n_max).omega_hat;
  const auto main = BrwSimulator(g, brw_config(g, c, "hdim/main")).run_replicas();
  const auto held = BrwSimulator(g, brw_config(g, c, "hdim/held-out")).run_replicas();
  int truncated = 0;
  for (const auto* batch : {&main, &held})
    for (const auto& tr : *batch) truncated += tr.truncated;
  if (truncated > 0) run.cap("population cap K reached in " + std::to_string(truncated) + " replicas");
  HdimOptions ho;
  ho.lo = c.lo;
  ho.hi = c.hi;
  ho.eta = c.eta;
  ho.L = c.L;
  ho.C = c.C;
  ho.alpha = c.covering_alpha;
  ho.h_grid = c.h_grid;
  const auto rep = hdim_report(g, main, held, r, c.lambda, omega, ho);
  auto os = run.open("energy.csv");
  os << "h,n,mean_W,stderr_W,fraction_in_B,slope,t_stat,upward\n";
  json energies = json::array();
  for (const auto& e : rep.energies) {
    for (std::size_t i = 0; i < e.ns.size(); ++i)
      os << num(e.h) << ',' << e.ns[i] << ',' << num(e.mean_W[i]) << ',' << num(e.stderr_W[i]) << ','
         << num(e.fraction_in_B[i]) << ',' << num(e.slope) << ',' << num(e.t_stat) << ',' << e.upward << '\n';
    energies.push_back({{"h", e.h}, {"slope", e.slope}, {"t_stat", jnum(e.t_stat)}, {"upward", e.upward}});
  }
  std::vector<double> M;
  for (const auto& tr : main) {
    if (M.size() < tr.sphere_counts().size()) M.resize(tr.sphere_counts().size(), 0.0);
    for (std::size_t n = 0; n < tr.sphere_counts().size(); ++n)
      M[n] += static_cast<double>(tr.sphere_counts()[n]) / static_cast<double>(main.size());
  }
  auto cs = run.open("covering.csv");
  cs << "n,mean_M,term_at_h_upper\n";
  const auto cov = covering_sum(M, c.lambda, std::max(rep.h_upper, 1e-6), c.lo, c.hi, c.covering_alpha);
  for (std::size_t n = 2; n < M.size(); ++n) cs << n << ',' << num(M[n]) << ',' << num(cov.terms[n]) << '\n';
  run.summary()["r"] = r;
  run.summary()["omega_hat"] = omega;
  run.summary()["target"] = rep.target;
  run.summary()["h_lower"] = rep.h_lower;
  run.summary()["h_upper"] = rep.h_upper;
  run.summary()["width"] = rep.width();
  run.summary()["box_dimension"] = rep.box_dimension;
  run.summary()["energies"] = energies;
  auto sens = run.open("c_sensitivity.csv");
  sens << "C,h,slope,t_stat,upward,mean_fraction_in_B\n";
  json cs_rows = json::array();
  for (double Cs : {4.0, 10.0, 25.0}) {
    const double h = 0.8 * rep.target;
    const auto e = energy_trend(g, main, held, h, c.lambda, c.lo, c.hi, c.eta, c.L, Cs);
    double inB = 0.0;
    for (double f : e.fraction_in_B) inB += f / static_cast<double>(e.fraction_in_B.size());
    sens << num(Cs) << ',' << num(h) << ',' << num(e.slope) << ',' << num(e.t_stat) << ',' << e.upward << ','
         << num(inB) << '\n';
    cs_rows.push_back({{"C", Cs}, {"h", h}, {"t_stat", jnum(e.t_stat)}, {"upward", e.upward}});
  }
  run.summary()["c_sensitivity"] = cs_rows;
  run.check("sandwich_contains_target", rep.contains_target());
}

void run_floyd(Run& run, const Group& g) {
  const auto& c = run.config();
  const auto xs = config_elements(g, c);
  auto os = run.open("floyd.csv");
  os << "x,y,floyd,N,converged,visual\n";
  json rows = json::array();
  bool converged = true;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const auto f = floyd_distance(g, xs[i], xs[j], c.lambda, g.identity());
      const double v = visual_distance_cells(g, xs[i], xs[j], c.lambda);
      os << g.format(xs[i]) << ',' << g.format(xs[j]) << ',' << num(f.value) << ',' << f.N << ',' << f.converged << ','
         << num(v) << '\n';
      rows.push_back({{"x", g.format(xs[i])}, {"y", g.format(xs[j])}, {"floyd", f.value}, {"visual", v}});
      converged = converged && f.converged;
    }
  std::vector<Shadow> shadows;
  for (const auto& x : xs)
    for (int K = 0; K <= c.shadow_K; ++K) shadows.push_back(shadow(g, x, K, c.lambda));
  auto ss = run.open("shadows.csv");
  write_shadow_csv(g, shadows, c.lambda, ss);
  const auto fit = fit_shadow_constant(shadows, c.lambda);
  run.summary()["pairs"] = rows;
  run.summary()["shadow_C_hat"] = fit.C_hat;
  run.summary()["shadow_stable"] = fit.stable;
  run.check("floyd_values_converged", converged);
  run.check("shadow_constant_stable", fit.stable);
}

void run_freeprod(Run& run, const Group& g) {
  const auto& c = run.config();
  const auto mu = make_measure(g, c.mu);
  if (!ProductEngine::applicable(g, mu)) throw ValidationError("freeprod needs an adapted measure on a free product");
  const ProductEngine engine(g, mu, engine_options(c));
  const double R = engine.critical_radius();
  auto os = run.open("freeprod.csv");
  os << "r,w0,w1,zeta0,zeta1,omega_gamma,residual,weight_residual,valid\n";
  json rows = json::array();
  bool valid = true;
  for (double r : resolved_grid(c, R)) {
    const auto st = engine.solve(r);
    const auto e = omega_estimate(engine, r, c.n_max);
    double resid = NAN;
    bool ok = true;
    if (g.factor_count() == 2) {
      const auto w = return_weights(engine, r, c.N);
      resid = w.residual;
      ok = w.valid;
    }
    os << num(r);
    for (int i = 0; i < 2; ++i) os << ',' << (i < static_cast<int>(st.w.size()) ? num(st.w[i]) : "");
    for (int i = 0; i < 2; ++i) os << ',' << (i < static_cast<int>(st.zeta.size()) ? num(st.zeta[i]) : "");
    os << ',' << num(e.omega_hat) << ',' << num(e.residual) << ',' << num(resid) << ',' << ok << '\n';
    rows.push_back({{"r", r}, {"w", st.w}, {"zeta", st.zeta}, {"omega_gamma", e.omega_hat}, {"valid", ok}});
    valid = valid && ok;
  }
  run.summary()["R_hat"] = R;
  run.summary()["rows"] = rows;
  run.check("return_weights_below_1", valid);

  if (c.chain_radius >= 0) {
    const ChainEngine direct(g, mu, engine_options(c));
    const int len = std::min(6, c.n_max);
    const double r = resolve_r(c.r_grid.front(), R);
    const auto m = check_multiplicativity(engine, direct, r, len);
    run.summary()["multiplicativity"] = {{"r", r},
                                         {"max_length", len},
                                         {"elements", m.elements},
                                         {"max_split_error", m.max_split_error},
                                         {"max_formula_error", m.max_formula_error}};
    run.check("syllable_split_within_1e-6", m.max_split_error <= 1e-6);
  }

  if (!c.alpha_grid.empty()) {
    std::vector<double> fractions;
    for (const auto& e : c.r_grid)
      if (needs_r_hat({e})) fractions.push_back(resolve_r(e, 1.0));
    const auto land = example_landscape(g, c.alpha_grid, fractions, c.n_max, engine_options(c));
    auto ls = run.open("landscape.csv");
    ls << "alpha,r,R_hat,omega_gamma,residual,factor,omega_P,gap,degenerate,R_P_at_critical,theta_divergent_looking\n";
    json lrows = json::array();
    for (const auto& row : land)
      for (std::size_t f = 0; f < row.omega_P.size(); ++f) {
        ls << num(row.alpha) << ',' << num(row.r) << ',' << num(row.R_hat) << ',' << num(row.omega_gamma) << ','
           << num(row.residual) << ',' << f << ',' << num(row.omega_P[f]) << ',' << row.gap[f] << ','
           << row.degenerate[f] << ',' << num(row.R_P_at_critical[f]) << ',' << row.theta_divergent_looking[f] << '\n';
        lrows.push_back({{"alpha", row.alpha}, {"r", row.r}, {"factor", f}, {"omega_gamma", row.omega_gamma},
                         {"omega_P", row.omega_P[f]}, {"gap", static_cast<bool>(row.gap[f])}});
      }
    run.summary()["landscape"] = lrows;
  }
}

void run_gap(Run& run, const Group& g) {
  const auto& c = run.config();
  const auto engine = make_green_engine(g, make_measure(g, c.mu), engine_options(c));
  const double R = engine->critical_radius();
  auto os = run.open("gap.csv");
  os << "r,omega_gamma,residual,factor,label,omega_P,factor_residual,subexponential,gap,margin,confidence\n";
  json rows = json::array();
  bool all_gap = true;
  for (double r : resolved_grid(c, R)) {
    const auto rep = parabolic_gap_check(*engine, r, c.n_max);
    for (const auto& f : rep.factors) {
      os << num(r) << ',' << num(rep.omega_gamma) << ',' << num(rep.residual) << ',' << f.factor << ',' << f.label
         << ',' << num(f.omega_P) << ',' << num(f.residual) << ',' << f.subexponential << ',' << f.gap << ','
         << num(f.margin) << ',' << f.confidence << '\n';
      rows.push_back({{"r", r}, {"omega_gamma", rep.omega_gamma}, {"factor", f.label}, {"omega_P", f.omega_P},
                      {"gap", f.gap}, {"confidence", f.confidence}});
      all_gap = all_gap && f.gap;
    }
  }
  run.summary()["method"] = engine->method();
  run.summary()["R_hat"] = R;
  run.summary()["rows"] = rows;
  run.check("gap_at_every_factor", all_gap);
}

void run_check(Run& run, const RunOptions& opt) {
  const auto& c = run.config();
  const auto results = run_acceptance({.seed = c.seed, .threads = c.threads, .only = opt.only});
  auto os = run.open("acceptance.csv");
  os << "id,title,pass\n";
  for (const auto& r : results) {
    os << r.id << ',' << r.title << ',' << r.pass << '\n';
    run.check("AC" + std::to_string(r.id), r.pass);
  }
  run.summary()["acceptance"] = acceptance_summary(results, c.seed);
}

}  // namespace

bool RunManifest::checks_passed() const {
  for (const auto& [k, v] : checks.items())
    if (!v.get<bool>()) return false;
  return true;
}

int RunManifest::exit_code() const {
  if (!caps_hit.empty()) return kExitCapTruncation;
  if (check_requested && !checks_passed()) return kExitCheckFailure;
  return kExitOk;
}

json RunManifest::to_json() const {
  return {{"tool", "brwlab"},        {"version", version},   {"experiment", experiment},
          {"config_hash", config_hash}, {"wall_seconds", wall_seconds}, {"caps_hit", caps_hit},
          {"outputs", outputs},      {"checks", checks},     {"summary", summary}};
}

std::vector<Element> config_elements(const Group& g, const ExperimentConfig& c) {
  std::vector<Element> xs;
  for (const auto& w : c.elements) xs.push_back(g.parse(w == "e" ? "" : w));
  if (!xs.empty()) return xs;
  if (c.kind != ExperimentKind::Floyd) xs.push_back(g.identity());
  for (const auto& gen : g.generators()) {
    const Element x = g.parse(gen.name);
    if (std::find(xs.begin(), xs.end(), x) == xs.end() && std::find(xs.begin(), xs.end(), g.inverse(x)) == xs.end())
      xs.push_back(x);
  }
  return xs;
}

RunManifest run_experiment(const ExperimentConfig& c, const RunOptions& opt) {
  validate(c);
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest m;
  m.config_hash = config_hash(c);
  m.version = BRWLAB_VERSION;
  m.experiment = to_string(c.kind);
  m.check_requested = opt.check;
  m.checks = json::object();
  const Group g(parse_group_spec(c.group));
  std::vector<std::string> gens;
  for (const auto& gen : g.generators())
    if (gen.positive) gens.push_back(gen.name);
  m.summary = {{"experiment", m.experiment}, {"group", c.group},          {"generators", gens},
               {"seed", c.seed},             {"config_hash", m.config_hash}};
  fs::create_directories(c.out);
  Run run(c, m);
  run.write_text("config.yaml", render_config(c));
  try {
    switch (c.kind) {
      case ExperimentKind::Green: run_green(run, g); break;
      case ExperimentKind::Omega: run_omega(run, g); break;
      case ExperimentKind::Brw: run_brw(run, g); break;
      case ExperimentKind::Hdim: run_hdim(run, g); break;
      case ExperimentKind::Floyd: run_floyd(run, g); break;
      case ExperimentKind::Freeprod: run_freeprod(run, g); break;
      case ExperimentKind::Gap: run_gap(run, g); break;
      case ExperimentKind::Check: run_check(run, opt); break;
    }
  } catch (const CapExceeded& e) {
    m.caps_hit.push_back(e.what());
    m.summary["incomplete"] = true;
  }
  m.summary["checks"] = m.checks;
  run.write_text("summary.json", m.summary.dump(2) + "\n");
  m.outputs.push_back("manifest.json");
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream(fs::path(c.out) / "manifest.json", std::ios::binary) << m.to_json().dump(2) << "\n";
  return m;
}

}  // namespace brwlab
