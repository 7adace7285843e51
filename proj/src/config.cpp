#include "brwlab/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "brwlab/errors.hpp"

namespace brwlab {

namespace {

int parse_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ValidationError("bad " + what + " in '" + s + "'");
  return v;
}

int parse_positive(const std::string& s, const std::string& what, int least) {
  const int v = parse_int(s, what);
  if (v < least) throw ValidationError(what + " must be at least " + std::to_string(least));
  return v;
}

GroupSpec parse_factor(const std::string& t) {
  if (t.size() >= 2 && t[0] == 'F') return GroupSpec::free_group(parse_positive(t.substr(1), "free rank", 1));
  if (t == "Z") return GroupSpec::free_abelian(1);
  if (t.rfind("Z/", 0) == 0) return GroupSpec::cyclic(parse_positive(t.substr(2), "cyclic order", 2));
  if (t.size() >= 2 && t[0] == 'Z') return GroupSpec::free_abelian(parse_positive(t.substr(1), "lattice rank", 1));
  throw ValidationError("unknown group '" + t + "'");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T get(const YAML::Node& n, const char* key, T fallback) {
  if (!n[key]) return fallback;
  try {
    return n[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void check_keys(const YAML::Node& n, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& kv : n) {
    const auto k = kv.first.as<std::string>();
    bool known = false;
    for (const char* s : keys) known = known || k == s;
    if (!known) throw ValidationError("unknown key '" + k + "' in " + where);
  }
}

}  // namespace

GroupSpec parse_group_spec(const std::string& text) {
  std::vector<GroupSpec> factors;
  std::string cur;
  for (char ch : text + "*") {
    if (ch == ' ') continue;
    if (ch != '*') {
      cur += ch;
      continue;
    }
    if (cur.empty()) throw ValidationError("empty factor in group '" + text + "'");
    factors.push_back(parse_factor(cur));
    cur.clear();
  }
  if (factors.size() == 1) return factors[0];
  return GroupSpec::free_product(std::move(factors));
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Green: return "green";
    case ExperimentKind::Omega: return "omega";
    case ExperimentKind::Brw: return "brw";
    case ExperimentKind::Hdim: return "hdim";
    case ExperimentKind::Floyd: return "floyd";
    case ExperimentKind::Freeprod: return "freeprod";
    case ExperimentKind::Gap: return "gap";
    case ExperimentKind::Check: return "check";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (auto k : {ExperimentKind::Green, ExperimentKind::Omega, ExperimentKind::Brw, ExperimentKind::Hdim,
                 ExperimentKind::Floyd, ExperimentKind::Freeprod, ExperimentKind::Gap, ExperimentKind::Check})
    if (to_string(k) == s) return k;
  throw ValidationError("unknown experiment kind '" + s + "'");
}

double resolve_r(const std::string& entry, double R_hat) {
  if (entry == "R") return R_hat;
  if (entry.rfind("R*", 0) == 0) return R_hat * std::stod(entry.substr(2));
  return std::stod(entry);
}

bool needs_r_hat(const std::vector<std::string>& grid) {
  for (const auto& e : grid)
    if (!e.empty() && e[0] == 'R') return true;
  return false;
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw ValidationError(m); };
  const Group g(parse_group_spec(c.group));
  if (c.mu.kind != "simple" && c.mu.kind != "adapted") fail("mu.kind must be simple or adapted");
  if (c.mu.kind == "adapted" && (g.kind() != GroupKind::FreeProduct || g.factor_count() != 2))
    fail("adapted measures need a product of two factors");
  if (!(c.mu.laziness >= 0.0 && c.mu.laziness < 1.0)) fail("mu.laziness must lie in [0,1)");
  if (!(c.mu.alpha > 0.0 && c.mu.alpha < 1.0)) fail("mu.alpha must lie in (0,1)");
  make_offspring(c.nu);
  if (c.n_max < 2 || c.n_max > 40) fail("n_max must lie in [2,40]");
  if (c.N < 1 || c.N > 2000) fail("N must lie in [1,2000]");
  if (c.T < 0 || c.T > 10000) fail("T must lie in [0,10000]");
  if (c.K < 1) fail("K must be positive");
  if (c.replicas < 1) fail("replicas must be positive");
  if (!(c.lambda > 0.0 && c.lambda < 1.0)) fail("lambda must lie in (0,1)");
  if (c.eta < 0 || c.L < 0) fail("eta and L must be nonnegative");
  if (c.lo < 2 || c.hi <= c.lo) fail("window needs 2 <= lo < hi");
  if (!(c.C >= 1.0)) fail("C must be at least 1");
  if (c.shadow_K < 0) fail("shadow_K must be nonnegative");
  if (c.threads < 1) fail("threads must be positive");
  if (c.out.empty()) fail("out must be a directory name");
  for (const auto& r : c.r_grid) {
    try {
      const double v = resolve_r(r, 1.0);
      if (!(v > 0.0)) fail("r values must be positive");
    } catch (const std::invalid_argument&) {
      fail("bad r-grid entry '" + r + "'");
    }
  }
  for (double h : c.h_grid)
    if (!(h >= 0.0)) fail("h values must be nonnegative");
  for (double a : c.alpha_grid)
    if (!(a > 0.0 && a < 1.0)) fail("alpha values must lie in (0,1)");
  for (const auto& w : c.elements) g.parse(w == "e" ? "" : w);
  const bool product = g.kind() == GroupKind::FreeProduct;
  if ((c.kind == ExperimentKind::Gap || c.kind == ExperimentKind::Freeprod) && !product)
    fail(to_string(c.kind) + " needs a free product group");
  if (c.kind == ExperimentKind::Freeprod && c.mu.kind != "adapted") fail("freeprod needs an adapted measure");
  if (c.kind == ExperimentKind::Freeprod && !c.alpha_grid.empty() && !needs_r_hat(c.r_grid))
    fail("an alpha grid needs R-relative r-grid entries");
  if (c.kind == ExperimentKind::Hdim && c.T < c.hi) fail("hdim needs T >= window.hi");
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ValidationError("config must be a mapping");
  check_keys(root,
             {"experiment", "group", "mu", "nu", "n_max", "N", "T", "K", "replicas", "lambda", "eta", "L", "window",
              "C", "covering_alpha", "chain_radius", "shadow_K", "r_grid", "h_grid", "alpha_grid", "elements", "seed",
              "out", "threads"},
             "config");
  ExperimentConfig c;
  c.kind = parse_experiment_kind(get<std::string>(root, "experiment", to_string(c.kind)));
  c.group = get<std::string>(root, "group", c.group);
  if (auto m = root["mu"]) {
    check_keys(m, {"kind", "laziness", "alpha"}, "mu");
    c.mu.kind = get<std::string>(m, "kind", c.mu.kind);
    c.mu.laziness = get<double>(m, "laziness", c.mu.laziness);
    c.mu.alpha = get<double>(m, "alpha", c.mu.alpha);
  }
  if (auto n = root["nu"]) {
    check_keys(n, {"kind", "mean", "max_children", "k", "p"}, "nu");
    c.nu.kind = get<std::string>(n, "kind", c.nu.kind);
    c.nu.mean = get<double>(n, "mean", c.nu.mean);
    c.nu.max_children = get<int>(n, "max_children", c.nu.max_children);
    c.nu.k = get<int>(n, "k", c.nu.k);
    c.nu.p = get<std::vector<double>>(n, "p", c.nu.p);
  }
  c.n_max = get<int>(root, "n_max", c.n_max);
  c.N = get<int>(root, "N", c.N);
  c.T = get<int>(root, "T", c.T);
  c.K = get<std::uint64_t>(root, "K", c.K);
  c.replicas = get<int>(root, "replicas", c.replicas);
  c.lambda = get<double>(root, "lambda", c.lambda);
  c.eta = get<int>(root, "eta", c.eta);
  c.L = get<int>(root, "L", c.L);
  if (auto w = root["window"]) {
    check_keys(w, {"lo", "hi"}, "window");
    c.lo = get<int>(w, "lo", c.lo);
    c.hi = get<int>(w, "hi", c.hi);
  }
  c.C = get<double>(root, "C", c.C);
  c.covering_alpha = get<double>(root, "covering_alpha", c.covering_alpha);
  c.chain_radius = get<int>(root, "chain_radius", c.chain_radius);
  c.shadow_K = get<int>(root, "shadow_K", c.shadow_K);
  c.r_grid = get<std::vector<std::string>>(root, "r_grid", c.r_grid);
  c.h_grid = get<std::vector<double>>(root, "h_grid", c.h_grid);
  c.alpha_grid = get<std::vector<double>>(root, "alpha_grid", c.alpha_grid);
  c.elements = get<std::vector<std::string>>(root, "elements", c.elements);
  c.seed = get<std::uint64_t>(root, "seed", c.seed);
  c.out = get<std::string>(root, "out", c.out);
  c.threads = get<int>(root, "threads", c.threads);
  validate(c);
  return c;
}

std::string render_config(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  auto doubles = [&](const std::vector<double>& v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (double x : v) e << fmt_double(x);
    e << YAML::EndSeq;
  };
  auto strings = [&](const std::vector<std::string>& v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (const auto& s : v) e << YAML::DoubleQuoted << s;
    e << YAML::EndSeq;
  };
  e << YAML::BeginMap;
  e << YAML::Key << "experiment" << YAML::Value << to_string(c.kind);
  e << YAML::Key << "group" << YAML::Value << YAML::DoubleQuoted << c.group;
  e << YAML::Key << "mu" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << c.mu.kind;
  e << YAML::Key << "laziness" << YAML::Value << fmt_double(c.mu.laziness);
  e << YAML::Key << "alpha" << YAML::Value << fmt_double(c.mu.alpha);
  e << YAML::EndMap;
  e << YAML::Key << "nu" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << c.nu.kind;
  e << YAML::Key << "mean" << YAML::Value << fmt_double(c.nu.mean);
  e << YAML::Key << "max_children" << YAML::Value << c.nu.max_children;
  e << YAML::Key << "k" << YAML::Value << c.nu.k;
  e << YAML::Key << "p" << YAML::Value;
  doubles(c.nu.p);
  e << YAML::EndMap;
  e << YAML::Key << "n_max" << YAML::Value << c.n_max;
  e << YAML::Key << "N" << YAML::Value << c.N;
  e << YAML::Key << "T" << YAML::Value << c.T;
  e << YAML::Key << "K" << YAML::Value << c.K;
  e << YAML::Key << "replicas" << YAML::Value << c.replicas;
  e << YAML::Key << "lambda" << YAML::Value << fmt_double(c.lambda);
  e << YAML::Key << "eta" << YAML::Value << c.eta;
  e << YAML::Key << "L" << YAML::Value << c.L;
  e << YAML::Key << "window" << YAML::Value << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "lo" << YAML::Value << c.lo << YAML::Key << "hi" << YAML::Value << c.hi << YAML::EndMap;
  e << YAML::Key << "C" << YAML::Value << fmt_double(c.C);
  e << YAML::Key << "covering_alpha" << YAML::Value << fmt_double(c.covering_alpha);
  e << YAML::Key << "chain_radius" << YAML::Value << c.chain_radius;
  e << YAML::Key << "shadow_K" << YAML::Value << c.shadow_K;
  e << YAML::Key << "r_grid" << YAML::Value;
  strings(c.r_grid);
  e << YAML::Key << "h_grid" << YAML::Value;
  doubles(c.h_grid);
  e << YAML::Key << "alpha_grid" << YAML::Value;
  doubles(c.alpha_grid);
  e << YAML::Key << "elements" << YAML::Value;
  strings(c.elements);
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "out" << YAML::Value << YAML::DoubleQuoted << c.out;
  e << YAML::Key << "threads" << YAML::Value << c.threads;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string config_hash(const ExperimentConfig& c) {
  const std::string text = render_config(c);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

StepDistribution make_measure(const Group& g, const MeasureConfig& m) {
  if (m.kind == "simple") return StepDistribution::simple(g, m.laziness);
  if (m.kind == "adapted") return StepDistribution::adapted(g, m.alpha);
  throw ValidationError("unknown measure kind '" + m.kind + "'");
}

OffspringDistribution make_offspring(const OffspringConfig& o) {
  if (o.kind == "geometric") {
    if (!(o.mean >= 1.0)) throw ValidationError("nu.mean must be at least 1");
    if (o.max_children < 2) throw ValidationError("nu.max_children must be at least 2");
    return OffspringDistribution::geometric(o.mean, o.max_children);
  }
  if (o.kind == "fixed") {
    if (o.k < 1) throw ValidationError("nu.k must be positive");
    return OffspringDistribution::fixed(o.k);
  }
  if (o.kind == "table") return OffspringDistribution(o.p);
  throw ValidationError("unknown offspring kind '" + o.kind + "'");
}

std::uint64_t task_seed(std::uint64_t seed, const std::string& task) {
  // FNV-1a over the task name, mixed into the declared seed
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : task) h = (h ^ ch) * 1099511628211ull;
  h ^= seed + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

}  // namespace brwlab
