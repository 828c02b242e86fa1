#include "chaosint/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "chaosint/chaos_ops.hpp"
#include "chaosint/distributions.hpp"
#include "chaosint/graded.hpp"
#include "chaosint/grid.hpp"
#include "chaosint/integral.hpp"
#include "chaosint/mc.hpp"
#include "chaosint/multipoly.hpp"
#include "chaosint/paths.hpp"
#include "chaosint/report.hpp"
#include "chaosint/sym_tensor.hpp"
#include "chaosint/version.hpp"

namespace chaosint {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// configuration access
// ---------------------------------------------------------------------------

class Cfg {
 public:
  explicit Cfg(const std::string& text) {
    try {
      j_ = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j_.is_object()) throw ConfigError("config: top level must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double num(const std::string& key, double def) const {
    if (!has(key)) return def;
    if (!j_.at(key).is_number()) throw ConfigError("config: '" + key + "' must be a number");
    return j_.at(key).get<double>();
  }

  int integer(const std::string& key, int def) const {
    if (!has(key)) return def;
    if (!j_.at(key).is_number_integer())
      throw ConfigError("config: '" + key + "' must be an integer");
    return j_.at(key).get<int>();
  }

  std::uint64_t seed() const {
    if (!has("seed")) return 7;
    if (!j_.at("seed").is_number_unsigned() && !j_.at("seed").is_number_integer())
      throw ConfigError("config: 'seed' must be an integer");
    return j_.at("seed").get<std::uint64_t>();
  }

  std::string str(const std::string& key, const std::string& def) const {
    if (!has(key)) return def;
    if (!j_.at(key).is_string()) throw ConfigError("config: '" + key + "' must be a string");
    return j_.at(key).get<std::string>();
  }

  std::vector<std::string> str_list(const std::string& key,
                                    std::vector<std::string> def) const {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array()) throw ConfigError("config: '" + key + "' must be a string or array");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError("config: '" + key + "' entries must be strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  // "lo:hi" inclusive range
  std::pair<int, int> range(const std::string& key, int def_lo, int def_hi) const {
    if (!has(key)) return {def_lo, def_hi};
    const auto& v = j_.at(key);
    if (v.is_array() && v.size() == 2) return {v.at(0).get<int>(), v.at(1).get<int>()};
    if (!v.is_string()) throw ConfigError("config: '" + key + "' must be \"lo:hi\"");
    const std::string s = v.get<std::string>();
    const auto pos = s.find(':');
    if (pos == std::string::npos) throw ConfigError("config: '" + key + "' must be \"lo:hi\"");
    try {
      const int lo = std::stoi(s.substr(0, pos));
      const int hi = std::stoi(s.substr(pos + 1));
      if (lo > hi) throw ConfigError("config: '" + key + "' range is empty");
      return {lo, hi};
    } catch (const ConfigError&) {
      throw;
    } catch (...) {
      throw ConfigError("config: '" + key + "' must be \"lo:hi\"");
    }
  }

  // number | array of per-cell values | CSV path
  StepFn step_fn(const std::string& key, const Grid& g, double def_const) const {
    if (!has(key)) return StepFn::constant(g, def_const);
    const auto& v = j_.at(key);
    if (v.is_number()) return StepFn::constant(g, v.get<double>());
    if (v.is_array()) {
      std::vector<double> vals;
      for (const auto& e : v) vals.push_back(e.get<double>());
      if (static_cast<int>(vals.size()) != g.cells())
        throw ConfigError("config: '" + key + "' needs one value per grid cell");
      return StepFn(g, std::move(vals));
    }
    if (v.is_string()) return StepFn::from_csv(g, v.get<std::string>());
    throw ConfigError("config: '" + key + "' must be a number, array, or CSV path");
  }

  // Canonical form for the config digest: sorted keys, with the two keys that
  // cannot influence any result byte (output location, worker count) removed,
  // so reruns across worker counts share a digest.
  std::string canonical() const {
    json c = j_;
    c.erase("out_dir");
    c.erase("threads");
    return c.dump();
  }

 private:
  json j_;
};

std::vector<Family> parse_families(const std::vector<std::string>& tags) {
  std::vector<Family> out;
  out.reserve(tags.size());
  for (const auto& t : tags) out.push_back(Family::parse(t));
  return out;
}

const std::vector<std::string> kAllFamilies = {"gaussian", "rademacher", "uniform", "cexp",
                                               "twopoint:0.2"};

std::string safe_tag(const std::string& tag) {
  if (tag.size() > 40) return "mixed_" + to_hex(fnv1a(tag));
  std::string s = tag;
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
  return s;
}

// Families for the per-model study commands: either a homogeneous run per tag
// in "models" (or the singular "model"), or one mixed model from the explicit
// per-index list in "model_per_index".
struct ModelRun {
  std::string tag;
  ModelPtr model;
};

std::vector<ModelRun> models_from_config(const Cfg& cfg, int n,
                                         std::vector<std::string> default_tags) {
  if (cfg.has("model_per_index")) {
    const auto tags = cfg.str_list("model_per_index", {});
    if (static_cast<int>(tags.size()) != n)
      throw ConfigError("config: 'model_per_index' needs one family tag per basis cell");
    const auto model = make_model(parse_families(tags));
    return {{model->tag(), model}};
  }
  std::vector<std::string> tags;
  if (cfg.has("models"))
    tags = cfg.str_list("models", {});
  else if (cfg.has("model"))
    tags = {cfg.str("model", "")};
  else
    tags = std::move(default_tags);
  std::vector<ModelRun> out;
  out.reserve(tags.size());
  for (const auto& t : tags) out.push_back({t, make_model(Family::parse(t), n)});
  return out;
}

// ---------------------------------------------------------------------------
// named checks and the summary file
// ---------------------------------------------------------------------------

struct CheckSet {
  struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
  };
  std::vector<Check> checks;

  bool below(const std::string& name, double value, double tol) {
    checks.push_back({name, value, tol, value <= tol});
    return checks.back().pass;
  }
  bool holds(const std::string& name, bool ok, double value = 0.0, double tol = 0.0) {
    checks.push_back({name, value, tol, ok});
    return ok;
  }
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

struct Outputs {
  std::string out_dir;
  std::string digest;
  std::uint64_t seed = 0;

  void summary(const std::string& command, const CheckSet& cs, ojson extra,
               const std::string& log = {}) const {
    ojson s;
    s["tool"] = "chaosint";
    s["version"] = kVersion;
    s["schema"] = kSummarySchema;
    s["command"] = command;
    s["config_digest"] = digest;
    s["seed"] = seed;
    s["pass"] = cs.all_pass();
    ojson checks = ojson::array();
    for (const auto& c : cs.checks) {
      ojson e;
      e["name"] = c.name;
      e["value"] = c.value;
      e["tolerance"] = c.tolerance;
      e["pass"] = c.pass;
      checks.push_back(e);
    }
    s["checks"] = checks;
    for (auto& [k, v] : extra.items()) s[k] = v;
    if (!log.empty()) s["note"] = log;
    write_text(out_dir + "/" + command + "_summary.json", s.dump(2) + "\n");
  }
};

// deterministic random test inputs
StepFn random_step(const Grid& g, std::uint64_t seed, std::uint64_t tag) {
  std::vector<double> v(static_cast<std::size_t>(g.cells()));
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = 2.0 * uniform01(seed, tag, i) - 1.0;
  return StepFn(g, std::move(v));
}

SymTensor random_sym2(int n, std::uint64_t seed, std::uint64_t tag) {
  SymTensor f(2);
  std::uint64_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      f.set({i, j}, 2.0 * uniform01(seed, tag, idx++) - 1.0);
  return f;
}

Kernel2 random_kernel(int n, std::uint64_t seed, std::uint64_t tag) {
  Kernel2 k(n);
  std::uint64_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) k.at(i, j) = 2.0 * uniform01(seed, tag, idx++) - 1.0;
  return k;
}

SymTensor random_sym_order(int order, int n, std::uint64_t seed, std::uint64_t tag) {
  SymTensor f(order);
  std::uint64_t idx = 0;
  std::vector<int> t(static_cast<std::size_t>(order), 0);
  // iterate sorted tuples
  while (true) {
    f.set(IndexTuple(t.begin(), t.end()), 2.0 * uniform01(seed, tag, idx++) - 1.0);
    int pos = order - 1;
    while (pos >= 0 && t[static_cast<std::size_t>(pos)] == n - 1) --pos;
    if (pos < 0) break;
    const int v = t[static_cast<std::size_t>(pos)] + 1;
    for (int q = pos; q < order; ++q) t[static_cast<std::size_t>(q)] = v;
  }
  return f;
}

// closed-form mean of the quadratic-variation limit for the baseline check
double qv_mean_closed_form(const StepFn& h1, const StepFn& h2, double t, const BasisSpec& basis) {
  const auto idx = basis.grid.index_of(t);
  if (!idx) throw ConfigError("qv: horizon t must be a basis grid point");
  const auto v1 = h1.values_at_level(basis.grid.level);
  const auto v2 = h2.values_at_level(basis.grid.level);
  const double len = basis.cell_len();
  double prefix = 0.0;  // |h1 1_{]0,s_j]}|^2 at the cell start
  double sum = 0.0;
  for (std::int64_t j = 0; j < *idx; ++j) {
    const double a = v1[static_cast<std::size_t>(j)];
    const double b = v2[static_cast<std::size_t>(j)];
    sum += b * b * (prefix * len + a * a * len * len / 2.0);
    prefix += a * a * len;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

std::vector<Family> families_from_config(const Cfg& cfg) {
  std::vector<std::string> def = kAllFamilies;
  if (!cfg.has("families") && cfg.has("model")) def = {cfg.str("model", "")};
  return parse_families(cfg.str_list("families", def));
}

int cmd_product_check(const Cfg& cfg, const Outputs& out, std::ostream& log) {
  const int level = cfg.integer("level", 3);
  const int pairs = cfg.integer("pairs", 100);
  const double T = cfg.num("T", 1.0);
  const auto families = families_from_config(cfg);
  const Grid grid(T, level);
  const BasisSpec basis(grid);

  CsvWriter csv({"family", "pair", "residual"});
  double worst = 0.0;
  std::uint64_t tag = 0;
  for (const auto& fam : families) {
    const auto model = make_model(fam, basis.size());
    for (int p = 0; p < pairs; ++p) {
      const StepFn h = random_step(grid, out.seed, tag++);
      const StepFn g = random_step(grid, out.seed, tag++);
      const auto parts = product_decompose(h, g, basis, model);
      MultiPoly resid = parts.diag_part.to_poly() + parts.cross_part.to_poly() +
                        MultiPoly::constant(parts.constant);
      resid -= first_order(h, basis, model).to_poly() * first_order(g, basis, model).to_poly();
      const double r = resid.max_abs_coeff();
      worst = std::max(worst, r);
      csv.add_row({fam.tag(), std::to_string(p), format_double(r)});
    }
  }
  CheckSet cs;
  cs.below("product_decomposition_max_residual", worst, 1e-10);
  write_text(out.out_dir + "/product-check.csv", csv.str());
  ojson extra;
  extra["families"] = static_cast<int>(families.size());
  extra["pairs_per_family"] = pairs;
  extra["basis_level"] = level;
  out.summary("product-check", cs, extra);
  log << "product-check: max residual " << format_double(worst) << "\n";
  return cs.all_pass() ? kExitPass : kExitCheckFailed;
}

int cmd_riemann(const Cfg& cfg, const Outputs& out, std::ostream& log) {
  const int level = cfg.integer("level", 4);
  const double T = cfg.num("T", 1.0);
  const auto [lo, hi] = cfg.range("levels", 2, 8);
  const Grid grid(T, level);
  const BasisSpec basis(grid);

  CsvWriter csv({"model", "partition_level", "mean_square_error", "relative"});
  CheckSet cs;
  for (const auto& [tag, model] : models_from_config(cfg, basis.size(), {"gaussian", "cexp"})) {
    IntegralSpec spec{cfg.step_fn("h", grid, 1.0), cfg.step_fn("g", grid, 1.0),
                      cfg.num("t", T), basis, model};
    const RawQuadratic z = double_integral_raw(spec);
    const double ez2 = z.second_moment(*model);
    double prev = 0.0;
    bool decreasing = true;
    double final_rel = 0.0;
    for (int l = lo; l <= hi; ++l) {
      const RawQuadratic s = riemann_sum_raw(spec, l);
      const double mse = mean_square_diff(s, z, *model);
      if (l > lo && mse >= prev) decreasing = false;
      prev = mse;
      final_rel = mse / ez2;
      csv.add_row({tag, std::to_string(l), format_double(mse), format_double(mse / ez2)});
    }
    cs.holds("riemann_strictly_decreasing_" + tag, decreasing);
    cs.below("riemann_final_relative_" + tag, final_rel, 1e-3);
    log << "riemann[" << tag << "]: final relative error " << format_double(final_rel) << "\n";
  }
  write_text(out.out_dir + "/riemann.csv", csv.str());
  ojson extra;
  extra["basis_level"] = level;
  extra["partition_levels"] = std::to_string(lo) + ":" + std::to_string(hi);
  out.summary("riemann", cs, extra);
  return cs.all_pass() ? kExitPass : kExitCheckFailed;
}

int cmd_ibp(const Cfg& cfg, const Outputs& out, std::ostream& log) {
  const int level = cfg.integer("level", 3);
  const int pairs = cfg.integer("pairs", 50);
  const double T = cfg.num("T", 1.0);
  const auto families = families_from_config(cfg);
  const Grid grid(T, level);
  const BasisSpec basis(grid);

  CsvWriter csv({"family", "pair", "max_entry", "constant"});
  double worst = 0.0;
  std::uint64_t tag = 0;
  for (const auto& fam : families) {
    const auto model = make_model(fam, basis.size());
    for (int p = 0; p < pairs; ++p) {
      const StepFn h = random_step(grid, out.seed, 1000 + tag++);
      const StepFn g = random_step(grid, out.seed, 1000 + tag++);
      const GradedChaos resid = ibp_residual(h, g, basis, model);
      const double r = std::max(resid.max_kernel_entry(), std::abs(resid.constant()));
      worst = std::max(worst, r);
      csv.add_row({fam.tag(), std::to_string(p), format_double(resid.max_kernel_entry()),
                   format_double(resid.constant())});
    }
  }
  CheckSet cs;
  cs.below("integration_by_parts_max_residual", worst, 1e-10);
  write_text(out.out_dir + "/ibp.csv", csv.str());
  ojson extra;
  extra["pairs_per_family"] = pairs;
  extra["basis_level"] = level;
  out.summary("ibp", cs, extra);
  log << "ibp: max residual " << format_double(worst) << "\n";
  return cs.all_pass() ? kExitPass : kExitCheckFailed;
}

int cmd_norm(const Cfg& cfg, const Outputs& out, std::ostream& log) {
  const double T = cfg.num("T", 1.0);
  const int nrandom = cfg.integer("configs", 20);
  CsvWriter csv({"kind", "family", "level", "direct", "formula", "diff"});
  CheckSet cs;

  // pinned baselines
  {
    const Grid grid(1.0, 3);
    const BasisSpec basis(grid);
    const auto model = make_model(Family::parse("gaussian"), basis.size());
    IntegralSpec spec{StepFn::constant(grid, 1.0), StepFn::constant(grid, 1.0), 1.0, basis, model};
    const SecondMoment sm = second_moment(spec);
    csv.add_row({"baseline", "gaussian", "3", format_double(sm.direct), format_double(sm.formula),
                 format_double(sm.direct - sm.formula)});
    cs.below("norm_baseline_gaussian_direct_vs_half", std::abs(sm.direct - 0.5), 1e-12);
    cs.below("norm_baseline_gaussian_formula_vs_half", std::abs(sm.formula - 0.5), 1e-12);
  }
  {
    const Grid grid(1.0, 1);
    const BasisSpec basis(grid);
    const auto model = make_model(Family::parse("rademacher"), basis.size());
    IntegralSpec spec{StepFn::constant(grid, 1.0), StepFn::constant(grid, 1.0), 1.0, basis, model};
    const SecondMoment sm = second_moment(spec);
    csv.add_row({"baseline", "rademacher", "1", format_double(sm.direct),
                 format_double(sm.formula), format_double(sm.direct - sm.formula)});
    cs.below("norm_baseline_rademacher_direct_vs_quarter", std::abs(sm.direct - 0.25), 1e-12);
    cs.below("norm_baseline_rademacher_formula_vs_quarter", std::abs(sm.formula - 0.25), 1e-12);
  }

  const auto families = parse_families(kAllFamilies);
  double worst = 0.0;
  for (int i = 0; i < nrandom; ++i) {
    const int level = 1 + (i % 4);
    const Family fam = families[static_cast<std::size_t>(i) % families.size()];
    const Grid grid(T, level);
    const BasisSpec basis(grid);
    const auto model = make_model(fam, basis.size());
    const std::int64_t tcell =
        1 + static_cast<std::int64_t>(uniform01(out.seed, 3000 + static_cast<std::uint64_t>(i), 0) *
                                      grid.cells());
    IntegralSpec spec{random_step(grid, out.seed, 2000 + 2 * static_cast<std::uint64_t>(i)),
                      random_step(grid, out.seed, 2000 + 2 * static_cast<std::uint64_t>(i) + 1),
                      grid.point(std::min<std::int64_t>(tcell, grid.cells())), basis, model};
    const SecondMoment sm = second_moment(spec);
    const double diff = std::abs(sm.direct - sm.formula);
    worst = std::max(worst, diff);
    csv.add_row({"random", fam.tag(), std::to_string(level), format_double(sm.direct),
                 format_double(sm.formula), format_double(diff)});
  }
  cs.below("norm_identity_max_diff", worst, 1e-10);
  write_text(out.out_dir + "/norm.csv", csv.str());
  ojson extra;
  extra["random_configs"] = nrandom;
  out.summary("norm", cs, extra);
  log << "norm: max |direct - formula| " << format_double(worst) << "\n";
  return cs.all_pass() ? kExitPass : kExitCheckFailed;
}

int cmd_square_decomp(const Cfg& cfg, const Outputs& out, std::ostream& log) {
  const int level = cfg.integer("level", 2);
  const int tensors = cfg.integer("tensors", 10);
  const double T = cfg.num("T", 1.0);
  const auto families = families_from_config(cfg);
  const int n = Grid(T, level).cells();

  // the order-0 rows publish the constant term under both norm readings next
  // to the oracle value and the exact second moment
  CsvWriter csv({"family", "tensor", "order", "residual_max", "oracle_norm2", "oracle_order0",
                 "rhs_order0_otimes", "rhs_order0_isometry", "exact_second_moment"});
  CheckSet cs;
  double worst_gauss = 0.0, worst_order4 = 0.0, worst_order0 = 0.0;
  std::size_t rows = 0;
  std::uint64_t tag = 0;
  for (const auto& fam : families) {
    const auto model = make_model(fam, n);
    for (int i = 0; i < tensors; ++i) {
      const SymTensor f = random_sym2(n, out.seed, 4000 + tag++);
      const auto rep = square_decomposition(f, model, n);
      for (int order = 0; order <= 4; ++order) {
        std::vector<std::string> row = {
            fam.tag(), std::to_string(i), std::to_string(order),
            format_double(rep.residual_max[static_cast<std::size_t>(order)]),
            format_double(rep.oracle_norm2[static_cast<std::size_t>(order)])};
        if (order == 0) {
          row.push_back(format_double(rep.oracle_order0));
          row.push_back(format_double(rep.rhs_order0_otimes));
          row.push_back(format_double(rep.rhs_order0_isometry));
          row.push_back(format_double(rep.exact_second_moment));
        } else {
          row.insert(row.end(), {"", "", "", ""});
        }
        csv.add_row(std::move(row));
        ++rows;
        if (fam.kind == Kind::Gaussian)
          worst_gauss =
              std::max(worst_gauss, rep.residual_max[static_cast<std::size_t>(order)]);
      }
      worst_order4 = std::max(worst_order4, rep.residual_max[4]);
      worst_order0 = std::max(worst_order0, std::abs(rep.oracle_order0 - rep.exact_second_moment));
    }
  }
  cs.below("square_gaussian_all_order_residual", worst_gauss, 1e-9);
  cs.below("square_order4_residual_all_families", worst_order4, 1e-9);
  cs.below("square_order0_vs_exact_second_moment", worst_order0, 1e-9);
  cs.holds("square_residual_table_complete",
           rows == families.size() * static_cast<std::size_t>(tensors) * 5,
           static_cast<double>(rows));
  write_text(out.out_dir + "/square-decomp.csv", csv.str());
  ojson extra;
  extra["tensors_per_family"] = tensors;
  extra["basis_cells"] = n;
  out.summary("square-decomp", cs, extra);
  log << "square-decomp: gaussian residual " << format_double(worst_gauss) << ", order-4 "
      << format_double(worst_order4) << "\n";
  return cs.all_pass() ? kExitPass : kExitCheckFailed;
}

int cmd_moment_bound(const Cfg& cfg, const Outputs& out, std::ostream& log) {
  const int level = cfg.integer("level", 11);
  const double T = cfg.num("T", 1.0);
  // gaps share a midpoint so the increment variance is exactly center*gap and
  // the log-log slope isolates the gap scaling
  const double center = cfg.num("center", 0.5);
  const auto [glo, ghi] = cfg.range("gaps", 2, 7);
  const Grid grid(T, level);
  const BasisSpec basis(grid);

  CsvWriter csv({"model", "s", "t", "gap", "e2", "e4", "gap_ratio", "bound_ratio"});
  CheckSet cs;
  ojson extra;
  for (const auto& [tag, model] : models_from_config(cfg, basis.size(), {"gaussian", "cexp"})) {
    const StepFn h1 = cfg.step_fn("h1", grid, 1.0);
    const StepFn h2 = cfg.step_fn("h2", grid, 1.0);
    std::vector<std::pair<double, double>> gaps;
    for (int i = glo; i <= ghi; ++i) {
      const double half = std::ldexp(1.0, -i - 1);
      gaps.emplace_back(center - half, center + half);
    }
    const auto rep = fourth_moment_scaling(h1, h2, gaps, basis, *model);
    for (const auto& g : rep.gaps)
      csv.add_row({tag, format_double(g.s), format_double(g.t), format_double(g.t - g.s),
                   format_double(g.e2), format_double(g.e4), format_double(g.gap_ratio),
                   format_double(g.bound_ratio)});
    cs.below("moment_ratio_spread_" + tag, rep.ratio_spread, 3.0);
    cs.holds("moment_loglog_slope_" + tag,
             rep.loglog_slope >= 1.9 && rep.loglog_slope <= 2.1, rep.loglog_slope);
    ojson m;
    m["loglog_slope"] = rep.loglog_slope;
    m["ratio_spread"] = rep.ratio_spread;
    m["candidate_constant"] = rep.candidate_constant;
    m["empirical_constant"] = rep.empirical_constant;
    extra[tag] = m;
    log << "moment-bound[" << tag << "]: slope " << format_double(rep.loglog_slope) << ", spread "
        << format_double(rep.ratio_spread) << "\n";
  }
  write_text(out.out_dir + "/moment-bound.csv", csv.str());
  out.summary("moment-bound", cs, extra);
  return cs.all_pass() ? kExitPass : kExitCheckFailed;
}

int cmd_qv(const Cfg& cfg, const Outputs& out, std::ostream& log) {
  const int level = cfg.integer("level", 8);
  const double T = cfg.num("T", 1.0);
  const double t = cfg.num("t", T);
  const auto [llo, lhi] = cfg.range("levels", 4, 8);
  const int replicates = cfg.integer("replicates", 10000);
  const int threads = cfg.integer("threads", 0);
  const Grid grid(T, level);
  const BasisSpec basis(grid);

  std::vector<int> levels;
  for (int l = llo; l <= lhi; ++l) levels.push_back(l);

  CheckSet cs;
  ojson extra;
  for (const auto& [tag, model] : models_from_config(cfg, basis.size(), {"gaussian", "cexp"})) {
    const StepFn h1 = cfg.step_fn("h1", grid, 1.0);
    const StepFn h2 = cfg.step_fn("h2", grid, 1.0);
    const QVReport rep =
        qv_convergence(h1, h2, t, basis, model, levels, replicates, out.seed, threads);

    CsvWriter csv({"level", "mesh", "residual_mean", "residual_ci", "residual_nocorr_mean",
                   "replicates", "seed"});
    for (const auto& row : rep.rows)
      csv.add_row({std::to_string(row.level), format_double(row.mesh),
                   format_double(row.residual_mean), format_double(row.residual_ci),
                   format_double(row.residual_nocorr_mean), std::to_string(rep.replicates),
                   std::to_string(rep.seed)});
    write_text(out.out_dir + "/qv_" + safe_tag(tag) + ".csv", csv.str());

    bool monotone = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
      if (rep.rows[i].residual_mean >= rep.rows[i - 1].residual_mean) monotone = false;
    bool skewed = false;
    for (int j = 0; j < basis.size(); ++j)
      if (model->m(j, 3) != 0.0) skewed = true;

    ojson rows = ojson::array();
    bool undersampled = false;
    for (const auto& row : rep.rows) {
      ojson r;
      r["level"] = row.level;
      r["residual_mean"] = row.residual_mean;
      r["residual_ci"] = row.residual_ci;
      r["residual_nocorr_mean"] = row.residual_nocorr_mean;
      r["qv_mean"] = row.qv_mean;
      r["qv_se"] = row.qv_se;
      r["undersampled"] = row.undersampled;
      undersampled = undersampled || row.undersampled;
      rows.push_back(r);
    }
    ojson m;
    m["rows"] = rows;
    m["undersampled"] = undersampled;

    if (!skewed) {
      cs.holds("qv_residual_monotone_" + tag, monotone);
    }
    if (tag == "gaussian") {
      const double target = qv_mean_closed_form(h1, h2, t, basis);
      const auto& last = rep.rows.back();
      m["qv_mean_target"] = target;
      cs.holds("qv_mean_within_3se_" + tag,
               std::abs(last.qv_mean - target) <= 3.0 * last.qv_se,
               std::abs(last.qv_mean - target), 3.0 * last.qv_se);
    }
    if (skewed) {
      bool corr_better = true;
      for (const auto& row : rep.rows)
        if (!(row.residual_mean < row.residual_nocorr_mean)) corr_better = false;
      cs.holds("qv_correction_strictly_better_" + tag, corr_better);
    }
    extra[tag] = m;
    log << "qv[" << tag << "]: level " << rep.rows.back().level << " residual "
        << format_double(rep.rows.back().residual_mean) << "\n";
  }
  out.summary("qv", cs, extra);
  return cs.all_pass() ? kExitPass : kExitCheckFailed;
}

int cmd_selftest(const Cfg& cfg, const Outputs& out, std::ostream& log);

}  // namespace

std::string merge_config(const std::string& config_path, const std::string& overrides_json) {
  json base = json::object();
  if (!config_path.empty()) {
    try {
      base = json::parse(read_text(config_path));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: invalid JSON file: ") + e.what());
    }
    if (!base.is_object()) throw ConfigError("config: file top level must be an object");
  }
  if (!overrides_json.empty()) {
    const json over = json::parse(overrides_json);
    for (auto& [k, v] : over.items()) base[k] = v;
  }
  return base.dump();
}

int run_command(const std::string& command, const std::string& config_json, std::ostream& log,
                std::ostream& err) {
  try {
    const Cfg cfg(config_json);
    Outputs out;
    out.out_dir = cfg.str("out_dir", "reports");
    out.digest = to_hex(fnv1a(command + "\n" + cfg.canonical()));
    out.seed = cfg.seed();
    std::filesystem::create_directories(out.out_dir);

    if (command == "product-check") return cmd_product_check(cfg, out, log);
    if (command == "riemann") return cmd_riemann(cfg, out, log);
    if (command == "ibp") return cmd_ibp(cfg, out, log);
    if (command == "norm") return cmd_norm(cfg, out, log);
    if (command == "square-decomp") return cmd_square_decomp(cfg, out, log);
    if (command == "moment-bound") return cmd_moment_bound(cfg, out, log);
    if (command == "qv") return cmd_qv(cfg, out, log);
    if (command == "selftest") return cmd_selftest(cfg, out, log);
    err << "unknown command: " << command << "\n";
    return kExitConfigError;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}

namespace {

int cmd_selftest(const Cfg& cfg, const Outputs& out, std::ostream& log) {
  const int threads = cfg.integer("threads", 0);
  const int mc_reps = cfg.integer("replicates", 20000);
  CheckSet cs;
  const auto families = parse_families(kAllFamilies);

  // 1. basis orthonormality and causal complement
  {
    const Grid grid(1.0, 3);
    const BasisSpec basis(grid);
    double worst = 0.0;
    for (int j = 0; j < basis.size(); ++j)
      for (int k = 0; k < basis.size(); ++k)
        worst = std::max(worst, std::abs(basis.inner_ee(j, k) - (j == k ? 1.0 : 0.0)));
    cs.below("basis_orthonormality", worst, 0.0);

    const StepFn h = random_step(grid, out.seed, 7001);
    const StepFn g = random_step(grid, out.seed, 7002);
    const Kernel2 sum = causal_kernel(h, g, basis) + causal_kernel(g, h, basis).transposed();
    const auto hc = project(h, basis);
    const auto gc = project(g, basis);
    double cmax = 0.0;
    for (int j = 0; j < basis.size(); ++j)
      for (int k = 0; k < basis.size(); ++k)
        cmax = std::max(cmax, std::abs(sum.at(j, k) - hc[static_cast<std::size_t>(j)] *
                                                          gc[static_cast<std::size_t>(k)]));
    cs.below("causal_complement", cmax, 1e-14);
  }

  // 2. orthogonal polynomials: orthogonality and connection round trip
  {
    double worst_orth = 0.0, worst_conn = 0.0;
    for (const auto& fam : families) {
      const auto mt = moments(fam);
      const auto op = orthopoly(mt, fam);
      for (int a = 0; a <= 4; ++a)
        for (int b = 0; b < a; ++b)
          worst_orth = std::max(
              worst_orth,
              std::abs(poly_expect(poly_mul(op.P[static_cast<std::size_t>(a)],
                                            op.P[static_cast<std::size_t>(b)]),
                                   mt)));
      for (int nn = 0; nn <= 4; ++nn) {
        std::vector<double> acc(static_cast<std::size_t>(nn) + 1, 0.0);
        for (int mm = 0; mm <= nn; ++mm)
          for (std::size_t i = 0; i < op.P[static_cast<std::size_t>(mm)].size(); ++i)
            acc[i] += op.gamma[nn][mm] * op.P[static_cast<std::size_t>(mm)][i];
        acc[static_cast<std::size_t>(nn)] -= 1.0;
        for (double c : acc) worst_conn = std::max(worst_conn, std::abs(c));
      }
    }
    cs.below("orthopoly_orthogonality", worst_orth, 1e-12);
    cs.below("connection_round_trip", worst_conn, 1e-12);
  }

  // 3. rewrite calibration: order-2-plus-lowering equals the raw diagonal sum
  {
    double worst = 0.0;
    for (const auto& fam : families) {
      const auto model = make_model(fam, 4);
      Kernel2 diag(4);
      for (int j = 0; j < 4; ++j)
        diag.at(j, j) = 2.0 * uniform01(out.seed, 7010, static_cast<std::uint64_t>(j)) - 1.0;
      SymTensor f(2);
      for (int j = 0; j < 4; ++j) f.set({j, j}, diag.at(j, j));
      GradedChaos lhs = multiple_integral(f, model);
      const SymTensor low = lowering(f, 1, *model);
      if (!low.empty()) lhs += multiple_integral(low, model);
      const MultiPoly resid = lhs.to_poly() - diagonal_quadratic(diag, model).to_poly();
      worst = std::max(worst, resid.max_abs_coeff());
    }
    cs.below("rewrite_calibration_diagonal", worst, 1e-10);
  }

  // 4. isometry of the multiple integral, every order and family
  {
    double worst = 0.0;
    std::uint64_t tag = 7100;
    for (const auto& fam : families) {
      const auto model = make_model(fam, 3);
      for (int order = 1; order <= 4; ++order) {
        for (int rep = 0; rep < 3; ++rep) {
          const SymTensor f = random_sym_order(order, 3, out.seed, tag++);
          const MultiPoly p = multiple_integral(f, model).to_poly();
          const double direct = expect(p * p, *model);
          worst = std::max(worst, std::abs(direct - isometry_norm2(f, *model)));
        }
      }
    }
    cs.below("multiple_integral_isometry", worst, 1e-9);
  }

  // 5. product decomposition and integration by parts residuals
  {
    const Grid grid(1.0, 3);
    const BasisSpec basis(grid);
    double worst_prod = 0.0, worst_ibp = 0.0;
    std::uint64_t tag = 7200;
    for (const auto& fam : families) {
      const auto model = make_model(fam, basis.size());
      for (int rep = 0; rep < 5; ++rep) {
        const StepFn h = random_step(grid, out.seed, tag++);
        const StepFn g = random_step(grid, out.seed, tag++);
        const auto parts = product_decompose(h, g, basis, model);
        MultiPoly resid = parts.diag_part.to_poly() + parts.cross_part.to_poly() +
                          MultiPoly::constant(parts.constant) -
                          first_order(h, basis, model).to_poly() *
                              first_order(g, basis, model).to_poly();
        worst_prod = std::max(worst_prod, resid.max_abs_coeff());
        const GradedChaos ib = ibp_residual(h, g, basis, model);
        worst_ibp = std::max(worst_ibp, std::max(ib.max_kernel_entry(), std::abs(ib.constant())));
      }
    }
    cs.below("product_decomposition_residual", worst_prod, 1e-10);
    cs.below("integration_by_parts_residual", worst_ibp, 1e-10);
  }

  // 6. norm identity
  {
    double worst = 0.0;
    std::uint64_t tag = 7300;
    for (const auto& fam : families) {
      const Grid grid(1.0, 2 + static_cast<int>(tag % 2));
      const BasisSpec basis(grid);
      const auto model = make_model(fam, basis.size());
      IntegralSpec spec{random_step(grid, out.seed, tag++), random_step(grid, out.seed, tag++),
                        1.0, basis, model};
      const SecondMoment sm = second_moment(spec);
      worst = std::max(worst, std::abs(sm.direct - sm.formula));
    }
    cs.below("norm_identity", worst, 1e-10);
  }

  // 7. martingale property of truncation tails
  {
    double worst = 0.0;
    std::uint64_t tag = 7400;
    const std::set<int> keep = {0, 1, 2};
    for (const auto& fam : families) {
      const auto model = make_model(fam, 6);
      std::vector<GradedChaos> elems;
      Kernel2 k = random_kernel(6, out.seed, tag++);
      elems.push_back(diagonal_quadratic(k, model));
      elems.push_back(cross_quadratic(k, model));
      for (int order = 1; order <= 4; ++order)
        elems.push_back(multiple_integral(random_sym_order(order, 6, out.seed, tag++), model));
      for (const auto& z : elems) {
        const GradedChaos tail = z - z.truncated(3);
        const MultiPoly cond = conditional_expect(tail.to_poly(), keep, *model);
        worst = std::max(worst, cond.max_abs_coeff());
      }
    }
    cs.below("martingale_tail_conditional", worst, 1e-12);
  }

  // 8. reproducible Monte Carlo: value recorded, tolerance from the CLT
  {
    const auto model = make_model(Family::parse("cexp"), 1);
    const auto est = estimate([](const Realization& w) { return w.x[0] * w.x[0]; }, *model, 1,
                              mc_reps, out.seed, threads);
    cs.holds("mc_second_moment", std::abs(est.mean - 1.0) <= 4.0 * est.se, est.mean,
             4.0 * est.se);
  }

  // 9. quadratic-variation smoke run
  {
    const Grid grid(1.0, 5);
    const BasisSpec basis(grid);
    const auto model = make_model(Family::parse("gaussian"), basis.size());
    const StepFn one = StepFn::constant(grid, 1.0);
    const QVReport rep =
        qv_convergence(one, one, 1.0, basis, model, {2, 3}, std::max(2000, mc_reps / 10),
                       out.seed, threads);
    cs.holds("qv_smoke_residual_decreases",
             rep.rows[1].residual_mean < rep.rows[0].residual_mean, rep.rows[1].residual_mean,
             rep.rows[0].residual_mean);
  }

  CsvWriter csv({"check", "value", "tolerance", "pass"});
  for (const auto& c : cs.checks)
    csv.add_row({c.name, format_double(c.value), format_double(c.tolerance),
                 c.pass ? "1" : "0"});
  write_text(out.out_dir + "/selftest.csv", csv.str());
  ojson extra;
  extra["families"] = static_cast<int>(families.size());
  out.summary("selftest", cs, extra);
  log << "selftest: " << cs.checks.size() << " checks, "
      << (cs.all_pass() ? "all passed" : "FAILURES") << "\n";
  return cs.all_pass() ? kExitPass : kExitCheckFailed;
}

}  // namespace

}  // namespace chaosint
