#include "gmix/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gmix/analysis.hpp"
#include "gmix/coupling.hpp"
#include "gmix/divergence.hpp"
#include "gmix/error.hpp"
#include "gmix/oracle.hpp"
#include "gmix/parallel.hpp"
#include "gmix/renewal.hpp"

namespace gmix {

namespace {

using json = nlohmann::ordered_json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Cell = std::variant<std::string, double, std::uint64_t, bool>;

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(Visitor{}, cell);
}

/// A delimited text table written in one go. Opened in binary mode so line
/// endings are LF on every platform.
class Table {
 public:
  Table(std::vector<std::string> columns, char sep) : columns_(std::move(columns)), sep_(sep) {}

  void add(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw Error("experiments", "table row width mismatch");
    rows_.push_back(std::move(row));
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("experiments", "cannot open " + path.string() + " for writing");
    write_line(out, columns_);
    for (const auto& row : rows_) {
      std::vector<std::string> cells;
      cells.reserve(row.size());
      for (const auto& c : row) cells.push_back(format_cell(c));
      write_line(out, cells);
    }
    if (!out) throw Error("experiments", "write failed for " + path.string());
  }

 private:
  void write_line(std::ofstream& out, const std::vector<std::string>& cells) const {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << sep_;
      out << cells[i];
    }
    out << '\n';
  }

  std::vector<std::string> columns_;
  char sep_;
  std::vector<std::vector<Cell>> rows_;
};

/// results.csv with the provenance columns appended to every row.
class Results {
 public:
  Results(std::vector<std::string> columns, const ExperimentConfig& cfg, std::uint64_t replicates, std::string mode)
      : table_(with_provenance(std::move(columns)), ','), seed_(cfg.seed), replicates_(replicates),
        mode_(std::move(mode)) {}

  void add(std::vector<Cell> row) {
    row.emplace_back(seed_);
    row.emplace_back(replicates_);
    row.emplace_back(mode_);
    table_.add(std::move(row));
  }
  void write(const std::filesystem::path& dir) const { table_.write(dir / "results.csv"); }

 private:
  static std::vector<std::string> with_provenance(std::vector<std::string> columns) {
    columns.insert(columns.end(), {"seed", "replicates", "mode"});
    return columns;
  }
  Table table_;
  std::uint64_t seed_;
  std::uint64_t replicates_;
  std::string mode_;
};

Table plot_table() { return Table({"x", "y", "envelope"}, '\t'); }

json real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Collects output pieces for one run.
struct RunContext {
  const ExperimentConfig& cfg;
  std::filesystem::path dir;
  ExecPolicy policy;
  RngStream rng;
  json summary;
  std::map<std::string, bool> flags;

  explicit RunContext(const ExperimentConfig& c)
      : cfg(c), dir(c.output_dir), policy(ExecPolicy::parallel(c.threads)), rng(c.seed, 0) {
    std::filesystem::create_directories(dir / "plotdata");
    summary["experiment"] = std::string(to_string(c.kind));
    summary["seed"] = c.seed;
  }

  void flag(const std::string& name, bool value) { flags[name] = value; }
  void plot(const std::string& name, const Table& table) const { table.write(dir / "plotdata" / (name + ".tsv")); }
};

const PotentialModel& require_model(const ExperimentConfig& cfg) {
  if (!cfg.model) throw ConfigError("config", "this experiment needs a concrete [model]");
  return *cfg.model;
}

const PotentialModel& require_finite_model(const ExperimentConfig& cfg) {
  const PotentialModel& model = require_model(cfg);
  if (!model.alphabet().is_finite())
    throw ConfigError("config", "this experiment needs a finite-alphabet model");
  return model;
}

bool has_exact_oracle(const PotentialModel& model) {
  return model.kind() == ModelKind::iid || model.kind() == ModelKind::markov;
}

/// Default observable: +-1 for binary alphabets, the symbol value otherwise.
std::vector<double> default_signs(std::size_t alphabet) {
  if (alphabet == 2) return {-1.0, 1.0};
  std::vector<double> v(alphabet);
  for (std::size_t a = 0; a < alphabet; ++a) v[a] = static_cast<double>(a);
  return v;
}

std::vector<double> observable_values(const std::vector<double>& given, std::vector<double> fallback,
                                      std::size_t alphabet, const char* key) {
  if (given.empty()) return fallback;
  if (given.size() != alphabet)
    throw ConfigError("config", std::string(key) + " needs one value per symbol");
  return given;
}

/// |estimate - exact| within 3 standard errors of the exact law.
bool within_oracle(double estimate, double exact, std::uint64_t replicates) {
  const double p = std::clamp(exact, 0.0, 1.0);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(replicates));
  return std::abs(estimate - exact) <= 3.0 * se + 1e-12;
}

// ---------------------------------------------------------------------------

void run_mixing(RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const PotentialModel& model = require_model(cfg);
  const BlockSchedule schedule(cfg.beta);
  const std::uint64_t horizon = schedule.boundary(cfg.blocks + 1) - 1;

  std::vector<std::uint64_t> coords = cfg.coords;
  if (coords.empty())
    for (std::uint64_t k = 1; k <= std::min<std::uint64_t>(horizon, 10000); ++k) coords.push_back(k);
  for (auto k : coords)
    if (k < 1 || k > horizon)
      throw ConfigError("config", "coupling.coords entry " + std::to_string(k) + " lies outside [1, " +
                                      std::to_string(horizon) + "]");

  const CouplingCounts counts =
      simulate_coupling(model, cfg.y, cfg.z, cfg.blocks, cfg.replicates, schedule, cfg.mode, ctx.rng, ctx.policy);

  // The exact block-coupling law is available for finite-memory models; the
  // coordinate-sequential coupling coincides with it only when blocks are
  // single coordinates.
  const bool block_maximal = std::holds_alternative<BlockMaximal>(cfg.mode) || cfg.beta == 1.0;
  std::optional<BlockCouplingExact> exact;
  json notes = json::array();
  if (has_exact_oracle(model) && block_maximal) {
    try {
      exact = exact_block_coupling(model, cfg.y, cfg.z, schedule, cfg.blocks);
    } catch (const CapacityError& e) {
      notes.push_back(std::string("oracle skipped: ") + e.what());
    }
  }

  std::optional<BoundPipeline> pipeline;
  const RegularityProfile& profile = model.regularity();
  if (profile.is_zero() || cfg.beta * profile.chi2_delta > 1.0) {
    try {
      pipeline.emplace(profile, cfg.beta, cfg.blocks, BSeqOptions{cfg.scan_width});
    } catch (const PipelineError& e) {
      notes.push_back(std::string("bounds unavailable: ") + e.what());
    }
  } else {
    notes.push_back("bounds unavailable: beta * delta <= 1 for the model profile");
  }

  Results results({"quantity", "index", "estimate", "se", "oracle", "tv_lower", "bound", "oracle_ok", "bound_ok"},
                  cfg, cfg.replicates, std::string(mode_name(cfg.mode)));
  bool oracle_all = true, bound_all = true;
  std::uint64_t oracle_misses = 0, bound_misses = 0;
  auto record = [&](const std::string& quantity, std::uint64_t index, const Estimate& est, double oracle,
                    double tv_lower, double bound) {
    bool oracle_ok = true, bound_ok = true;
    if (!std::isnan(oracle)) oracle_ok = within_oracle(est.value, oracle, cfg.replicates);
    if (!std::isnan(bound) && block_maximal) bound_ok = est.value <= bound + 3.0 * est.se;
    if (!oracle_ok) ++oracle_misses;
    if (!bound_ok) ++bound_misses;
    oracle_all = oracle_all && oracle_ok;
    bound_all = bound_all && bound_ok;
    results.add({quantity, index, est.value, est.se, oracle, tv_lower, bound, oracle_ok, bound_ok});
  };

  Table px_plot = plot_table(), l_plot = plot_table(), theta_plot = plot_table();
  for (std::uint64_t n = 1; n <= cfg.blocks; ++n) {
    const Estimate est = counts.px(n);
    const double oracle = exact ? exact->px[n - 1] : kNaN;
    const double bound = pipeline ? pipeline->u()[n] : kNaN;
    record("px", n, est, oracle, kNaN, bound);
    px_plot.add({static_cast<double>(n), est.value, bound});
  }
  for (auto k : coords) {
    const Estimate est = counts.mismatch(k);
    const double oracle = exact ? exact->mismatch[k - 1] : kNaN;
    double tv_lower = kNaN;
    if (has_exact_oracle(model)) {
      try {
        tv_lower = exact_tv_coordinate(model, cfg.y, cfg.z, k);
      } catch (const CapacityError&) {
      }
    }
    const double bound = pipeline ? pipeline->corollary1(k) : kNaN;
    record("L", k, est, oracle, tv_lower, bound);
    l_plot.add({static_cast<double>(k), est.value, bound});
  }
  for (auto k : coords) {
    const Estimate est = counts.theta_tail(k);
    const double oracle = exact ? exact->theta_tail[k - 1] : kNaN;
    const double bound = pipeline ? pipeline->corollary2(k) : kNaN;
    record("theta_tail", k, est, oracle, kNaN, bound);
    theta_plot.add({static_cast<double>(k), est.value, bound});
  }
  results.write(ctx.dir);
  ctx.plot("px", px_plot);
  ctx.plot("L", l_plot);
  ctx.plot("theta_tail", theta_plot);

  if (exact) ctx.flag("oracle_agreement", oracle_all);
  if (pipeline && block_maximal) ctx.flag("bound_dominance", bound_all);
  ctx.summary["mode"] = std::string(mode_name(cfg.mode));
  ctx.summary["beta"] = cfg.beta;
  ctx.summary["blocks"] = cfg.blocks;
  ctx.summary["horizon"] = horizon;
  ctx.summary["replicates"] = cfg.replicates;
  ctx.summary["oracle_available"] = exact.has_value();
  ctx.summary["oracle_misses"] = oracle_misses;
  ctx.summary["bound_misses"] = bound_misses;
  ctx.summary["notes"] = notes;
}

// ---------------------------------------------------------------------------

void run_correlations(RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const PotentialModel& model = require_finite_model(cfg);
  const std::size_t alphabet = model.alphabet().size();
  std::vector<double> indicator(alphabet, 0.0);
  indicator[alphabet - 1] = 1.0;
  const std::vector<double> f_values = observable_values(cfg.f, indicator, alphabet, "analysis.f");
  const std::vector<double> fhat_values = observable_values(cfg.fhat, f_values, alphabet, "analysis.fhat");
  std::vector<std::size_t> lags = cfg.lags;
  if (lags.empty())
    for (std::size_t l = 1; l <= 20; ++l) lags.push_back(l);

  const SimulationPlan plan{cfg.burn_in, cfg.path_len, cfg.replicates};
  const auto estimates = correlation_decay(model, Observable::symbol_values(f_values),
                                           Observable::symbol_values(fhat_values), lags, plan, ctx.rng, ctx.policy);

  const bool oracle = has_exact_oracle(model);
  std::vector<double> exact(lags.size(), kNaN);
  if (oracle)
    for (std::size_t i = 0; i < lags.size(); ++i) exact[i] = exact_covariance(model, f_values, fhat_values, lags[i]);

  // Rate: delta > 1 gives n^{-(1+delta)/2}; otherwise n^{-delta'}.
  const double delta = model.regularity().chi2_delta;
  const double expected = delta > 1.0 ? -(1.0 + delta) / 2.0 : -cfg.delta_prime;
  std::vector<double> xs, ys;
  for (const auto& e : estimates)
    if (e.rho_hat > 0.0 && e.rho_hat >= cfg.min_resolvable_z * e.se) {
      xs.push_back(static_cast<double>(e.lag));
      ys.push_back(e.rho_hat);
    }
  std::optional<SlopeFit> fit;
  if (xs.size() >= 2) fit = fit_loglog(xs, ys);
  // Envelope constant for display: geometric mean of rho / lag^expected.
  double envelope_c = kNaN;
  if (!xs.empty()) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += std::log(ys[i]) - expected * std::log(xs[i]);
    envelope_c = std::exp(s / static_cast<double>(xs.size()));
  }

  Results results({"lag", "estimate", "se", "oracle", "envelope", "within"}, ctx.cfg, cfg.replicates, "stationary");
  Table plot = plot_table();
  bool all_within = true;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto& e = estimates[i];
    const double env = envelope_c * std::pow(static_cast<double>(e.lag), expected);
    const bool within = !oracle || std::abs(e.rho_hat - exact[i]) <= 3.0 * e.se;
    all_within = all_within && within;
    results.add({static_cast<std::uint64_t>(e.lag), e.rho_hat, e.se, exact[i], env, within});
    plot.add({static_cast<double>(e.lag), e.rho_hat, env});
  }
  results.write(ctx.dir);
  ctx.plot("correlations", plot);

  if (oracle) {
    ctx.flag("oracle_agreement", all_within);
  } else {
    ctx.flag("rate", fit && xs.size() >= 3 && fit->slope <= expected + cfg.rate_tol);
  }
  ctx.summary["expected_slope"] = expected;
  ctx.summary["slope"] = fit ? real(fit->slope) : json(nullptr);
  ctx.summary["slope_r2"] = fit ? real(fit->r2) : json(nullptr);
  ctx.summary["resolvable_lags"] = xs.size();
  ctx.summary["envelope_constant"] = real(envelope_c);
  try {
    ctx.summary["fhat_seminorm"] = real(seminorm_phi(Observable::symbol_values(fhat_values), model));
  } catch (const DomainError&) {
    ctx.summary["fhat_seminorm"] = nullptr;
  }
}

// ---------------------------------------------------------------------------

void run_fclt(RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const PotentialModel& model = require_finite_model(cfg);
  const std::size_t alphabet = model.alphabet().size();
  const auto h = Observable::symbol_values(observable_values(cfg.h, default_signs(alphabet), alphabet, "analysis.h"));
  const FcltResult res = fclt_paths(model, h, cfg.n, cfg.replicates, cfg.burn_in, ctx.rng, cfg.known_mean, ctx.policy);

  std::vector<double> at_one;
  at_one.reserve(res.paths.size());
  for (const auto& p : res.paths) at_one.push_back(p.back());
  const double ks = ks_statistic(at_one);

  Results results({"t", "variance_ratio", "within_10pct"}, cfg, cfg.replicates, "stationary");
  Table plot = plot_table();
  bool ratios_ok = true;
  for (std::size_t i = 0; i < res.grid.size(); ++i) {
    const bool ok = std::abs(res.variance_ratio[i] - 1.0) <= 0.10;
    ratios_ok = ratios_ok && ok;
    results.add({res.grid[i], res.variance_ratio[i], ok});
    plot.add({res.grid[i], res.variance_ratio[i], 1.0});
  }
  results.write(ctx.dir);
  ctx.plot("fclt_variance", plot);

  Table paths({"t", "replicate", "zeta"}, '\t');
  for (std::size_t r = 0; r < std::min<std::size_t>(res.paths.size(), 20); ++r)
    for (std::size_t i = 0; i < res.grid.size(); ++i)
      paths.add({res.grid[i], static_cast<std::uint64_t>(r), res.paths[r][i]});
  ctx.plot("fclt_paths", paths);

  ctx.flag("ks", ks <= cfg.ks_tol);
  ctx.flag("variance_ratio", ratios_ok);
  // With pooled centering the mean at t = 1 is zero by construction.
  if (cfg.known_mean) ctx.flag("centered", std::abs(res.mean_at_one) <= 3.0 * res.mean_at_one_se);
  ctx.summary["n"] = cfg.n;
  ctx.summary["ks"] = ks;
  ctx.summary["centering"] = res.centering;
  ctx.summary["sigma"] = res.sigma;
  ctx.summary["mean_at_one"] = res.mean_at_one;
  ctx.summary["mean_at_one_se"] = res.mean_at_one_se;
}

// ---------------------------------------------------------------------------

bool is_fair_sign_model(const PotentialModel& model, const std::vector<double>& h) {
  const auto* p = model.params<IIDParams>();
  return p && p->p.size() == 2 && p->p[0] == 0.5 && p->p[1] == 0.5 && h == std::vector<double>{-1.0, 1.0};
}

void run_chernoff(RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const PotentialModel& model = require_finite_model(cfg);
  const std::size_t alphabet = model.alphabet().size();
  const std::vector<double> h_values = observable_values(cfg.h, default_signs(alphabet), alphabet, "analysis.h");
  std::vector<std::size_t> n_list = cfg.n_list;
  if (n_list.empty()) n_list = {1000, 4000};
  std::sort(n_list.begin(), n_list.end());

  const ChernoffResult res = chernoff_deviation(model, Observable::symbol_values(h_values), n_list, cfg.t,
                                                cfg.replicates, cfg.burn_in, ctx.rng, cfg.known_mean, ctx.policy);
  const bool oracle = is_fair_sign_model(model, h_values) && res.center == 0.0;

  Results results({"n", "estimate", "se", "oracle", "within"}, cfg, cfg.replicates, "stationary");
  Table plot = plot_table();
  bool oracle_ok = true;
  for (const auto& e : res.estimates) {
    const double exact = oracle ? binomial_sign_tail(e.n, cfg.t) : kNaN;
    const bool within = !oracle || within_oracle(e.prob, exact, cfg.replicates);
    oracle_ok = oracle_ok && within;
    results.add({static_cast<std::uint64_t>(e.n), e.prob, e.se, exact, within});
    plot.add({static_cast<double>(e.n), e.prob, exact});
  }
  results.write(ctx.dir);
  ctx.plot("chernoff", plot);

  // Deviation probabilities must not grow with n beyond the noise of the
  // difference of two independent estimates.
  bool monotone = true;
  for (std::size_t i = 1; i < res.estimates.size(); ++i) {
    const auto& a = res.estimates[i - 1];
    const auto& b = res.estimates[i];
    monotone = monotone && b.prob <= a.prob + 3.0 * std::hypot(a.se, b.se);
  }
  ctx.flag("non_increasing", monotone);
  if (oracle) ctx.flag("oracle_agreement", oracle_ok);
  ctx.summary["t"] = cfg.t;
  ctx.summary["center"] = res.center;
  ctx.summary["oracle_available"] = oracle;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> log_points(std::size_t lo, std::size_t hi, std::size_t count) {
  std::vector<std::size_t> out;
  if (count == 0) return out;
  if (count == 1 || hi == lo) return {lo};
  const double a = std::log(static_cast<double>(lo)), b = std::log(static_cast<double>(hi));
  for (std::size_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(
        std::llround(std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1))));
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

void run_poisson(RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const PotentialModel& model = require_model(cfg);
  const auto* params = model.params<PoissonARParams>();
  if (!params) throw ConfigError("config", "the poisson experiment needs model.type = poisson-ar");
  if (cfg.k_lo < 1 || cfg.k_hi <= cfg.k_lo) throw ConfigError("config", "poisson.k_lo must be >= 1 and < k_hi");

  std::vector<double> upper(cfg.k_hi + 1, 0.0);
  for (std::size_t k = 0; k <= cfg.k_hi; ++k) upper[k] = chi2_upper(model, k);
  const SlopeFit fit = fit_decay_slope(upper, cfg.k_lo, cfg.k_hi);

  const std::vector<std::size_t> points = log_points(cfg.k_lo, cfg.k_hi, cfg.empirical_points);
  std::vector<double> empirical(points.size());
  const RngStream emp_rng = ctx.rng.derive(1);
  for_each_replicate(ctx.policy, points.size(), [&](std::size_t i) {
    RngStream r = emp_rng.derive(i);
    empirical[i] = chi2_empirical(model, points[i], cfg.n_contexts, r);
  });

  // Normalization on random pasts plus the two extreme constant pasts.
  std::uint32_t gamma_max = 0;
  for (auto g : params->gamma) gamma_max = std::max(gamma_max, g);
  std::vector<History> pasts{History({}, 0), History({}, gamma_max + 1)};
  RngStream norm_rng = ctx.rng.derive(2);
  for (std::size_t i = 0; i < cfg.normalization_histories; ++i) {
    const std::size_t len = norm_rng.below(model.memory_order() + 1);
    std::vector<Symbol> prefix(len);
    for (auto& s : prefix) s = static_cast<Symbol>(norm_rng.below(gamma_max + 2));
    pasts.emplace_back(std::move(prefix), static_cast<Symbol>(norm_rng.below(gamma_max + 2)));
  }
  std::vector<double> errors(pasts.size());
  for_each_replicate(ctx.policy, pasts.size(), [&](std::size_t i) { errors[i] = normalization_error(model, pasts[i]); });
  const double max_error = *std::max_element(errors.begin(), errors.end());

  Results results({"k", "chi2_upper", "chi2_empirical", "empirical_ok"}, cfg, cfg.n_contexts, "deterministic");
  Table upper_plot = plot_table(), emp_plot = plot_table();
  const RegularityProfile& profile = model.regularity();
  bool below = true;
  std::size_t next_point = 0;
  for (std::size_t k = cfg.k_lo; k <= cfg.k_hi; ++k) {
    double emp = kNaN;
    bool ok = true;
    if (next_point < points.size() && points[next_point] == k) {
      emp = empirical[next_point++];
      ok = emp <= upper[k] * (1.0 + 1e-9);
      below = below && ok;
      emp_plot.add({static_cast<double>(k), emp, upper[k]});
    }
    results.add({static_cast<std::uint64_t>(k), upper[k], emp, ok});
    const double env = profile.chi2_C * std::pow(static_cast<double>(k), -(1.0 + profile.chi2_delta));
    upper_plot.add({static_cast<double>(k), upper[k], env});
  }
  results.write(ctx.dir);
  ctx.plot("poisson_chi2_upper", upper_plot);
  ctx.plot("poisson_chi2_empirical", emp_plot);

  ctx.flag("slope", std::abs(fit.slope - cfg.expected_slope) <= cfg.expected_slope_tol);
  ctx.flag("empirical_below_upper", below);
  ctx.flag("normalization", max_error <= 1e-9);
  ctx.summary["slope"] = fit.slope;
  ctx.summary["slope_r2"] = fit.r2;
  ctx.summary["expected_slope"] = cfg.expected_slope;
  ctx.summary["S"] = model.poisson_S();
  ctx.summary["support"] = model.support_size();
  ctx.summary["max_normalization_error"] = max_error;
}

// ---------------------------------------------------------------------------

void run_bounds(RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const RegularityProfile& profile = cfg.model ? cfg.model->regularity() : cfg.profile;
  if (cfg.n_max < 1) throw ConfigError("config", "bounds.n_max must be >= 1");
  const BoundPipeline pipe(profile, cfg.beta, cfg.n_max, BSeqOptions{cfg.scan_width});
  const auto& b = pipe.b();
  const auto& f = pipe.f();
  const auto& u = pipe.u();

  std::vector<double> c1(cfg.n_max + 1, kNaN), c2(cfg.n_max + 1, kNaN);
  for (std::size_t k = 1; k <= cfg.n_max; ++k) {
    c1[k] = pipe.corollary1(k);
    c2[k] = pipe.corollary2(k);
  }

  auto at = [](const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : kNaN; };
  Results results({"n", "b", "f", "u", "corollary1", "corollary2"}, cfg, 0, "deterministic");
  for (std::size_t n = 0; n <= cfg.n_max; ++n)
    results.add({static_cast<std::uint64_t>(n), at(b, n), at(f, n), at(u, n), c1[n], c2[n]});
  results.write(ctx.dir);

  const double beta = cfg.beta, delta = profile.chi2_delta;
  const double u_rate = -(beta * delta + 1.0) / 2.0;
  const double c1_rate = u_rate / beta;
  const double c2_rate = -(beta * delta - 1.0) / (2.0 * beta);

  auto plot_with_rate = [&](const std::string& name, const std::vector<double>& seq, double rate) {
    Table t = plot_table();
    const std::size_t anchor = std::min(cfg.fit_lo, cfg.n_max);
    for (std::size_t n = 1; n < seq.size(); ++n) {
      const double env = seq[anchor] * std::pow(static_cast<double>(n) / static_cast<double>(anchor), rate);
      t.add({static_cast<double>(n), seq[n], env});
    }
    ctx.plot(name, t);
  };
  plot_with_rate("b", std::vector<double>(b.begin(), b.begin() + std::min(b.size(), cfg.n_max + 1)), u_rate);
  plot_with_rate("u", u, u_rate);
  plot_with_rate("corollary1", c1, c1_rate);
  plot_with_rate("corollary2", c2, c2_rate);

  ctx.summary["beta"] = beta;
  ctx.summary["delta"] = delta;
  ctx.summary["chi2_C"] = profile.chi2_C;
  ctx.summary["eps_floor"] = pipe.eps_floor();
  ctx.summary["survival_lower"] = pipe.survival_lower();
  if (profile.is_zero()) {
    bool zero = true;
    for (std::size_t n = 1; n <= cfg.n_max; ++n) zero = zero && u[n] == 0.0 && c1[n] == 0.0 && c2[n] == 0.0;
    ctx.flag("zero_profile_bounds_vanish", zero);
    return;
  }
  if (cfg.fit_lo < 1 || cfg.fit_hi <= cfg.fit_lo || cfg.fit_hi > cfg.n_max)
    throw ConfigError("config", "bounds.fit_lo/fit_hi must satisfy 1 <= fit_lo < fit_hi <= n_max");
  json slopes;
  auto check = [&](const std::string& name, const std::vector<double>& seq, double rate) {
    const SlopeFit fit = fit_decay_slope(seq, cfg.fit_lo, cfg.fit_hi);
    slopes[name] = {{"slope", fit.slope}, {"r2", fit.r2}, {"expected", rate}};
    ctx.flag(name + "_rate", fit.slope <= rate + cfg.slope_tol);
  };
  check("u", u, u_rate);
  check("corollary1", c1, c1_rate);
  check("corollary2", c2, c2_rate);
  ctx.summary["slopes"] = slopes;
}

// ---------------------------------------------------------------------------

json lemma_json(const LemmaReport& r) {
  return {{"pass", r.pass}, {"checks", r.checks}, {"worst_margin", real(r.worst_margin)}, {"worst_case", r.worst_case}};
}

void run_validate_lemmas(RunContext& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  RngStream rng = ctx.rng.derive(3);
  LemmaReport lemalg;
  for (std::size_t i = 0; i < cfg.lemalg_samples; ++i) {
    const double alpha = 1.0 + 4.0 * (1.0 - rng.uniform());  // (1, 5]
    double a = 100.0 * (1.0 - rng.uniform()), b = 100.0 * (1.0 - rng.uniform());  // (0, 100]
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const double margin = lemalg_margin(alpha, a, b);
    ++lemalg.checks;
    if (margin < lemalg.worst_margin) {
      lemalg.worst_margin = margin;
      lemalg.worst_case = "alpha=" + format_real(alpha) + " a=" + format_real(a) + " b=" + format_real(b);
    }
    if (!check_lemalg(alpha, a, b)) lemalg.pass = false;
  }

  LemmaGrid hj1_grid;
  hj1_grid.k_max = cfg.hj1_k_max;
  hj1_grid.n_max = cfg.hj1_n_max;
  LemmaGrid hj2_grid;
  hj2_grid.k_max = cfg.hj2_k_max;
  const LemmaReport hj1 = validate_hj1(hj1_grid);
  const LemmaReport hj2 = validate_hj2(hj2_grid);

  Results results({"lemma", "checks", "worst_margin", "worst_case", "pass"}, cfg, cfg.lemalg_samples,
                  "deterministic");
  const std::pair<const char*, const LemmaReport*> reports[] = {{"Lemalg", &lemalg}, {"HJ1", &hj1}, {"HJ2", &hj2}};
  json lemmas;
  for (const auto& [name, report] : reports) {
    results.add({std::string(name), report->checks, report->worst_margin, report->worst_case, report->pass});
    lemmas[name] = lemma_json(*report);
    ctx.flag(name, report->pass);
  }
  results.write(ctx.dir);
  ctx.summary["lemmas"] = lemmas;
}

}  // namespace

RunOutcome run(const ExperimentConfig& cfg) {
  RunContext ctx(cfg);
  switch (cfg.kind) {
    case ExperimentKind::mixing: run_mixing(ctx); break;
    case ExperimentKind::correlations: run_correlations(ctx); break;
    case ExperimentKind::fclt: run_fclt(ctx); break;
    case ExperimentKind::chernoff: run_chernoff(ctx); break;
    case ExperimentKind::poisson: run_poisson(ctx); break;
    case ExperimentKind::bounds: run_bounds(ctx); break;
    case ExperimentKind::validate_lemmas: run_validate_lemmas(ctx); break;
  }

  RunOutcome outcome;
  outcome.output_dir = ctx.dir;
  outcome.flags = ctx.flags;
  json flags = json::object();
  for (const auto& [name, value] : ctx.flags) {
    flags[name] = value;
    outcome.all_pass = outcome.all_pass && value;
  }
  ctx.summary["flags"] = flags;
  ctx.summary["all_pass"] = outcome.all_pass;

  std::ofstream out(ctx.dir / "summary.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("experiments", "cannot write summary.json");
  out << ctx.summary.dump(2) << '\n';
  return outcome;
}

}  // namespace gmix
