// Acceptance run: one PASS/FAIL line per criterion, INFO lines for the
// numbers behind each verdict. Exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gmix/analysis.hpp"
#include "gmix/config.hpp"
#include "gmix/coupling.hpp"
#include "gmix/divergence.hpp"
#include "gmix/error.hpp"
#include "gmix/experiments.hpp"
#include "gmix/oracle.hpp"
#include "gmix/potential.hpp"
#include "gmix/renewal.hpp"
#include "json.hpp"

using namespace gmix;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> info;

  void note(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    info.emplace_back(buf);
  }
  void require(bool ok, const char* fmt, auto... args) {
    pass = pass && ok;
    note(fmt, args...);
  }
};

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;  // <= 0: no runtime requirement
  std::function<void(Verdict&)> body;
};

std::vector<double> random_simplex(std::mt19937_64& gen, std::size_t size, double zero_prob) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(size);
  double s = 0.0;
  for (double& v : p) s += (v = u(gen) < zero_prob ? 0.0 : u(gen));
  if (s == 0.0) {
    p[0] = 1.0;
    s = 1.0;
  }
  for (double& v : p) v /= s;
  return p;
}

/// rhs - lhs for a claim lhs <= rhs, with infinities resolved by the claim itself.
double slack(double lhs, double rhs) {
  if (std::isfinite(lhs) && std::isfinite(rhs)) return rhs - lhs;
  return lhs <= rhs ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

double binomial_se(double p, double n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / n); }

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gmix-acceptance-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct ConfigRun {
  RunOutcome outcome;
  nlohmann::json summary;
};

ConfigRun run_config(const std::string& file, const fs::path& out, int threads = 0) {
  ExperimentConfig cfg = load_config(fs::path(GMIX_CONFIG_DIR) / file);
  cfg.output_dir = out;
  cfg.threads = threads;
  ConfigRun r{run(cfg), {}};
  r.summary = nlohmann::json::parse(slurp(out / "summary.json"));
  return r;
}

PotentialModel two_state() { return PotentialModel::markov(2, 1, {0.9, 0.1, 0.2, 0.8}); }

// ---------------------------------------------------------------------------

void lemma_validators(Verdict& v) {
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> alpha_dist(1.0, 5.0), x_dist(0.0, 100.0);
  std::size_t failures = 0, samples = 0;
  double worst = std::numeric_limits<double>::infinity();
  while (samples < 10000) {
    const double alpha = alpha_dist(gen);
    double a = x_dist(gen), b = x_dist(gen);
    if (alpha <= 1.0 || a <= 0.0 || b <= 0.0 || a == b) continue;
    if (a > b) std::swap(a, b);
    ++samples;
    if (!check_lemalg(alpha, a, b)) ++failures;
    worst = std::min(worst, lemalg_margin(alpha, a, b));
  }
  v.require(failures == 0, "Lemalg: %zu samples, %zu failures, worst margin %.3g", samples, failures, worst);
  const auto hj1 = validate_hj1(LemmaGrid{});
  const auto hj2 = validate_hj2(LemmaGrid{});
  v.require(hj1.pass, "HJ1: %llu checks, worst margin %.3g", static_cast<unsigned long long>(hj1.checks),
            hj1.worst_margin);
  v.require(hj2.pass, "HJ2: %llu checks, worst margin %.3g", static_cast<unsigned long long>(hj2.checks),
            hj2.worst_margin);
}

void divergence_properties(Verdict& v) {
  std::mt19937_64 gen(202);
  std::uniform_int_distribution<std::size_t> size_dist(1, 20);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_pinsker = std::numeric_limits<double>::infinity(), worst_bh = worst_pinsker, worst_chi = worst_pinsker;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t size = size_dist(gen);
    const Dist p(random_simplex(gen, size, 0.2));
    // Most q have full support so kl stays finite; a tenth may not.
    const Dist q(random_simplex(gen, size, u(gen) < 0.1 ? 0.2 : 0.0));
    const double t = tv(p, q), d = kl(p, q), c = chi2(p, q);
    worst_pinsker = std::min(worst_pinsker, slack(t * t, d / 2.0));
    worst_bh = std::min(worst_bh, slack(t, std::sqrt(1.0 - std::exp(-d))));
    worst_chi = std::min(worst_chi, slack(d, c));
  }
  const double tol = -1e-12;
  v.require(worst_pinsker >= tol, "tv^2 <= kl/2: worst slack %.3g", worst_pinsker);
  v.require(worst_bh >= tol, "tv <= sqrt(1 - exp(-kl)): worst slack %.3g", worst_bh);
  v.require(worst_chi >= tol, "kl <= chi2: worst slack %.3g", worst_chi);
}

void maximal_coupling(Verdict& v) {
  std::mt19937_64 gen(303);
  std::uniform_int_distribution<std::size_t> size_dist(2, 10);
  const RngStream base(303, 0);
  const std::size_t draws = 100000;
  std::size_t outside = 0;
  double worst_z = 0.0;
  for (std::size_t pair = 0; pair < 100; ++pair) {
    const std::size_t size = size_dist(gen);
    const Dist p(random_simplex(gen, size, 0.0)), q(random_simplex(gen, size, 0.0));
    RngStream rng = base.derive(pair);
    std::size_t differ = 0;
    for (std::size_t d = 0; d < draws; ++d) {
      const auto [i, j] = maximal_coupling_sample(p, q, rng);
      differ += i != j;
    }
    const double rate = static_cast<double>(differ) / draws, target = tv(p, q);
    const double z = std::abs(rate - target) / binomial_se(target, draws);
    worst_z = std::max(worst_z, z);
    if (z > 3.0) ++outside;
  }
  v.require(outside == 0, "100 pairs x 1e5 draws: %zu outside 3 SE, largest |z| = %.2f", outside, worst_z);
}

void oracle_equivalence(Verdict& v) {
  const auto chain = two_state();
  const History y({}, 0), z({}, 1);
  const std::uint64_t R = 100000;
  v.require(std::abs(exact_tv_coordinate(chain, y, z, 1) - 0.7) < 1e-12 &&
                std::abs(exact_tv_coordinate(chain, y, z, 2) - 0.49) < 1e-12,
            "exact_tv_coordinate: n=1 %.15g, n=2 %.15g", exact_tv_coordinate(chain, y, z, 1),
            exact_tv_coordinate(chain, y, z, 2));

  std::vector<std::uint64_t> coords;
  for (std::uint64_t n = 1; n <= 20; ++n) coords.push_back(n);
  const auto L = estimate_L(chain, y, z, coords, R, BlockSchedule(1.0), BlockMaximal{}, RngStream(404, 0));
  std::size_t misses = 0;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const double exact = exact_tv_coordinate(chain, y, z, coords[i]);
    const double dev = std::abs(L[i].value - exact);
    worst_z = std::max(worst_z, dev / binomial_se(exact, R));
    if (dev > 3.0 * binomial_se(exact, R) + 1e-12) ++misses;
  }
  v.require(misses == 0, "estimate_L vs exact tv, n <= 20 at 1e5 replicates: %zu misses, largest |z| = %.2f", misses,
            worst_z);

  struct Instance {
    std::string name;
    PotentialModel model;
    History y, z;
    double beta;
    std::uint64_t blocks;
  };
  const std::vector<Instance> instances{
      {"two-state beta=1", two_state(), History({}, 0), History({}, 1), 1.0, 20},
      {"two-state beta=1.5", two_state(), History({}, 0), History({}, 1), 1.5, 10},
      {"two-state beta=2", two_state(), History({}, 0), History({}, 1), 2.0, 4},
      {"three-symbol beta=1.5",
       PotentialModel::markov(3, 1, {0.6, 0.3, 0.1, 0.2, 0.5, 0.3, 0.1, 0.3, 0.6}), History({}, 0), History({}, 2),
       1.5, 6},
      {"order-2 binary beta=1.5", PotentialModel::markov(2, 2, {0.9, 0.1, 0.6, 0.4, 0.3, 0.7, 0.15, 0.85}),
       History({}, 0), History({}, 1), 1.5, 8},
      {"three-symbol IID beta=2", PotentialModel::iid({0.2, 0.3, 0.5}), History({}, 0), History({}, 1), 2.0, 3},
      {"two-state beta=3", two_state(), History({}, 0), History({}, 1), 3.0, 12},
  };
  std::size_t feasible = 0;
  for (std::size_t idx = 0; idx < instances.size(); ++idx) {
    const auto& inst = instances[idx];
    const BlockSchedule schedule(inst.beta);
    std::vector<double> exact;
    try {
      exact = exact_block_coupling_fail(inst.model, inst.y, inst.z, schedule, inst.blocks);
    } catch (const CapacityError&) {
      v.note("%s, %llu blocks: beyond the enumeration limits, skipped", inst.name.c_str(),
             static_cast<unsigned long long>(inst.blocks));
      continue;
    }
    ++feasible;
    const auto px = estimate_px(inst.model, inst.y, inst.z, inst.blocks, R, schedule, BlockMaximal{},
                                RngStream(404, 1 + idx));
    std::size_t px_misses = 0;
    double px_z = 0.0;
    for (std::size_t n = 0; n < exact.size(); ++n) {
      const double dev = std::abs(px[n].value - exact[n]);
      const double se = binomial_se(exact[n], R);
      if (se > 0.0) px_z = std::max(px_z, dev / se);
      if (dev > 3.0 * se + 1e-12) ++px_misses;
    }
    v.require(px_misses == 0, "%s, %llu blocks: %zu misses, largest |z| = %.2f", inst.name.c_str(),
              static_cast<unsigned long long>(inst.blocks), px_misses, px_z);
  }
  v.require(feasible >= 5, "%zu feasible block-coupling instances", feasible);
}

void failure_below_u(Verdict& v) {
  const auto model = PotentialModel::long_memory(0.2, 1.5, 1000);
  const std::uint64_t blocks = 200, R = 100000;
  const BoundPipeline pipe(model.regularity(), 1.0, blocks);
  const auto px = estimate_px(model, History({}, 1), History({}, 0), blocks, R, BlockSchedule(1.0), BlockMaximal{},
                              RngStream(505, 0));
  std::size_t misses = 0;
  double closest = std::numeric_limits<double>::infinity();
  for (std::uint64_t n = 1; n <= blocks; ++n) {
    const double margin = pipe.u()[n] + 3.0 * px[n - 1].se - px[n - 1].value;
    closest = std::min(closest, margin);
    if (margin < 0.0) ++misses;
  }
  v.require(misses == 0, "P[X_n=1] <= u_n + 3 SE for n <= 200: %zu misses, smallest margin %.3g", misses, closest);
  v.note("n=1: estimate %.4f, u %.4f; n=200: estimate %.3g, u %.3g", px[0].value, pipe.u()[1], px[199].value,
         pipe.u()[200]);
}

RegularityProfile power_profile(double C, double delta) {
  RegularityProfile p;
  p.chi2_C = C;
  p.chi2_delta = delta;
  return p;
}

struct RateCase {
  double C, delta, beta;
};

double u_slope(const RateCase& c) {
  const BoundPipeline pipe(power_profile(c.C, c.delta), c.beta, 10000);
  return fit_decay_slope(pipe.u(), 100, 10000).slope;
}

double corollary_slope(const RateCase& c, bool second) {
  const BoundPipeline pipe(power_profile(c.C, c.delta), c.beta, 10000);
  std::vector<double> seq(10001, 0.0);
  for (std::uint64_t k = 1; k <= 10000; ++k) seq[k] = second ? pipe.corollary2(k) : pipe.corollary1(k);
  return fit_decay_slope(seq, 100, 10000).slope;
}

void u_decay_rate(Verdict& v) {
  const double s1 = u_slope({1.0, 1.5, 1.0});
  v.require(s1 <= -1.25 + 0.10, "C=1, delta=1.5, beta=1: u slope %.4f, need <= -1.15", s1);
  const double s2 = u_slope({1.0, 0.8, 2.0});
  v.require(s2 <= -1.30 + 0.10, "C=1, delta=0.8, beta=2: u slope %.4f, need <= -1.20", s2);
  v.note("diagnostic C=0.01: slopes %.4f and %.4f", u_slope({0.01, 1.5, 1.0}), u_slope({0.01, 0.8, 2.0}));
}

void corollary_rates(Verdict& v) {
  const double c1 = corollary_slope({1.0, 1.5, 1.0}, false);
  v.require(c1 <= -1.25 + 0.10, "C=1, delta=1.5, beta=1: corollary1 slope %.4f, need <= -1.15", c1);
  const double c2 = corollary_slope({1.0, 0.8, 4.0}, true);
  v.require(c2 <= -0.275 + 0.10, "C=1, delta=0.8, beta=4: corollary2 slope %.4f, need <= -0.175", c2);
  v.note("diagnostic C=0.01: corollary1 %.4f, corollary2 %.4f", corollary_slope({0.01, 1.5, 1.0}, false),
         corollary_slope({0.01, 0.8, 4.0}, true));
}

void renewal_property(Verdict& v) {
  std::vector<double> f(10001, 0.0);
  for (std::size_t n = 1; n <= 10000; ++n) f[n] = 0.3 / (static_cast<double>(n) * static_cast<double>(n));
  const double s = fit_decay_slope(renewal_u(f, 10000), 100, 10000).slope;
  v.require(std::abs(s + 2.0) <= 0.15, "f_n = 0.3/n^2: u slope %.4f", s);
}

void poisson_autoregression(Verdict& v) {
  const auto r = run_config("poisson.ini", scratch("poisson"));
  const auto& flags = r.outcome.flags;
  v.require(flags.at("slope"), "chi2_upper slope over k in [10, 1000]: %.4f", r.summary["slope"].get<double>());
  v.require(flags.at("empirical_below_upper"), "chi2_empirical <= chi2_upper at every tested k: %s",
            flags.at("empirical_below_upper") ? "yes" : "no");
  v.require(flags.at("normalization"), "max normalization error %.3g",
            r.summary["max_normalization_error"].get<double>());
}

void fclt(Verdict& v) {
  const auto r = run_config("fclt_long_memory.ini", scratch("fclt"));
  v.require(r.outcome.flags.at("ks"), "KS distance of zeta_n(1) to N(0,1): %.4f", r.summary["ks"].get<double>());
  v.require(r.outcome.flags.at("variance_ratio"), "Var(zeta_n(t))/t within 10%% of 1 on the grid: %s",
            r.outcome.flags.at("variance_ratio") ? "yes" : "no");
}

void chernoff(Verdict& v) {
  const auto signs = Observable::symbol_values({-1.0, 1.0});
  const double t = 0.05;
  const auto lm = chernoff_deviation(PotentialModel::long_memory(0.2, 0.8, 500), signs, {1000, 4000}, t, 5000, 2000,
                                     RngStream(1111, 0), 0.0);
  const auto& a = lm.estimates[0];
  const auto& b = lm.estimates[1];
  v.require(b.prob <= a.prob + 3.0 * std::hypot(a.se, b.se),
            "long memory: P(n=1000) = %.4f +- %.4f, P(n=4000) = %.4f +- %.4f", a.prob, a.se, b.prob, b.se);

  const std::size_t R = 20000;
  const auto iid = chernoff_deviation(PotentialModel::iid({0.5, 0.5}), signs, {1000, 4000}, t, R, 0,
                                      RngStream(1111, 1), 0.0);
  for (const auto& e : iid.estimates) {
    const double exact = binomial_sign_tail(e.n, t);
    v.require(std::abs(e.prob - exact) <= 3.0 * binomial_se(exact, R), "IID n=%zu: estimate %.4f, binomial %.4f",
              e.n, e.prob, exact);
  }
}

void correlation_decay_checks(Verdict& v) {
  const auto ind = Observable::symbol_values({0.0, 1.0});
  std::vector<std::size_t> lags;
  for (std::size_t n = 1; n <= 15; ++n) lags.push_back(n);
  const SimulationPlan plan{200, 100000, 20};

  const auto iid = correlation_decay(PotentialModel::iid({0.5, 0.5}), ind, ind, lags, plan, RngStream(1212, 0));
  std::size_t iid_misses = 0;
  for (const auto& e : iid) iid_misses += std::abs(e.rho_hat) > 3.0 * e.se;
  v.require(iid_misses == 0, "IID: %zu of 15 lags outside 3 SE of 0", iid_misses);

  const auto chain = two_state();
  const auto mk = correlation_decay(chain, ind, ind, lags, plan, RngStream(1212, 1));
  std::size_t mk_misses = 0;
  double worst_z = 0.0;
  for (const auto& e : mk) {
    const double exact = exact_covariance(chain, {0.0, 1.0}, {0.0, 1.0}, e.lag);
    const double dev = std::abs(e.rho_hat - exact);
    worst_z = std::max(worst_z, dev / e.se);
    mk_misses += dev > 3.0 * e.se;
  }
  v.require(mk_misses == 0, "two-state chain vs (2/9) 0.7^n: %zu of 15 lags outside 3 SE, largest |z| = %.2f",
            mk_misses, worst_z);

  const auto r = run_config("correlations_long_memory.ini", scratch("correlations"));
  const auto slope = r.summary["slope"];
  v.require(r.outcome.flags.at("rate"), "long memory delta=1.5: slope %s over %zu resolvable lags, need <= -1.00",
            slope.is_null() ? "n/a" : std::to_string(slope.get<double>()).c_str(),
            r.summary["resolvable_lags"].get<std::size_t>());
}

void reproducibility(Verdict& v) {
  struct Case {
    std::string name;
    std::string text;
  };
  const std::vector<Case> cases{
      {"mixing", "[experiment]\nkind = mixing\nseed = 77\nreplicates = 20000\n[model]\ntype = markov\nalphabet = 2\n"
                 "order = 1\ntable = 0.9, 0.1, 0.2, 0.8\n[coupling]\nbeta = 1.5\nblocks = 10\n"},
      {"correlations", "[experiment]\nkind = correlations\nseed = 78\nreplicates = 8\n[model]\ntype = long-memory\n"
                       "eps0 = 0.2\ndelta = 1.5\nk_max = 100\n[analysis]\nlags = 1..5\nburn_in = 200\n"
                       "path_len = 5000\n"},
      {"chernoff", "[experiment]\nkind = chernoff\nseed = 79\nreplicates = 500\n[model]\ntype = long-memory\n"
                   "eps0 = 0.2\ndelta = 0.8\nk_max = 100\n[analysis]\nn_list = 100, 400\nt = 0.1\nburn_in = 100\n"},
  };
  for (const auto& c : cases) {
    std::vector<std::string> outputs;
    for (int threads : {1, 1, 4}) {
      ExperimentConfig cfg = parse_config(c.text);
      cfg.threads = threads;
      cfg.output_dir = scratch(c.name + "-" + std::to_string(outputs.size()));
      run(cfg);
      outputs.push_back(slurp(cfg.output_dir / "results.csv"));
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
    v.require(same, "%s: results.csv identical across reruns and 1 vs 4 threads (%zu bytes)", c.name.c_str(),
              outputs[0].size());
  }
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "lemma validators", 10.0, lemma_validators},
      {2, "divergence inequalities", 5.0, divergence_properties},
      {3, "maximal coupling exactness", 0.0, maximal_coupling},
      {4, "oracle equivalence", 300.0, oracle_equivalence},
      {5, "coupling failure below u_n", 1800.0, failure_below_u},
      {6, "u_n decay rate", 10.0, u_decay_rate},
      {7, "corollary decay rates", 30.0, corollary_rates},
      {8, "renewal power-law transfer", 0.0, renewal_property},
      {9, "Poisson autoregression", 0.0, poisson_autoregression},
      {10, "functional CLT", 1200.0, fclt},
      {11, "deviation probabilities", 0.0, chernoff},
      {12, "correlation decay", 0.0, correlation_decay_checks},
      {13, "reproducibility", 0.0, reproducibility},
  };

  int passed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.require(false, "error: %s", e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0.0) v.require(seconds < c.time_limit_s, "runtime %.2f s, limit %.0f s", seconds, c.time_limit_s);
    for (const auto& line : v.info) std::printf("  INFO [%02d] %s\n", c.id, line.c_str());
    std::printf("%s [%02d] %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.title.c_str(), seconds);
    std::fflush(stdout);
    passed += v.pass;
  }
  std::printf("%d of %zu criteria passed\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
