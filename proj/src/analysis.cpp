#include "gmix/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gmix/error.hpp"
#include "gmix/simulator.hpp"

namespace gmix {

// ---------------------------------------------------------------------------
// Observable

Observable::Observable(std::size_t alphabet_size, std::size_t depth, std::vector<double> table)
    : alphabet_(alphabet_size), depth_(depth), table_(std::move(table)) {
  if (alphabet_ < 2) throw DomainError("analysis", "observable alphabet needs at least 2 symbols");
  std::size_t expected = 1;
  for (std::size_t i = 0; i < depth_; ++i) expected *= alphabet_;
  if (table_.size() != expected)
    throw DomainError("analysis", "observable table needs " + std::to_string(expected) + " entries");
  for (double v : table_)
    if (!std::isfinite(v)) throw DomainError("analysis", "observable values must be finite");
}

Observable Observable::symbol_values(std::vector<double> values) {
  const std::size_t a = values.size();
  return Observable(a, 1, std::move(values));
}

Observable Observable::constant(std::size_t alphabet_size, double value) {
  return Observable(alphabet_size, 0, {value});
}

double Observable::range() const {
  const auto [lo, hi] = std::minmax_element(table_.begin(), table_.end());
  return *hi - *lo;
}

double Observable::at(std::span<const Symbol> path, std::size_t t) const {
  std::size_t index = 0;
  std::size_t scale = 1;
  for (std::size_t i = 0; i < depth_; ++i) {
    index += path[t - i] * scale;
    scale *= alphabet_;
  }
  return table_[index];
}

double Observable::variation(std::size_t k) const {
  if (k >= depth_) return 0.0;
  std::size_t groups = 1;
  for (std::size_t i = 0; i < k; ++i) groups *= alphabet_;
  double worst = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    double lo = table_[g];
    double hi = table_[g];
    for (std::size_t idx = g; idx < table_.size(); idx += groups) {
      lo = std::min(lo, table_[idx]);
      hi = std::max(hi, table_[idx]);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

Observable Observable::scaled(double c) const {
  std::vector<double> t = table_;
  for (double& v : t) v *= c;
  return Observable(alphabet_, depth_, std::move(t));
}

Observable Observable::plus(const Observable& other) const {
  if (other.alphabet_ != alphabet_) throw DomainError("analysis", "observables over different alphabets");
  const std::size_t depth = std::max(depth_, other.depth_);
  std::size_t size = 1;
  for (std::size_t i = 0; i < depth; ++i) size *= alphabet_;
  std::vector<double> t(size);
  const std::size_t mine = table_.size();
  const std::size_t theirs = other.table_.size();
  // The low digits of a window index are the most recent symbols, so a
  // shallower observable reads the index modulo its own table size.
  for (std::size_t i = 0; i < size; ++i) t[i] = table_[i % mine] + other.table_[i % theirs];
  return Observable(alphabet_, depth, std::move(t));
}

double seminorm_phi(const Observable& obs, const PotentialModel& model) {
  if (!model.alphabet().is_finite() || model.alphabet().size() != obs.alphabet_size())
    throw DomainError("analysis", "observable and model alphabets differ");
  if (var_upper(model, 0) == 0.0)
    throw DomainError("analysis", "seminorm undefined: the potential does not depend on the past");
  double best = 0.0;
  for (std::size_t k = 1; k < obs.depth(); ++k) {
    const double num = obs.variation(k);
    if (num == 0.0) continue;
    const double den = var_upper(model, k);
    if (den == 0.0)
      throw DomainError("analysis", "seminorm infinite: var_" + std::to_string(k) +
                                        "(e^phi) vanishes but the observable still varies");
    best = std::max(best, num / den);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Correlations

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& xs) {
  MeanSe r;
  const double m = static_cast<double>(xs.size());
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / (m - 1.0) / m);
  return r;
}

}  // namespace

std::vector<CorrelationEstimate> correlation_decay(const PotentialModel& model, const Observable& f,
                                                   const Observable& fhat, const std::vector<std::size_t>& lags,
                                                   const SimulationPlan& plan, const RngStream& rng,
                                                   const ExecPolicy& policy) {
  if (lags.empty()) throw DomainError("analysis", "no lags requested");
  if (plan.replicates < 1) throw DomainError("analysis", "need at least one replicate");
  const std::size_t first = std::max<std::size_t>(std::max(f.depth(), fhat.depth()), 1) - 1;
  const std::size_t max_lag = *std::max_element(lags.begin(), lags.end());
  if (plan.path_len < first + max_lag + 2) throw DomainError("analysis", "path too short for the largest lag");
  const std::size_t L = lags.size();
  const std::size_t R = plan.replicates;

  // Per replicate and lag: sums of f_t g_{t+lag}, f_t and g_{t+lag} over the
  // valid pairs, plus (for R = 1) the batch covariances.
  struct Sums {
    double total_f = 0.0;
    double total_g = 0.0;
    std::size_t count = 0;
    std::vector<double> fg, fs, gs;
    std::vector<std::size_t> pairs;
    std::vector<double> fvals, gvals;  // kept only when R = 1
  };
  std::vector<Sums> per(R);

  for_each_replicate(policy, R, [&](std::size_t r) {
    RngStream stream = rng.derive(r);
    const std::vector<Symbol> path = sample_stationary_symbols(model, plan.burn_in, plan.path_len, stream);
    Sums& s = per[r];
    const std::size_t n = path.size();
    std::vector<double> fv(n, 0.0), gv(n, 0.0);
    for (std::size_t t = first; t < n; ++t) {
      fv[t] = f.at(path, t);
      gv[t] = fhat.at(path, t);
      s.total_f += fv[t];
      s.total_g += gv[t];
    }
    s.count = n - first;
    s.fg.assign(L, 0.0);
    s.fs.assign(L, 0.0);
    s.gs.assign(L, 0.0);
    s.pairs.assign(L, 0);
    for (std::size_t j = 0; j < L; ++j) {
      const std::size_t lag = lags[j];
      for (std::size_t t = first; t + lag < n; ++t) {
        s.fg[j] += fv[t] * gv[t + lag];
        s.fs[j] += fv[t];
        s.gs[j] += gv[t + lag];
      }
      s.pairs[j] = n - lag - first;
    }
    if (R == 1) {
      s.fvals = std::move(fv);
      s.gvals = std::move(gv);
    }
  });

  double tf = 0.0, tg = 0.0, tc = 0.0;
  for (const Sums& s : per) {
    tf += s.total_f;
    tg += s.total_g;
    tc += static_cast<double>(s.count);
  }
  const double mf = tf / tc;
  const double mg = tg / tc;

  std::vector<CorrelationEstimate> out;
  for (std::size_t j = 0; j < L; ++j) {
    CorrelationEstimate e;
    e.lag = lags[j];
    if (R >= 2) {
      std::vector<double> covs(R);
      for (std::size_t r = 0; r < R; ++r) {
        const Sums& s = per[r];
        const double p = static_cast<double>(s.pairs[j]);
        covs[r] = (s.fg[j] - mg * s.fs[j] - mf * s.gs[j] + p * mf * mg) / p;
      }
      const MeanSe ms = mean_and_se(covs);
      e.rho_hat = ms.mean;
      e.se = ms.se;
    } else {
      const Sums& s = per[0];
      const double p = static_cast<double>(s.pairs[j]);
      e.rho_hat = (s.fg[j] - mg * s.fs[j] - mf * s.gs[j] + p * mf * mg) / p;
      const std::size_t batch = std::max<std::size_t>(50 * e.lag, 50);
      std::vector<double> covs;
      const std::size_t n = s.fvals.size();
      for (std::size_t start = first; start + batch + e.lag <= n; start += batch) {
        double acc = 0.0;
        for (std::size_t t = start; t < start + batch; ++t) acc += (s.fvals[t] - mf) * (s.gvals[t + e.lag] - mg);
        covs.push_back(acc / static_cast<double>(batch));
      }
      if (covs.size() >= 2) e.se = mean_and_se(covs).se;
    }
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// FCLT

namespace {

double calibrated_mean(const PotentialModel& model, const Observable& h, std::size_t length, std::size_t burn_in,
                       const RngStream& rng) {
  RngStream stream = rng.derive(0xCA11B8A7EULL);
  const std::vector<Symbol> path = sample_stationary_symbols(model, burn_in, length, stream);
  const std::size_t first = std::max<std::size_t>(h.depth(), 1) - 1;
  double s = 0.0;
  for (std::size_t t = first; t < path.size(); ++t) s += h.at(path, t);
  return s / static_cast<double>(path.size() - first);
}

}  // namespace

FcltResult fclt_paths(const PotentialModel& model, const Observable& h, std::size_t n, std::size_t replicates,
                      std::size_t burn_in, const RngStream& rng, std::optional<double> known_mean,
                      const ExecPolicy& policy) {
  if (h.depth() != 1) throw DomainError("analysis", "FCLT observable must depend on one symbol");
  if (n < 10) throw DomainError("analysis", "FCLT needs n >= 10");
  if (replicates < 2) throw DomainError("analysis", "FCLT needs at least two replicates");
  FcltResult res;
  for (int i = 1; i <= 10; ++i) res.grid.push_back(i / 10.0);
  const std::size_t G = res.grid.size();
  std::vector<std::size_t> cut(G);
  for (std::size_t g = 0; g < G; ++g)
    cut[g] = static_cast<std::size_t>(std::floor(static_cast<double>(n) * res.grid[g] + 1e-9));

  const double root_n = std::sqrt(static_cast<double>(n));

  // Uncentered partial sums first; the pooled mean is only known afterwards.
  std::vector<std::vector<double>> raw(replicates, std::vector<double>(G, 0.0));
  for_each_replicate(policy, replicates, [&](std::size_t r) {
    RngStream stream = rng.derive(r);
    const std::vector<Symbol> path = sample_stationary_symbols(model, burn_in, n, stream);
    double s = 0.0;
    std::size_t g = 0;
    for (std::size_t i = 1; i <= n && g < G; ++i) {
      s += h.at(path, i - 1);
      while (g < G && cut[g] == i) raw[r][g++] = s;
    }
  });
  if (known_mean) {
    res.centering = *known_mean;
  } else {
    double total = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) total += raw[r][G - 1];
    res.centering = total / (static_cast<double>(replicates) * static_cast<double>(n));
  }
  for (std::size_t r = 0; r < replicates; ++r)
    for (std::size_t g = 0; g < G; ++g)
      raw[r][g] = (raw[r][g] - res.centering * static_cast<double>(cut[g])) / root_n;

  std::vector<double> at_one(replicates);
  for (std::size_t r = 0; r < replicates; ++r) at_one[r] = raw[r][G - 1];
  const MeanSe ms = mean_and_se(at_one);
  res.sigma = ms.se * std::sqrt(static_cast<double>(replicates));
  if (!(res.sigma >= 1e-6)) throw DomainError("analysis", "degenerate FCLT scale: sigma estimate below 1e-6");

  res.paths.assign(replicates, std::vector<double>(G));
  for (std::size_t r = 0; r < replicates; ++r)
    for (std::size_t g = 0; g < G; ++g) res.paths[r][g] = raw[r][g] / res.sigma;

  res.variance_ratio.resize(G);
  for (std::size_t g = 0; g < G; ++g) {
    double mean = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) mean += res.paths[r][g];
    mean /= static_cast<double>(replicates);
    double ss = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) ss += (res.paths[r][g] - mean) * (res.paths[r][g] - mean);
    res.variance_ratio[g] = ss / static_cast<double>(replicates - 1) / res.grid[g];
  }
  std::vector<double> normalized_one(replicates);
  for (std::size_t r = 0; r < replicates; ++r) normalized_one[r] = res.paths[r][G - 1];
  const MeanSe m1 = mean_and_se(normalized_one);
  res.mean_at_one = m1.mean;
  res.mean_at_one_se = m1.se;
  return res;
}

// ---------------------------------------------------------------------------
// Chernoff

ChernoffResult chernoff_deviation(const PotentialModel& model, const Observable& h,
                                  const std::vector<std::size_t>& n_list, double t, std::size_t replicates,
                                  std::size_t burn_in, const RngStream& rng, std::optional<double> known_mean,
                                  const ExecPolicy& policy) {
  if (!(t > 0.0)) throw DomainError("analysis", "deviation threshold t must be > 0");
  if (n_list.empty() || replicates < 1) throw DomainError("analysis", "need sample sizes and replicates");
  if (h.depth() != 1) throw DomainError("analysis", "deviation observable must depend on one symbol");
  const std::size_t n_max = *std::max_element(n_list.begin(), n_list.end());
  if (*std::min_element(n_list.begin(), n_list.end()) < 1) throw DomainError("analysis", "sample sizes must be >= 1");

  ChernoffResult res;
  res.center = known_mean ? *known_mean : calibrated_mean(model, h, 10 * n_max, burn_in, rng);
  const double center = res.center;
  const std::size_t L = n_list.size();

  const auto counts = count_replicates(policy, replicates, L, [&](std::size_t r, std::span<std::uint64_t> acc) {
    RngStream stream = rng.derive(r);
    const std::vector<Symbol> path = sample_stationary_symbols(model, burn_in, n_max, stream);
    std::vector<double> prefix(n_max + 1, 0.0);
    for (std::size_t i = 1; i <= n_max; ++i) prefix[i] = prefix[i - 1] + h.at(path, i - 1);
    for (std::size_t j = 0; j < L; ++j) {
      const double mean = prefix[n_list[j]] / static_cast<double>(n_list[j]);
      if (std::abs(mean - center) >= t) acc[j] += 1;
    }
  });

  for (std::size_t j = 0; j < L; ++j) {
    const double p = static_cast<double>(counts[j]) / static_cast<double>(replicates);
    res.estimates.push_back({n_list[j], p, std::sqrt(p * (1.0 - p) / static_cast<double>(replicates))});
  }
  return res;
}

double binomial_sign_tail(std::size_t n, double t) {
  if (n < 1) throw DomainError("analysis", "n must be >= 1");
  const double dn = static_cast<double>(n);
  const double log_norm = std::lgamma(dn + 1.0) - dn * std::log(2.0);
  double p = 0.0;
  for (std::size_t b = 0; b <= n; ++b) {
    const double sum = 2.0 * static_cast<double>(b) - dn;
    if (std::abs(sum / dn) < t) continue;
    const double db = static_cast<double>(b);
    p += std::exp(log_norm - std::lgamma(db + 1.0) - std::lgamma(dn - db + 1.0));
  }
  return std::min(1.0, p);
}

// ---------------------------------------------------------------------------
// KS

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic(std::vector<double> samples) {
  if (samples.size() < 100) throw DomainError("analysis", "KS statistic needs at least 100 samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = normal_cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - c, c - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace gmix
