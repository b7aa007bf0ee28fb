#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gmix/coupling.hpp"
#include "gmix/parallel.hpp"
#include "gmix/potential.hpp"
#include "gmix/rng.hpp"

namespace gmix {

/// A function of the `depth` most recent symbols of a finite-alphabet path.
/// The table index of a window (eta_t, eta_{t-1}, ..., eta_{t-depth+1}) is
/// sum_i eta_{t-i} * alphabet^i, so the most recent symbol is the least
/// significant digit.
class Observable {
 public:
  Observable(std::size_t alphabet_size, std::size_t depth, std::vector<double> table);

  /// h(eta_t) for depth 1.
  static Observable symbol_values(std::vector<double> values);
  static Observable constant(std::size_t alphabet_size, double value);

  std::size_t alphabet_size() const { return alphabet_; }
  std::size_t depth() const { return depth_; }
  const std::vector<double>& table() const { return table_; }
  double range() const;

  /// Value at the window ending at path[t]; requires t + 1 >= depth.
  double at(std::span<const Symbol> path, std::size_t t) const;

  /// sup |f(x) - f(y)| over windows sharing their k most recent symbols.
  double variation(std::size_t k) const;

  Observable scaled(double c) const;
  Observable plus(const Observable& other) const;

 private:
  std::size_t alphabet_;
  std::size_t depth_;
  std::vector<double> table_;
};

/// sup_{k>=1} var_k(f) / var_k(e^phi), using var_upper for the denominator.
double seminorm_phi(const Observable& obs, const PotentialModel& model);

struct CorrelationEstimate {
  std::size_t lag = 0;
  /// Signed covariance estimate; the correlation rate is its absolute value.
  double rho_hat = 0.0;
  double se = 0.0;
};

struct SimulationPlan {
  std::size_t burn_in = 1000;
  std::size_t path_len = 10000;
  std::size_t replicates = 10;
};

/// Covariance between f at time t and fhat at time t + lag under the
/// (burn-in approximated) stationary law. Means are pooled over all
/// replicates; the SE comes from the spread across replicates, or from batch
/// means of length 50 * lag when there is a single replicate.
std::vector<CorrelationEstimate> correlation_decay(const PotentialModel& model, const Observable& f,
                                                   const Observable& fhat, const std::vector<std::size_t>& lags,
                                                   const SimulationPlan& plan, const RngStream& rng,
                                                   const ExecPolicy& policy = {});

struct FcltResult {
  std::vector<double> grid;                  // t values
  std::vector<std::vector<double>> paths;    // [replicate][grid index] normalized zeta_n(t)
  double centering = 0.0;                    // mean of h the sums are centered at
  double sigma = 0.0;                        // sd of the unnormalized zeta_n(1) over replicates
  std::vector<double> variance_ratio;        // Var(zeta_n(t)) / t per grid point
  double mean_at_one = 0.0;
  double mean_at_one_se = 0.0;
};

/// Samples zeta_n(t) = (sigma sqrt n)^{-1} sum_{i<=nt} (h(eta_i) - m) on
/// t = 0.1, ..., 1.0. m is `known_mean` when given, else the mean of h pooled
/// over all replicates (a separate calibration run would have to be far
/// longer than n * replicates to be as accurate). sigma is the replicate
/// standard deviation of the unnormalized zeta_n(1).
FcltResult fclt_paths(const PotentialModel& model, const Observable& h, std::size_t n, std::size_t replicates,
                      std::size_t burn_in, const RngStream& rng, std::optional<double> known_mean = {},
                      const ExecPolicy& policy = {});

struct DeviationEstimate {
  std::size_t n = 0;
  double prob = 0.0;
  double se = 0.0;
};

struct ChernoffResult {
  double center = 0.0;  // the mean deviations are measured from
  std::vector<DeviationEstimate> estimates;
};

/// P[|n^{-1} sum_{i<=n} h(eta_i) - E| >= t] for each n. E is `known_mean`
/// when given, else the mean of a calibration run 10 times the largest n.
ChernoffResult chernoff_deviation(const PotentialModel& model, const Observable& h,
                                  const std::vector<std::size_t>& n_list, double t, std::size_t replicates,
                                  std::size_t burn_in, const RngStream& rng, std::optional<double> known_mean = {},
                                  const ExecPolicy& policy = {});

/// Exact P[|2B/n - 1| >= t] for B ~ Binomial(n, 1/2): the deviation law of
/// the mean of n fair +-1 signs.
double binomial_sign_tail(std::size_t n, double t);

/// Kolmogorov-Smirnov distance from the empirical law of `samples` to N(0,1).
double ks_statistic(std::vector<double> samples);

double normal_cdf(double x);

}  // namespace gmix
