#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "gmix/rng.hpp"

namespace gmix {

/// A probability vector over {0, ..., size-1}.
class Dist {
 public:
  /// Throws DomainError unless the entries are nonnegative, the vector is
  /// nonempty and it sums to 1 within 1e-12.
  explicit Dist(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

  static Dist point_mass(std::size_t size, std::size_t atom);
  static Dist bernoulli(double p1) { return Dist({1.0 - p1, p1}); }

 private:
  std::vector<double> probs_;
};

double tv(const Dist& p, const Dist& q);
/// Kullback-Leibler divergence with 0 ln 0 = 0; +infinity without absolute
/// continuity.
double kl(const Dist& p, const Dist& q);
/// Pearson chi-square; +infinity when q vanishes where p does not.
double chi2(const Dist& p, const Dist& q);

double pinsker_tv_bound(double kl_value);
double bh_tv_bound(double kl_value);

/// One draw from the maximal coupling of two laws on the same support.
///
/// With probability 1 - tv both coordinates come from the common part
/// min(p, q); otherwise they come independently from the normalized
/// residuals (p - q)^+ and (q - p)^+, whose supports are disjoint.
std::pair<std::size_t, std::size_t> maximal_coupling_sample(std::span<const double> p, std::span<const double> q,
                                                            RngStream& rng);
std::pair<std::size_t, std::size_t> maximal_coupling_sample(const Dist& p, const Dist& q, RngStream& rng);

/// Index drawn from unnormalized nonnegative weights by inversion, given the
/// uniform u in [0, total).
std::size_t sample_index(std::span<const double> weights, double u);

}  // namespace gmix
