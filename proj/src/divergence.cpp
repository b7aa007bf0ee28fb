#include "gmix/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gmix/error.hpp"

namespace gmix {

namespace {

void require_same_support(std::size_t a, std::size_t b) {
  if (a != b)
    throw DomainError("divergence", "support mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

Dist::Dist(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw DomainError("divergence", "distribution needs a nonempty support");
  double s = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0)) throw DomainError("divergence", "probabilities must be nonnegative");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw DomainError("divergence", "probabilities must sum to 1");
}

Dist Dist::point_mass(std::size_t size, std::size_t atom) {
  std::vector<double> v(size, 0.0);
  v.at(atom) = 1.0;
  return Dist(std::move(v));
}

double tv(const Dist& p, const Dist& q) {
  require_same_support(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return std::min(1.0, 0.5 * s);
}

double kl(const Dist& p, const Dist& q) {
  require_same_support(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    s += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, s);
}

double chi2(const Dist& p, const Dist& q) {
  require_same_support(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] == 0.0) {
      if (p[i] > 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    const double d = p[i] - q[i];
    s += d * d / q[i];
  }
  return s;
}

double pinsker_tv_bound(double kl_value) {
  if (!(kl_value >= 0.0)) throw DomainError("divergence", "KL value must be >= 0");
  return std::sqrt(0.5 * kl_value);
}

double bh_tv_bound(double kl_value) {
  if (!(kl_value >= 0.0)) throw DomainError("divergence", "KL value must be >= 0");
  return std::sqrt(-std::expm1(-kl_value));
}

std::size_t sample_index(std::span<const double> weights, double u) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc) return i;
  }
  // Rounding can leave u just above the accumulated total.
  return last_positive;
}

std::pair<std::size_t, std::size_t> maximal_coupling_sample(std::span<const double> p, std::span<const double> q,
                                                            RngStream& rng) {
  require_same_support(p.size(), q.size());
  const std::size_t n = p.size();
  double overlap = 0.0;
  double p_excess = 0.0;
  double q_excess = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    overlap += std::min(p[i], q[i]);
    p_excess += std::max(p[i] - q[i], 0.0);
    q_excess += std::max(q[i] - p[i], 0.0);
  }
  // Draw against the computed masses rather than 1 so identical inputs
  // always land in the common part.
  const double u = rng.uniform() * (overlap + p_excess);
  if (u < overlap) {
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = std::min(p[i], q[i]);
      if (m <= 0.0) continue;
      acc += m;
      last = i;
      if (u < acc) return {i, i};
    }
    return {last, last};
  }
  std::size_t a = 0;
  {
    double acc = overlap;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = p[i] - q[i];
      if (m <= 0.0) continue;
      acc += m;
      a = i;
      if (u < acc) break;
    }
  }
  const double v = rng.uniform() * q_excess;
  std::size_t b = 0;
  {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = q[i] - p[i];
      if (m <= 0.0) continue;
      acc += m;
      b = i;
      if (v < acc) break;
    }
  }
  return {a, b};
}

std::pair<std::size_t, std::size_t> maximal_coupling_sample(const Dist& p, const Dist& q, RngStream& rng) {
  return maximal_coupling_sample(p.probs(), q.probs(), rng);
}

}  // namespace gmix
