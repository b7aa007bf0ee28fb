#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gmix/coupling.hpp"
#include "gmix/divergence.hpp"
#include "gmix/history.hpp"
#include "gmix/potential.hpp"

namespace gmix {

/// Exact computations for IID and finite-order Markov models by propagating
/// laws over context states. Capacities are hard limits: exceeding one throws
/// CapacityError instead of approximating.
struct OracleLimits {
  std::size_t max_states = 1'000'000;        // |A|^m for single-chain propagation
  std::size_t max_joint_work = 50'000'000;   // joint states x joint block outcomes per block
};

/// Law of eta_n under the chain started from past y.
Dist exact_marginal(const PotentialModel& model, const History& y, std::uint64_t n, const OracleLimits& limits = {});

/// Total variation between the laws of eta_n started from y and from z.
double exact_tv_coordinate(const PotentialModel& model, const History& y, const History& z, std::uint64_t n,
                           const OracleLimits& limits = {});

struct BlockCouplingExact {
  std::vector<double> px;          // [n-1]: P[X_n = 1], n = 1..n_max
  std::vector<double> mismatch;    // [k-1]: P[eta_k != omega_k] up to the horizon
  std::vector<double> theta_tail;  // [k-1]: P[some mismatch at a coordinate >= k] up to the horizon
};

/// Exact law of the block-maximal coupling over the first n_max blocks.
BlockCouplingExact exact_block_coupling(const PotentialModel& model, const History& y, const History& z,
                                        const BlockSchedule& schedule, std::uint64_t n_max,
                                        const OracleLimits& limits = {});

/// P[X_n = 1], n = 1..n_max, under the block-maximal coupling.
std::vector<double> exact_block_coupling_fail(const PotentialModel& model, const History& y, const History& z,
                                              const BlockSchedule& schedule, std::uint64_t n_max,
                                              const OracleLimits& limits = {});

/// Stationary law of eta_0 for an IID or Markov model (lazy power iteration).
Dist exact_stationary_symbol(const PotentialModel& model, const OracleLimits& limits = {});

/// Stationary Cov(f(eta_0), g(eta_lag)) for functions of a single symbol.
double exact_covariance(const PotentialModel& model, const std::vector<double>& f, const std::vector<double>& g,
                        std::size_t lag, const OracleLimits& limits = {});

}  // namespace gmix
