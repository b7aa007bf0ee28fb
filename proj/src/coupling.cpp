#include "gmix/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gmix/divergence.hpp"
#include "gmix/error.hpp"

namespace gmix {

// ---------------------------------------------------------------------------
// Schedule

BlockSchedule::BlockSchedule(double beta) : beta_(beta) {
  if (!(beta >= 1.0) || !std::isfinite(beta)) throw DomainError("coupling", "block exponent beta must be >= 1");
  integral_ = beta == std::floor(beta) && beta <= 16.0;
}

std::uint64_t BlockSchedule::boundary(std::uint64_t n) const {
  if (n == 0) throw DomainError("coupling", "block index must be >= 1");
  if (integral_) {
    const auto e = static_cast<unsigned>(beta_);
    std::uint64_t r = 1;
    for (unsigned i = 0; i < e; ++i) {
      if (r > std::numeric_limits<std::uint64_t>::max() / n) throw CapacityError("coupling", "block boundary overflows");
      r *= n;
    }
    return r;
  }
  const long double v = std::pow(static_cast<long double>(n), static_cast<long double>(beta_));
  if (v >= 1.8e19L) throw CapacityError("coupling", "block boundary overflows");
  // Values within rounding of an integer are integers (e.g. 4^1.5 = 8).
  const long double r = std::round(v);
  if (std::abs(v - r) <= 1e-12L * v) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::floor(v));
}

std::uint64_t BlockSchedule::block_of(std::uint64_t coord) const {
  if (coord == 0) throw DomainError("coupling", "coordinates start at 1");
  auto n = static_cast<std::uint64_t>(std::pow(static_cast<double>(coord), 1.0 / beta_));
  n = std::max<std::uint64_t>(n, 1);
  while (n > 1 && boundary(n) > coord) --n;
  while (boundary(n + 1) <= coord) ++n;
  return n;
}

BlockRange block_bounds(const BlockSchedule& schedule, std::uint64_t n) {
  return {schedule.boundary(n), schedule.boundary(n + 1)};
}

std::string_view mode_name(const CouplingMode& mode) {
  return std::holds_alternative<BlockMaximal>(mode) ? "block-maximal" : "coordinate-sequential";
}

// ---------------------------------------------------------------------------
// One block

namespace {

// Probabilities of every block outcome w in A^len, indexed with the first
// coordinate as the most significant digit.
class BlockEnumerator {
 public:
  BlockEnumerator(const PotentialModel& model, std::size_t len)
      : model_(model), support_(model.support_size()), len_(len), scratch_(len * support_) {}

  void run(const History& start, std::vector<Symbol>& past, std::vector<double>& out) {
    std::size_t states = 1;
    for (std::size_t i = 0; i < len_; ++i) states *= support_;
    out.assign(states, 0.0);
    recurse(start, past, 0, 1.0, 0, out);
  }

 private:
  void recurse(const History& start, std::vector<Symbol>& past, std::size_t depth, double prob, std::size_t index,
               std::vector<double>& out) {
    if (depth == len_) {
      out[index] = prob;
      return;
    }
    const std::span<double> probs(scratch_.data() + depth * support_, support_);
    model_.conditional(ContextView(start, past), probs);
    for (std::size_t a = 0; a < support_; ++a) {
      const double p = probs[a];
      if (p == 0.0) continue;
      past.push_back(static_cast<Symbol>(a));
      recurse(start, past, depth + 1, prob * p, index * support_ + a, out);
      past.pop_back();
    }
  }

  const PotentialModel& model_;
  std::size_t support_;
  std::size_t len_;
  std::vector<double> scratch_;
};

void append_digits(std::size_t index, std::size_t base, std::size_t len, std::vector<Symbol>& dst) {
  const std::size_t first = dst.size();
  dst.resize(first + len);
  for (std::size_t i = len; i-- > 0;) {
    dst[first + i] = static_cast<Symbol>(index % base);
    index /= base;
  }
}

}  // namespace

bool step_block(const PotentialModel& model, CoupledPasts& pasts, const BlockSchedule& schedule, std::uint64_t n,
                const CouplingMode& mode, RngStream& rng) {
  const BlockRange block = block_bounds(schedule, n);
  if (pasts.eta.size() != block.begin - 1 || pasts.omega.size() != block.begin - 1)
    throw DomainError("coupling", "pasts do not end right before block " + std::to_string(n));
  const std::size_t len = block.length();
  const std::size_t support = model.support_size();

  if (const auto* bm = std::get_if<BlockMaximal>(&mode)) {
    double states = std::pow(static_cast<double>(support), static_cast<double>(len));
    if (states > static_cast<double>(bm->max_block_states))
      throw CapacityError("coupling", "block-maximal coupling of block " + std::to_string(n) + " needs " +
                                          std::to_string(support) + "^" + std::to_string(len) +
                                          " outcomes, above max_block_states = " +
                                          std::to_string(bm->max_block_states));
    BlockEnumerator enumerator(model, len);
    std::vector<double> p;
    std::vector<double> q;
    enumerator.run(pasts.start_eta, pasts.eta, p);
    enumerator.run(pasts.start_omega, pasts.omega, q);
    const auto [i, j] = maximal_coupling_sample(p, q, rng);
    append_digits(i, support, len, pasts.eta);
    append_digits(j, support, len, pasts.omega);
    return i != j;
  }

  std::vector<double> p(support);
  std::vector<double> q(support);
  bool differ = false;
  for (std::size_t c = 0; c < len; ++c) {
    model.conditional(ContextView(pasts.start_eta, pasts.eta), p);
    model.conditional(ContextView(pasts.start_omega, pasts.omega), q);
    const auto [a, b] = maximal_coupling_sample(p, q, rng);
    pasts.eta.push_back(static_cast<Symbol>(a));
    pasts.omega.push_back(static_cast<Symbol>(b));
    differ = differ || a != b;
  }
  return differ;
}

CoupledRun run_coupling(const PotentialModel& model, const History& y, const History& z, std::uint64_t n_blocks,
                        const BlockSchedule& schedule, const CouplingMode& mode, RngStream& rng,
                        bool keep_trajectories) {
  if (n_blocks < 1) throw DomainError("coupling", "need at least one block");
  y.validate(model.alphabet());
  z.validate(model.alphabet());
  CoupledPasts pasts{y, z, {}, {}};
  const std::uint64_t horizon = schedule.boundary(n_blocks + 1) - 1;
  pasts.eta.reserve(horizon);
  pasts.omega.reserve(horizon);

  CoupledRun run;
  run.x.resize(n_blocks);
  std::uint64_t last_fail_block = 0;
  for (std::uint64_t n = 1; n <= n_blocks; ++n) {
    const bool fail = step_block(model, pasts, schedule, n, mode, rng);
    run.x[n - 1] = fail ? 1 : 0;
    if (fail) last_fail_block = n;
  }
  if (last_fail_block > 0) {
    const BlockRange b = block_bounds(schedule, last_fail_block);
    for (std::uint64_t k = b.end - 1; k >= b.begin; --k) {
      if (pasts.eta[k - 1] != pasts.omega[k - 1]) {
        run.last_mismatch = k;
        break;
      }
    }
  }
  if (last_fail_block < n_blocks) run.theta_block = last_fail_block + 1;
  if (keep_trajectories) run.trajectories.emplace(std::move(pasts.eta), std::move(pasts.omega));
  return run;
}

// ---------------------------------------------------------------------------
// Monte Carlo estimators

namespace {

Estimate proportion(std::uint64_t hits, std::uint64_t total) {
  const double p = static_cast<double>(hits) / static_cast<double>(total);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(total))};
}

}  // namespace

Estimate CouplingCounts::px(std::uint64_t n) const { return proportion(block_fail.at(n - 1), replicates); }
Estimate CouplingCounts::mismatch(std::uint64_t k) const { return proportion(coord_mismatch.at(k - 1), replicates); }
Estimate CouplingCounts::theta_tail(std::uint64_t k) const { return proportion(theta_exceeds.at(k - 1), replicates); }

CouplingCounts simulate_coupling(const PotentialModel& model, const History& y, const History& z,
                                 std::uint64_t n_blocks, std::uint64_t replicates, const BlockSchedule& schedule,
                                 const CouplingMode& mode, const RngStream& rng, const ExecPolicy& policy) {
  if (replicates < 1) throw DomainError("coupling", "need at least one replicate");
  if (n_blocks < 1) throw DomainError("coupling", "need at least one block");
  y.validate(model.alphabet());
  z.validate(model.alphabet());
  const std::uint64_t horizon = schedule.boundary(n_blocks + 1) - 1;
  // Layout: [block_fail | coord_mismatch | histogram of last_mismatch (0..horizon)].
  const std::size_t width = n_blocks + horizon + horizon + 1;
  const auto totals = count_replicates(policy, replicates, width, [&](std::size_t r, std::span<std::uint64_t> acc) {
    RngStream stream = rng.derive(r);
    CoupledPasts pasts{y, z, {}, {}};
    pasts.eta.reserve(horizon);
    pasts.omega.reserve(horizon);
    std::uint64_t last = 0;
    for (std::uint64_t n = 1; n <= n_blocks; ++n) {
      const std::size_t before = pasts.eta.size();
      if (step_block(model, pasts, schedule, n, mode, stream)) {
        acc[n - 1] += 1;
        for (std::size_t c = before; c < pasts.eta.size(); ++c) {
          if (pasts.eta[c] != pasts.omega[c]) {
            acc[n_blocks + c] += 1;
            last = c + 1;
          }
        }
      }
    }
    acc[n_blocks + horizon + last] += 1;
  });

  CouplingCounts out;
  out.replicates = replicates;
  out.n_blocks = n_blocks;
  out.horizon = horizon;
  out.block_fail.assign(totals.begin(), totals.begin() + static_cast<std::ptrdiff_t>(n_blocks));
  out.coord_mismatch.assign(totals.begin() + static_cast<std::ptrdiff_t>(n_blocks),
                            totals.begin() + static_cast<std::ptrdiff_t>(n_blocks + horizon));
  out.theta_exceeds.assign(horizon, 0);
  std::uint64_t suffix = 0;
  for (std::uint64_t k = horizon; k >= 1; --k) {
    suffix += totals[n_blocks + horizon + k];
    out.theta_exceeds[k - 1] = suffix;
  }
  return out;
}

std::vector<Estimate> estimate_px(const PotentialModel& model, const History& y, const History& z,
                                  std::uint64_t n_blocks, std::uint64_t replicates, const BlockSchedule& schedule,
                                  const CouplingMode& mode, const RngStream& rng, const ExecPolicy& policy) {
  const CouplingCounts counts = simulate_coupling(model, y, z, n_blocks, replicates, schedule, mode, rng, policy);
  std::vector<Estimate> out;
  out.reserve(n_blocks);
  for (std::uint64_t n = 1; n <= n_blocks; ++n) out.push_back(counts.px(n));
  return out;
}

namespace {

std::uint64_t blocks_covering(const std::vector<std::uint64_t>& coords, const BlockSchedule& schedule) {
  if (coords.empty()) throw DomainError("coupling", "coordinate list is empty");
  const std::uint64_t max_coord = *std::max_element(coords.begin(), coords.end());
  if (*std::min_element(coords.begin(), coords.end()) < 1) throw DomainError("coupling", "coordinates start at 1");
  return schedule.block_of(max_coord);
}

}  // namespace

std::vector<Estimate> estimate_L(const PotentialModel& model, const History& y, const History& z,
                                 const std::vector<std::uint64_t>& coords, std::uint64_t replicates,
                                 const BlockSchedule& schedule, const CouplingMode& mode, const RngStream& rng,
                                 const ExecPolicy& policy) {
  const std::uint64_t n_blocks = blocks_covering(coords, schedule);
  const CouplingCounts counts = simulate_coupling(model, y, z, n_blocks, replicates, schedule, mode, rng, policy);
  std::vector<Estimate> out;
  out.reserve(coords.size());
  for (std::uint64_t k : coords) out.push_back(counts.mismatch(k));
  return out;
}

std::vector<Estimate> estimate_M_tail(const PotentialModel& model, const History& y, const History& z,
                                      const std::vector<std::uint64_t>& coords, std::uint64_t replicates,
                                      const BlockSchedule& schedule, const CouplingMode& mode, const RngStream& rng,
                                      const ExecPolicy& policy) {
  const std::uint64_t n_blocks = blocks_covering(coords, schedule);
  const CouplingCounts counts = simulate_coupling(model, y, z, n_blocks, replicates, schedule, mode, rng, policy);
  std::vector<Estimate> out;
  out.reserve(coords.size());
  for (std::uint64_t k : coords) out.push_back(counts.theta_tail(k));
  return out;
}

}  // namespace gmix
