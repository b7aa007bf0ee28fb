#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "gmix/history.hpp"
#include "gmix/parallel.hpp"
#include "gmix/potential.hpp"
#include "gmix/rng.hpp"

namespace gmix {

/// Block boundaries M_n = floor(n^beta), n >= 1. Block n covers the
/// coordinates [M_n, M_{n+1}).
class BlockSchedule {
 public:
  explicit BlockSchedule(double beta);

  double beta() const { return beta_; }
  /// M_n, exact for integer beta and for every n where n^beta is an integer.
  std::uint64_t boundary(std::uint64_t n) const;
  /// Largest n with M_n <= coord, i.e. the block containing coordinate `coord`.
  std::uint64_t block_of(std::uint64_t coord) const;

 private:
  double beta_;
  bool integral_;
};

struct BlockRange {
  std::uint64_t begin;  // M_n
  std::uint64_t end;    // M_{n+1}, exclusive
  std::uint64_t length() const { return end - begin; }
  friend bool operator==(const BlockRange&, const BlockRange&) = default;
};

BlockRange block_bounds(const BlockSchedule& schedule, std::uint64_t n);

/// Exact maximal coupling of the two block laws, feasible while
/// support^length <= max_block_states.
struct BlockMaximal {
  std::size_t max_block_states = 1 << 20;
};
/// One coordinate at a time, each maximally coupled given the realized
/// within-block pasts. Never worse than independent sampling, but not
/// block-maximal.
struct CoordinateSequential {};
using CouplingMode = std::variant<BlockMaximal, CoordinateSequential>;

std::string_view mode_name(const CouplingMode& mode);

/// State of the two coupled chains: fixed starting pasts plus everything
/// emitted so far (oldest first).
struct CoupledPasts {
  History start_eta;
  History start_omega;
  std::vector<Symbol> eta;
  std::vector<Symbol> omega;
};

/// Samples block n for both chains and appends it to the pasts. Returns
/// X_n, i.e. whether the two blocks differ anywhere.
bool step_block(const PotentialModel& model, CoupledPasts& pasts, const BlockSchedule& schedule, std::uint64_t n,
                const CouplingMode& mode, RngStream& rng);

struct CoupledRun {
  std::vector<std::uint8_t> x;  // x[n-1] = X_n
  /// Last coordinate where the chains differ, 0 if they never do.
  std::uint64_t last_mismatch = 0;
  /// First block after which every block agrees; empty when the final
  /// simulated block still disagrees (censored at the horizon).
  std::optional<std::uint64_t> theta_block;
  std::optional<std::pair<std::vector<Symbol>, std::vector<Symbol>>> trajectories;
};

CoupledRun run_coupling(const PotentialModel& model, const History& y, const History& z, std::uint64_t n_blocks,
                        const BlockSchedule& schedule, const CouplingMode& mode, RngStream& rng,
                        bool keep_trajectories = false);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Replicate counts from many independent coupled runs. Integer counts make
/// the reduction independent of execution order.
struct CouplingCounts {
  std::uint64_t replicates = 0;
  std::uint64_t n_blocks = 0;
  std::uint64_t horizon = 0;                  // last simulated coordinate
  std::vector<std::uint64_t> block_fail;      // [n-1]: runs with X_n = 1
  std::vector<std::uint64_t> coord_mismatch;  // [k-1]: runs with eta_k != omega_k
  std::vector<std::uint64_t> theta_exceeds;   // [k-1]: runs whose last mismatch is >= k

  Estimate px(std::uint64_t n) const;
  Estimate mismatch(std::uint64_t k) const;
  Estimate theta_tail(std::uint64_t k) const;
};

/// Runs `replicates` coupled runs; replicate r uses rng.derive(r).
CouplingCounts simulate_coupling(const PotentialModel& model, const History& y, const History& z,
                                 std::uint64_t n_blocks, std::uint64_t replicates, const BlockSchedule& schedule,
                                 const CouplingMode& mode, const RngStream& rng, const ExecPolicy& policy = {});

/// P[X_n = 1] for n = 1..n_blocks.
std::vector<Estimate> estimate_px(const PotentialModel& model, const History& y, const History& z,
                                  std::uint64_t n_blocks, std::uint64_t replicates, const BlockSchedule& schedule,
                                  const CouplingMode& mode, const RngStream& rng, const ExecPolicy& policy = {});

/// P[eta_k != omega_k] for each listed coordinate; an upper estimate of the
/// single-coordinate distance L(k) for this pair of pasts.
std::vector<Estimate> estimate_L(const PotentialModel& model, const History& y, const History& z,
                                 const std::vector<std::uint64_t>& coords, std::uint64_t replicates,
                                 const BlockSchedule& schedule, const CouplingMode& mode, const RngStream& rng,
                                 const ExecPolicy& policy = {});

/// P[theta > k] for each listed coordinate, where theta - 1 is the last
/// mismatch seen up to the horizon (the end of the block containing max k).
std::vector<Estimate> estimate_M_tail(const PotentialModel& model, const History& y, const History& z,
                                      const std::vector<std::uint64_t>& coords, std::uint64_t replicates,
                                      const BlockSchedule& schedule, const CouplingMode& mode, const RngStream& rng,
                                      const ExecPolicy& policy = {});

}  // namespace gmix
