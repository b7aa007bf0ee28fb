#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gmix/history.hpp"
#include "gmix/potential.hpp"
#include "gmix/rng.hpp"

namespace gmix {

/// A sampled path eta_1..eta_n together with the past it started from.
struct Trajectory {
  History start_history;
  std::vector<Symbol> symbols;  // eta_1 first
};

/// Draws the next symbol of a chain whose past is `ctx`. `scratch` must hold
/// at least model.support_size() doubles.
Symbol sample_next(const PotentialModel& model, const ContextView& ctx, RngStream& rng, std::span<double> scratch);

/// Appends `n` symbols to `path`, each drawn from the kernel at the past
/// formed by `start` followed by everything already in `path`.
void extend_path(const PotentialModel& model, const History& start, std::vector<Symbol>& path, std::size_t n,
                 RngStream& rng);

Trajectory sample_path(const PotentialModel& model, const History& y, std::size_t n, RngStream& rng);

/// The past all stationary runs start from: every coordinate equal to 0.
History reference_history();

/// Approximate draw from the stationary law: runs burn_in + n steps from
/// reference_history() and keeps the last n. The start of the returned
/// trajectory is the realized past (burn-in symbols on top of the reference).
/// The bias on any single coordinate is at most the relaxation bound at
/// lag burn_in.
Trajectory sample_stationary(const PotentialModel& model, std::size_t burn_in, std::size_t n, RngStream& rng);

/// Same as sample_stationary but returns only the symbols; avoids copying the
/// burn-in into a History.
std::vector<Symbol> sample_stationary_symbols(const PotentialModel& model, std::size_t burn_in, std::size_t n,
                                              RngStream& rng);

}  // namespace gmix
