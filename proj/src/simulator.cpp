#include "gmix/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "gmix/divergence.hpp"
#include "gmix/error.hpp"

namespace gmix {

Symbol sample_next(const PotentialModel& model, const ContextView& ctx, RngStream& rng, std::span<double> scratch) {
  if (model.kind() == ModelKind::long_memory) {
    // Binary fast path: one comparison against g(1 | past).
    const double p1 = std::exp(model.log_prob(1, ctx));
    return rng.uniform() < p1 ? 1 : 0;
  }
  const std::size_t support = model.support_size();
  const std::span<double> probs = scratch.first(support);
  model.conditional(ctx, probs);
  double total = 0.0;
  for (double p : probs) total += p;
  return static_cast<Symbol>(sample_index(probs, rng.uniform() * total));
}

void extend_path(const PotentialModel& model, const History& start, std::vector<Symbol>& path, std::size_t n,
                 RngStream& rng) {
  std::vector<double> scratch(model.support_size());
  path.reserve(path.size() + n);
  for (std::size_t i = 0; i < n; ++i) {
    const ContextView ctx(start, path);
    path.push_back(sample_next(model, ctx, rng, scratch));
  }
}

Trajectory sample_path(const PotentialModel& model, const History& y, std::size_t n, RngStream& rng) {
  if (n < 1) throw DomainError("simulator", "path length must be >= 1");
  y.validate(model.alphabet());
  Trajectory t{y, {}};
  extend_path(model, t.start_history, t.symbols, n, rng);
  return t;
}

History reference_history() { return History({}, 0); }

std::vector<Symbol> sample_stationary_symbols(const PotentialModel& model, std::size_t burn_in, std::size_t n,
                                              RngStream& rng) {
  if (n < 1) throw DomainError("simulator", "path length must be >= 1");
  const History start = reference_history();
  std::vector<Symbol> path;
  extend_path(model, start, path, burn_in + n, rng);
  path.erase(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(burn_in));
  return path;
}

Trajectory sample_stationary(const PotentialModel& model, std::size_t burn_in, std::size_t n, RngStream& rng) {
  if (n < 1) throw DomainError("simulator", "path length must be >= 1");
  const History start = reference_history();
  std::vector<Symbol> path;
  extend_path(model, start, path, burn_in + n, rng);
  std::vector<Symbol> past(path.rbegin() + static_cast<std::ptrdiff_t>(n), path.rend());
  std::vector<Symbol> kept(path.end() - static_cast<std::ptrdiff_t>(n), path.end());
  return Trajectory{History(std::move(past), start.tail_symbol()), std::move(kept)};
}

}  // namespace gmix
