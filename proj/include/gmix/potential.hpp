#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "gmix/history.hpp"
#include "gmix/rng.hpp"

namespace gmix {

/// Upper bounds on the chi-square variation chi2_k of a potential.
///
/// chi2_k is the worst Pearson chi-square divergence between the one-step
/// kernels at two pasts sharing their k most recent symbols. The bounds come
/// either from the power law C / k^(1+delta) or from an explicit table.
/// Index 0 (pasts with nothing in common) is carried separately because the
/// power law is singular there.
struct RegularityProfile {
  double chi2_C = 0.0;
  double chi2_delta = 1.0;
  /// Bound on chi2_0. When absent, C is used (the power law evaluated at k = 1).
  std::optional<double> chi2_zero;
  /// explicit_chi2[k-1] bounds chi2_k.
  std::vector<double> explicit_chi2;
  /// When true the explicit table is complete: chi2_k = 0 past its end.
  /// Otherwise the power law takes over.
  bool explicit_exhaustive = false;
  /// explicit_var[k-1] bounds var_k(e^phi).
  std::vector<double> explicit_var;

  double chi2_at(std::size_t k) const;
  double var_at(std::size_t k) const;
  bool is_zero() const;

  /// Throws DomainError when a field breaks the profile invariants
  /// (negative values, increasing explicit tables, delta <= 0).
  void validate() const;
};

struct IIDParams {
  std::vector<double> p;
};

/// Finite-order Markov kernel. Row index of a context (x_{-1}, ..., x_{-m}) is
/// sum_i x_{-i} * |A|^(i-1); each row holds |A| probabilities.
struct MarkovParams {
  std::size_t alphabet_size = 2;
  std::size_t order = 1;
  std::vector<double> table;
};

/// Binary chain with g(1 | x) = 1/2 + eps0 * sum_{k<=K} w_k xi(x_{-k}),
/// xi(0) = -1, xi(1) = +1, w_k proportional to k^{-(3+delta)/2}.
struct LongMemoryParams {
  double eps0 = 0.2;
  double delta = 1.5;
  std::size_t k_max = 1000;
};

/// Poisson autoregression: next symbol ~ Poisson(lambda(x)) with
/// lambda(x) = exp(sum_{i<=cutoff} beta_i * min(x_{-i}, gamma_i)).
struct PoissonARParams {
  std::vector<double> beta;          // beta_1..beta_cutoff
  std::vector<std::uint32_t> gamma;  // gamma_1..gamma_cutoff
  double tail_mass_tol = 1e-12;
  double delta = 0.5;  // decay exponent reported in the regularity profile
};

enum class ModelKind { iid, markov, long_memory, poisson_ar };

std::string_view to_string(ModelKind kind);

/// A normalized potential phi together with its kernel g = e^phi.
///
/// Immutable after construction. `conditional` is the simulation hot path and
/// writes the one-step law over the (possibly truncated) support.
class PotentialModel {
 public:
  static PotentialModel iid(std::vector<double> p);
  static PotentialModel markov(std::size_t alphabet_size, std::size_t order, std::vector<double> table);
  static PotentialModel long_memory(double eps0, double delta, std::size_t k_max);
  static PotentialModel poisson_ar(std::vector<double> beta, std::vector<std::uint32_t> gamma,
                                   double tail_mass_tol, double delta);

  ModelKind kind() const;
  const Alphabet& alphabet() const { return alphabet_; }
  /// Number of past symbols the kernel reads; the long-memory and Poisson
  /// models are finite-range only through their cutoffs.
  std::size_t memory_order() const { return memory_; }
  /// Size of the support `conditional` writes: |A| for finite alphabets,
  /// truncation point + 1 for the Poisson model.
  std::size_t support_size() const { return support_; }
  const RegularityProfile& regularity() const { return profile_; }

  void conditional(const ContextView& ctx, std::span<double> out) const;
  double log_prob(Symbol a, const ContextView& ctx) const;

  template <class P>
  const P* params() const { return std::get_if<P>(&params_); }

  /// Poisson intensity at a context. Only valid for the Poisson model.
  double poisson_lambda(const ContextView& ctx) const;
  /// S = sum_i |beta_i| gamma_i for the Poisson model.
  double poisson_S() const { return poisson_S_; }

  /// Long-memory helpers: w_k and T_k = sum_{j>k} w_j.
  double weight(std::size_t k) const { return weights_[k]; }
  double weight_tail(std::size_t k) const { return k < tails_.size() ? tails_[k] : 0.0; }

 private:
  using Params = std::variant<IIDParams, MarkovParams, LongMemoryParams, PoissonARParams>;
  PotentialModel(Params params, Alphabet alphabet);
  void finish();
  std::size_t markov_row(const ContextView& ctx) const;
  double long_memory_prob_one(const ContextView& ctx) const;

  Params params_;
  Alphabet alphabet_;
  std::size_t memory_ = 0;
  std::size_t support_ = 0;
  RegularityProfile profile_;
  std::vector<double> weights_;   // long memory: weights_[k], k = 1..K (index 0 unused)
  std::vector<double> prefix_w_;  // long memory: sum_{j<=k} w_j
  std::vector<double> tails_;     // long memory: sum_{j>k} w_j
  double poisson_S_ = 0.0;
};

/// phi(a . x); -infinity when the kernel gives a zero probability.
double log_prob(const PotentialModel& model, Symbol a, const History& x);

/// Upper bound on chi2_k(phi), k >= 0 (k = 0: pasts share nothing).
double chi2_upper(const PotentialModel& model, std::size_t k);

/// Lower estimate of chi2_k obtained by evaluating the defining supremum on
/// `n_contexts` random context triples plus the model's extreme contexts.
double chi2_empirical(const PotentialModel& model, std::size_t k, std::size_t n_contexts, RngStream& rng);

/// Upper bound on var_k(e^phi) = sup sum_b |g(b|zx) - g(b|zy)|.
double var_upper(const PotentialModel& model, std::size_t k);

/// Upper bound on var_k(phi) = sup sum_b |phi(bzx) - phi(bzy)|; infinite for
/// the Poisson model.
double var_log_upper(const PotentialModel& model, std::size_t k);

/// |sum_a e^{phi(a.x)} - 1| over the model support.
double normalization_error(const PotentialModel& model, const History& x);

/// Poisson quantile: smallest c with P[Poisson(lambda) > c] <= tail_mass.
std::size_t poisson_quantile(double lambda, double tail_mass);

}  // namespace gmix
