#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gmix/coupling.hpp"
#include "gmix/potential.hpp"

namespace gmix {

/// Range sums of chi2_j for a regularity profile, exact on a prefix of
/// explicitly summed terms and Euler-Maclaurin beyond it.
class Chi2Sums {
 public:
  static constexpr std::uint64_t kInfinite = std::numeric_limits<std::uint64_t>::max();

  explicit Chi2Sums(const RegularityProfile& profile, std::uint64_t explicit_terms = 1u << 20);

  /// sum_{j=from}^{to} chi2_j, `to` inclusive (kInfinite for the full tail).
  double sum(std::uint64_t from, std::uint64_t to) const;
  /// sum_{j>=from} chi2_j.
  double tail(std::uint64_t from) const;
  const RegularityProfile& profile() const { return profile_; }

 private:
  double power_tail(std::uint64_t from) const;  // C * sum_{j>=from} j^{-(1+delta)}, from > limit_

  RegularityProfile profile_;
  std::uint64_t limit_;
  std::vector<double> suffix_;  // suffix_[j] = sum_{i=j}^{limit_} chi2_i, j in [1, limit_ + 1]
  bool power_law_tail_;
};

/// Upper bound on q_k^n: the probability that block n fails given that the
/// k previous blocks succeeded. Minimum of the Pinsker bound on the block KL
/// divergence and the Bretagnolle-Huber ceiling.
double q_bound(const Chi2Sums& sums, const BlockSchedule& schedule, std::uint64_t n, std::uint64_t k);
double q_bound(const RegularityProfile& profile, const BlockSchedule& schedule, std::uint64_t n, std::uint64_t k);

/// Bretagnolle-Huber ceilings: for k = 0 (pasts unrelated, includes chi2_0)
/// and for k >= 1.
double bret_ceiling_zero(const Chi2Sums& sums);
double bret_ceiling(const Chi2Sums& sums);

struct BSeqOptions {
  /// For beta > 1, sup_n q_k^n is scanned on n in [k+1, k+scan_width]; larger
  /// n are covered by the monotone integral majorant.
  std::uint64_t scan_width = 1000;
};

/// Dominating failure probabilities b_0..b_K (non-increasing, all < 1).
std::vector<double> b_seq(const Chi2Sums& sums, const BlockSchedule& schedule, std::size_t K,
                          const BSeqOptions& options = {});
std::vector<double> b_seq(const RegularityProfile& profile, const BlockSchedule& schedule, std::size_t K,
                          const BSeqOptions& options = {});

/// Closed-form majorant sqrt(3 C 2^beta 4^delta beta / (delta k^{delta beta + 1})), k >= 3.
double b_majorant(const RegularityProfile& profile, double beta, std::uint64_t k);

/// f_i = b_{i-1} prod_{l<i-1} (1 - b_l); returned with f[0] = 0 so f[i] = f_i.
std::vector<double> f_seq(const std::vector<double>& b);

/// u_0 = 1, u_n = sum_{k=1}^n f_k u_{n-k}, n <= N; f[0] is ignored and f_k = 0
/// past the end of the vector.
std::vector<double> renewal_u(const std::vector<double>& f, std::size_t N);

/// The bound pipeline for one profile and block exponent: b, f and u up to
/// N blocks plus the tail information needed by the corollary bounds.
class BoundPipeline {
 public:
  BoundPipeline(const RegularityProfile& profile, double beta, std::size_t N, const BSeqOptions& options = {});

  const RegularityProfile& profile() const { return sums_.profile(); }
  const BlockSchedule& schedule() const { return schedule_; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<double>& f() const { return f_; }
  /// u[n] bounds P[X_n = 1] for the block-maximal coupling.
  const std::vector<double>& u() const { return u_; }
  /// Bretagnolle-Huber ceiling used for k >= 1.
  double eps_floor() const { return ceiling_; }
  /// Lower bound on prod_{k>=0} (1 - b_k) = 1 - sum_k f_k.
  double survival_lower() const { return survival_lower_; }

  /// Bound on L(k): u at the block containing coordinate k.
  double corollary1(std::uint64_t k) const;
  /// Bound on P[theta > k]: sum of u_j over j >= block containing k.
  double corollary2(std::uint64_t k) const;

 private:
  Chi2Sums sums_;
  BlockSchedule schedule_;
  std::vector<double> b_;
  std::vector<double> f_;
  std::vector<double> u_;
  std::vector<double> u_prefix_;  // u_prefix_[n] = sum_{j<n} u_j
  double ceiling_ = 0.0;
  double survival_lower_ = 1.0;
};

/// Throws DomainError unless beta >= 1 and beta > 1/delta (zero profiles are
/// exempt). Returns u_0..u_N.
std::vector<double> theorem1_bound(const RegularityProfile& profile, double beta, std::size_t N,
                                   const BSeqOptions& options = {});
double corollary1_bound(const RegularityProfile& profile, double beta, std::uint64_t k);
double corollary2_bound(const RegularityProfile& profile, double beta, std::uint64_t k);

/// Delta_k^n = (n^b - (n-k)^b - 2)^{-d} - ((n+1)^b - (n-k)^b)^{-d}.
double delta_nk(double delta, double beta, std::uint64_t k, std::uint64_t n);

struct LemmaReport {
  bool pass = true;
  /// Smallest slack seen (negative means a violation), and where.
  double worst_margin = std::numeric_limits<double>::infinity();
  std::string worst_case;
  std::uint64_t checks = 0;
};

struct LemmaGrid {
  std::vector<double> deltas{0.6, 1.0, 1.5, 2.0};
  std::vector<double> betas{1.0, 1.5, 2.0, 4.0};
  std::uint64_t k_min = 3;
  std::uint64_t k_max = 50;
  std::uint64_t n_max = 500;
};

/// Delta_k^n is non-increasing in n on the grid.
LemmaReport validate_hj1(const LemmaGrid& grid);
/// Delta_k^{k+1} <= 6 2^beta 4^delta beta / k^{delta beta + 1} on the grid.
LemmaReport validate_hj2(const LemmaGrid& grid);
/// ((b+1)^a - x^a)/(b^a - x^a) >= ((b+1)^{a-1} - x^{a-1})/(b^{a-1} - x^{a-1}) for alpha > 1, 0 < a < b.
bool check_lemalg(double alpha, double a, double b);
/// Relative slack lhs / rhs - 1 of the inequality above.
double lemalg_margin(double alpha, double a, double b);

struct SlopeFit {
  double slope = 0.0;
  double r2 = 0.0;
};

/// Least-squares slope of log seq[n] against log n for integer n in [lo, hi].
SlopeFit fit_decay_slope(const std::vector<double>& seq, std::size_t lo, std::size_t hi);
/// Same on explicit (x, y) points.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gmix
