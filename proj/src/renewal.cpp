#include "gmix/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gmix/error.hpp"

namespace gmix {

namespace {

// Compensated (Neumaier) running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// sum_{j>=a} j^{-s}, s > 1, by Euler-Maclaurin; accurate to O(a^{-s-5}).
double zeta_tail(double a, double s) {
  return std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s) + s * std::pow(a, -s - 1.0) / 12.0 -
         s * (s + 1.0) * (s + 2.0) * std::pow(a, -s - 3.0) / 720.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Chi2Sums

Chi2Sums::Chi2Sums(const RegularityProfile& profile, std::uint64_t explicit_terms) : profile_(profile) {
  profile_.validate();
  const std::size_t table = profile_.explicit_chi2.size();
  const bool exhaustive_table = profile_.explicit_exhaustive && table > 0;
  power_law_tail_ = !exhaustive_table && profile_.chi2_C > 0.0;
  limit_ = power_law_tail_ ? std::max<std::uint64_t>(explicit_terms, table) : table;
  suffix_.assign(limit_ + 2, 0.0);
  for (std::uint64_t j = limit_; j >= 1; --j) suffix_[j] = suffix_[j + 1] + profile_.chi2_at(j);
}

double Chi2Sums::power_tail(std::uint64_t from) const {
  if (!power_law_tail_) return 0.0;
  return profile_.chi2_C * zeta_tail(static_cast<double>(from), 1.0 + profile_.chi2_delta);
}

double Chi2Sums::tail(std::uint64_t from) const {
  if (from == 0) return profile_.chi2_at(0) + tail(1);
  if (from <= limit_) return suffix_[from] + power_tail(limit_ + 1);
  return power_tail(from);
}

double Chi2Sums::sum(std::uint64_t from, std::uint64_t to) const {
  if (to == kInfinite) return tail(from);
  if (to < from) return 0.0;
  if (from == 0) return profile_.chi2_at(0) + sum(1, to);
  double s = 0.0;
  if (to <= limit_)
    s = suffix_[from] - suffix_[to + 1];
  else if (from > limit_)
    s = power_tail(from) - power_tail(to + 1);
  else
    s = (suffix_[from] + power_tail(limit_ + 1)) - power_tail(to + 1);
  return std::max(0.0, s);
}

// ---------------------------------------------------------------------------
// q, b, f, u

double bret_ceiling_zero(const Chi2Sums& sums) { return std::sqrt(-std::expm1(-sums.tail(0))); }
double bret_ceiling(const Chi2Sums& sums) { return std::sqrt(-std::expm1(-sums.tail(1))); }

namespace {

double pinsker_part(const Chi2Sums& sums, const BlockSchedule& schedule, std::uint64_t n, std::uint64_t k) {
  const std::uint64_t begin = schedule.boundary(n);
  const std::uint64_t end = schedule.boundary(n + 1);
  const std::uint64_t base = k == 0 ? begin : schedule.boundary(n - k);
  return std::sqrt(0.5 * sums.sum(begin - base, end - 1 - base));
}

}  // namespace

double q_bound(const Chi2Sums& sums, const BlockSchedule& schedule, std::uint64_t n, std::uint64_t k) {
  if (n < 1 || (k > 0 && k > n - 1))
    throw DomainError("renewal", "q bound needs n >= 1 and k = 0 or 1 <= k <= n-1 (n = " + std::to_string(n) +
                                     ", k = " + std::to_string(k) + ")");
  const double ceiling = k == 0 ? bret_ceiling_zero(sums) : bret_ceiling(sums);
  return std::min({1.0, ceiling, pinsker_part(sums, schedule, n, k)});
}

double q_bound(const RegularityProfile& profile, const BlockSchedule& schedule, std::uint64_t n, std::uint64_t k) {
  return q_bound(Chi2Sums(profile, 1u << 16), schedule, n, k);
}

double b_majorant(const RegularityProfile& profile, double beta, std::uint64_t k) {
  const double d = profile.chi2_delta;
  const double kk = static_cast<double>(k);
  return std::sqrt(3.0 * profile.chi2_C * std::pow(2.0, beta) * std::pow(4.0, d) * beta /
                   (d * std::pow(kk, d * beta + 1.0)));
}

namespace {

// Any n >= k+1 is covered: q_k^n^2 <= C Delta_k^n / (2 delta) and Delta is
// non-increasing in n.
double integral_bound(const RegularityProfile& profile, double beta, std::uint64_t k, std::uint64_t n) {
  return std::sqrt(profile.chi2_C * delta_nk(profile.chi2_delta, beta, k, n) / (2.0 * profile.chi2_delta));
}

// An upper bound on b_k for k >= 3 that costs O(1).
double b_cheap(const Chi2Sums& sums, const BlockSchedule& schedule, std::uint64_t k, double ceiling) {
  if (sums.tail(k) == 0.0) return 0.0;
  if (schedule.beta() == 1.0) return std::min(ceiling, std::sqrt(0.5 * sums.sum(k, k)));
  const RegularityProfile& p = sums.profile();
  return std::min({ceiling, b_majorant(p, schedule.beta(), k), integral_bound(p, schedule.beta(), k, k + 1)});
}

}  // namespace

std::vector<double> b_seq(const Chi2Sums& sums, const BlockSchedule& schedule, std::size_t K,
                          const BSeqOptions& options) {
  if (options.scan_width < 1) throw DomainError("renewal", "scan_width must be >= 1");
  const double ceiling = bret_ceiling(sums);
  const RegularityProfile& profile = sums.profile();
  const double beta = schedule.beta();
  std::vector<double> b(K + 1, 0.0);
  for (std::size_t k = 0; k <= K; ++k) {
    double v = 0.0;
    if (k == 0) {
      v = bret_ceiling_zero(sums);
    } else if (k <= 2) {
      v = ceiling;
    } else if (sums.tail(k) == 0.0) {
      v = 0.0;
    } else if (beta == 1.0) {
      // Blocks are single coordinates, so q_k^n does not depend on n.
      v = std::min(ceiling, pinsker_part(sums, schedule, k + 1, k));
    } else {
      double scanned = 0.0;
      const std::uint64_t last = k + options.scan_width;
      for (std::uint64_t n = k + 1; n <= last; ++n) scanned = std::max(scanned, pinsker_part(sums, schedule, n, k));
      const double beyond = integral_bound(profile, beta, k, last + 1);
      v = std::min({ceiling, std::max(scanned, beyond), b_majorant(profile, beta, k)});
    }
    if (k > 0) v = std::min(v, b[k - 1]);
    if (!(v < 1.0))
      throw PipelineError("renewal", "no coupling guarantee: b_" + std::to_string(k) +
                                         " reached 1 (the chi2 series is not summable enough)");
    b[k] = v;
  }
  return b;
}

std::vector<double> b_seq(const RegularityProfile& profile, const BlockSchedule& schedule, std::size_t K,
                          const BSeqOptions& options) {
  return b_seq(Chi2Sums(profile), schedule, K, options);
}

std::vector<double> f_seq(const std::vector<double>& b) {
  std::vector<double> f(b.size() + 1, 0.0);
  double survive = 1.0;
  for (std::size_t i = 1; i <= b.size(); ++i) {
    const double bi = b[i - 1];
    if (!(bi >= 0.0 && bi < 1.0))
      throw PipelineError("renewal", "no coupling guarantee: b_" + std::to_string(i - 1) +
                                         " is outside [0, 1) (epsilon floor violated)");
    f[i] = bi * survive;
    survive *= 1.0 - bi;
  }
  return f;
}

std::vector<double> renewal_u(const std::vector<double>& f, std::size_t N) {
  CompensatedSum mass;
  for (std::size_t k = 1; k < f.size(); ++k) {
    if (!(f[k] >= 0.0)) throw PipelineError("renewal", "f_" + std::to_string(k) + " is negative");
    mass.add(f[k]);
  }
  if (!(mass.value() < 1.0)) throw PipelineError("renewal", "sum of f_k must be < 1");
  std::vector<double> u(N + 1, 0.0);
  u[0] = 1.0;
  const std::size_t fmax = f.empty() ? 0 : f.size() - 1;
  for (std::size_t n = 1; n <= N; ++n) {
    CompensatedSum s;
    const std::size_t top = std::min(n, fmax);
    for (std::size_t k = 1; k <= top; ++k) s.add(f[k] * u[n - k]);
    u[n] = s.value();
  }
  return u;
}

// ---------------------------------------------------------------------------
// Pipeline

BoundPipeline::BoundPipeline(const RegularityProfile& profile, double beta, std::size_t N,
                             const BSeqOptions& options)
    : sums_(profile), schedule_(beta) {
  if (N < 1) throw DomainError("renewal", "pipeline needs N >= 1");
  ceiling_ = bret_ceiling(sums_);
  b_ = b_seq(sums_, schedule_, N - 1, options);
  f_ = f_seq(b_);
  u_ = renewal_u(f_, N);
  u_prefix_.assign(N + 2, 0.0);
  CompensatedSum acc;
  for (std::size_t n = 0; n <= N; ++n) {
    acc.add(u_[n]);
    u_prefix_[n + 1] = acc.value();
  }

  // prod_{k<N} (1 - b_k) explicitly; beyond N every b_k is bounded by
  // b_cheap, then by the closed-form majorant, and -log(1 - x) <= x / (1 - x_max).
  double log_survival = 0.0;
  for (double bk : b_) log_survival += std::log1p(-bk);
  const std::uint64_t explicit_end = static_cast<std::uint64_t>(N) + 1'000'000;
  CompensatedSum tail_b;
  double bmax = 0.0;
  for (std::uint64_t k = N; k <= explicit_end; ++k) {
    const double bk = k <= 2 ? (k == 0 ? bret_ceiling_zero(sums_) : ceiling_) : b_cheap(sums_, schedule_, k, ceiling_);
    bmax = std::max(bmax, bk);
    tail_b.add(bk);
  }
  double rest = 0.0;
  if (sums_.tail(explicit_end + 1) > 0.0) {
    const double s = (profile.chi2_delta * beta + 1.0) / 2.0;
    if (s <= 1.0) {
      rest = std::numeric_limits<double>::infinity();
    } else {
      // With unit blocks and the power law in force, b_k <= sqrt(C/2) k^{-s}
      // exactly; otherwise fall back to the closed-form majorant.
      const bool power_law_here = profile.explicit_chi2.size() <= explicit_end;
      const double c = beta == 1.0 && power_law_here ? std::sqrt(0.5 * profile.chi2_C) : b_majorant(profile, beta, 1);
      const double a = static_cast<double>(explicit_end + 1);
      rest = c * (std::pow(a, -s) + std::pow(a, 1.0 - s) / (s - 1.0));
      bmax = std::max(bmax, std::min(1.0, c * std::pow(a, -s)));
    }
  }
  const double tail_sum = tail_b.value() + rest;
  survival_lower_ = bmax < 1.0 ? std::exp(log_survival - tail_sum / (1.0 - bmax)) : 0.0;
}

double BoundPipeline::corollary1(std::uint64_t k) const {
  const std::uint64_t n = schedule_.block_of(k);
  if (n >= u_.size())
    throw DomainError("renewal", "coordinate " + std::to_string(k) + " lies beyond the pipeline horizon");
  return u_[n];
}

double BoundPipeline::corollary2(std::uint64_t k) const {
  const std::uint64_t n = schedule_.block_of(k);
  if (n >= u_prefix_.size())
    throw DomainError("renewal", "coordinate " + std::to_string(k) + " lies beyond the pipeline horizon");
  if (!(survival_lower_ > 0.0)) return 1.0;
  // sum_{j>=0} u_j = 1 / prod_k (1 - b_k).
  const double total = 1.0 / survival_lower_;
  return std::clamp(total - u_prefix_[n], 0.0, 1.0);
}

namespace {

void check_theorem_conditions(const RegularityProfile& profile, double beta) {
  if (!(beta >= 1.0)) throw DomainError("renewal", "block exponent beta must be >= 1");
  if (profile.is_zero()) return;
  if (!(beta * profile.chi2_delta > 1.0))
    throw DomainError("renewal", "the coupling bound requires beta > 1/delta (beta = " + std::to_string(beta) +
                                     ", delta = " + std::to_string(profile.chi2_delta) + ")");
}

}  // namespace

std::vector<double> theorem1_bound(const RegularityProfile& profile, double beta, std::size_t N,
                                   const BSeqOptions& options) {
  check_theorem_conditions(profile, beta);
  return BoundPipeline(profile, beta, N, options).u();
}

double corollary1_bound(const RegularityProfile& profile, double beta, std::uint64_t k) {
  check_theorem_conditions(profile, beta);
  const BlockSchedule schedule(beta);
  return BoundPipeline(profile, beta, schedule.block_of(k)).corollary1(k);
}

double corollary2_bound(const RegularityProfile& profile, double beta, std::uint64_t k) {
  check_theorem_conditions(profile, beta);
  const BlockSchedule schedule(beta);
  return BoundPipeline(profile, beta, schedule.block_of(k)).corollary2(k);
}

// ---------------------------------------------------------------------------
// Lemma helpers

double delta_nk(double delta, double beta, std::uint64_t k, std::uint64_t n) {
  if (!(delta > 0.0) || !(beta >= 1.0)) throw DomainError("renewal", "Delta needs delta > 0 and beta >= 1");
  if (k < 3 || n < k + 1) throw DomainError("renewal", "Delta needs k >= 3 and n >= k+1");
  using ld = long double;
  const ld nn = static_cast<ld>(n);
  const ld b = beta;
  const ld d = delta;
  const ld n_pow = std::pow(nn, b);
  // n^b - (n-k)^b and (n+1)^b - n^b without cancellation.
  const ld lower_gap = -n_pow * std::expm1(b * std::log1p(-static_cast<ld>(k) / nn));
  const ld step = n_pow * std::expm1(b * std::log1p(1.0L / nn));
  const ld x = lower_gap - 2.0L;
  if (!(x > 0.0L)) throw DomainError("renewal", "Delta undefined: n^beta - (n-k)^beta <= 2");
  const ld y = lower_gap + step;
  // x^{-d} - y^{-d} = x^{-d} (1 - (x/y)^d)
  const ld value = std::pow(x, -d) * -std::expm1(-d * std::log1p((y - x) / x));
  return static_cast<double>(value);
}

namespace {

void record(LemmaReport& r, double margin, const std::string& where) {
  ++r.checks;
  if (margin < r.worst_margin) {
    r.worst_margin = margin;
    r.worst_case = where;
  }
  if (margin < -1e-12) r.pass = false;
}

std::string grid_point(double delta, double beta, std::uint64_t k, std::uint64_t n) {
  std::ostringstream os;
  os << "delta=" << delta << " beta=" << beta << " k=" << k << " n=" << n;
  return os.str();
}

}  // namespace

LemmaReport validate_hj1(const LemmaGrid& grid) {
  LemmaReport r;
  for (double d : grid.deltas)
    for (double b : grid.betas)
      for (std::uint64_t k = grid.k_min; k <= grid.k_max; ++k) {
        double prev = delta_nk(d, b, k, k + 1);
        for (std::uint64_t n = k + 2; n <= grid.n_max; ++n) {
          const double cur = delta_nk(d, b, k, n);
          record(r, (prev - cur) / prev, grid_point(d, b, k, n));
          prev = cur;
        }
      }
  return r;
}

LemmaReport validate_hj2(const LemmaGrid& grid) {
  LemmaReport r;
  for (double d : grid.deltas)
    for (double b : grid.betas)
      for (std::uint64_t k = grid.k_min; k <= grid.k_max; ++k) {
        const double lhs = delta_nk(d, b, k, k + 1);
        const double rhs = 6.0 * std::pow(2.0, b) * std::pow(4.0, d) * b / std::pow(static_cast<double>(k), d * b + 1.0);
        record(r, 1.0 - lhs / rhs, grid_point(d, b, k, k + 1));
      }
  return r;
}

double lemalg_margin(double alpha, double a, double b) {
  if (!(alpha > 1.0) || !(a > 0.0) || !(a < b)) throw DomainError("renewal", "Lemalg needs alpha > 1 and 0 < a < b");
  // (c^p - a^p) / (d^p - a^p) = expm1(p log(c/a)) / expm1(p log(d/a)).
  auto ratio = [&](double p) {
    return std::expm1(p * std::log((b + 1.0) / a)) / std::expm1(p * std::log(b / a));
  };
  return ratio(alpha) / ratio(alpha - 1.0) - 1.0;
}

bool check_lemalg(double alpha, double a, double b) { return lemalg_margin(alpha, a, b) >= -1e-12; }

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("renewal", "slope fit needs at least two points");
  const std::size_t m = x.size();
  double sx = 0, sy = 0;
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("renewal", "slope fit needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / static_cast<double>(m);
  const double my = sy / static_cast<double>(m);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

SlopeFit fit_decay_slope(const std::vector<double>& seq, std::size_t lo, std::size_t hi) {
  if (lo < 1 || hi <= lo || hi >= seq.size()) throw DomainError("renewal", "invalid slope-fit range");
  std::vector<double> x, y;
  for (std::size_t n = lo; n <= hi; ++n) {
    x.push_back(static_cast<double>(n));
    y.push_back(seq[n]);
  }
  return fit_loglog(x, y);
}

}  // namespace gmix
