#include "gmix/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gmix/error.hpp"

namespace gmix {

namespace {

// The kernel of an IID or Markov model as a table over context rows.
struct KernelTable {
  std::size_t alphabet = 0;
  std::size_t order = 0;
  std::size_t rows = 1;
  const std::vector<double>* table = nullptr;

  const double* row(std::size_t r) const { return table->data() + r * alphabet; }
  std::size_t next(std::size_t r, std::size_t a) const {
    if (order == 0) return 0;
    return a + alphabet * (r % (rows / alphabet));
  }
  std::size_t initial(const History& h) const {
    std::size_t r = 0;
    std::size_t scale = 1;
    for (std::size_t i = 1; i <= order; ++i) {
      r += h.lookup(i) * scale;
      scale *= alphabet;
    }
    return r;
  }
};

KernelTable kernel_table(const PotentialModel& model, const OracleLimits& limits) {
  KernelTable k;
  if (const auto* p = model.params<IIDParams>()) {
    k.alphabet = p->p.size();
    k.table = &p->p;
  } else if (const auto* m = model.params<MarkovParams>()) {
    k.alphabet = m->alphabet_size;
    k.order = m->order;
    k.table = &m->table;
    for (std::size_t i = 0; i < m->order; ++i) k.rows *= m->alphabet_size;
  } else {
    throw DomainError("oracle", "exact computations need an IID or finite-order Markov model");
  }
  if (k.rows > limits.max_states)
    throw CapacityError("oracle", std::to_string(k.rows) + " context states exceed max_states = " +
                                      std::to_string(limits.max_states));
  return k;
}

struct BlockOutcome {
  double prob;
  std::size_t word;       // block symbols, first coordinate most significant
  std::size_t final_row;  // context after the block
};

void enumerate_block(const KernelTable& k, std::size_t row, std::size_t len, std::size_t depth, double prob,
                     std::size_t word, std::vector<BlockOutcome>& out) {
  if (depth == len) {
    out.push_back({prob, word, row});
    return;
  }
  const double* g = k.row(row);
  for (std::size_t a = 0; a < k.alphabet; ++a) {
    if (g[a] == 0.0) continue;
    enumerate_block(k, k.next(row, a), len, depth + 1, prob * g[a], word * k.alphabet + a, out);
  }
}

struct JointOutcome {
  double prob;
  std::size_t eta_word;
  std::size_t omega_word;
  std::size_t next_state;  // joint context row
  int last_diff;           // last block position (0-based) where the words differ, -1 if equal
};

// Joint law of one block under the maximal coupling, from joint state (r, s).
std::vector<JointOutcome> coupled_block(const KernelTable& k, std::size_t r, std::size_t s, std::size_t len) {
  std::vector<BlockOutcome> p_out;
  std::vector<BlockOutcome> q_out;
  enumerate_block(k, r, len, 0, 1.0, 0, p_out);
  enumerate_block(k, s, len, 0, 1.0, 0, q_out);
  std::size_t words = 1;
  for (std::size_t i = 0; i < len; ++i) words *= k.alphabet;
  std::vector<double> p(words, 0.0), q(words, 0.0);
  std::vector<std::size_t> p_row(words, 0), q_row(words, 0);
  for (const auto& o : p_out) {
    p[o.word] = o.prob;
    p_row[o.word] = o.final_row;
  }
  for (const auto& o : q_out) {
    q[o.word] = o.prob;
    q_row[o.word] = o.final_row;
  }
  double q_excess = 0.0;
  for (std::size_t w = 0; w < words; ++w) q_excess += std::max(q[w] - p[w], 0.0);

  auto last_diff = [&](std::size_t a, std::size_t b) {
    int last = -1;
    for (std::size_t i = len; i-- > 0;) {
      if (a % k.alphabet != b % k.alphabet) {
        last = static_cast<int>(i);
        break;
      }
      a /= k.alphabet;
      b /= k.alphabet;
    }
    return last;
  };

  std::vector<JointOutcome> out;
  for (std::size_t w = 0; w < words; ++w) {
    const double common = std::min(p[w], q[w]);
    if (common > 0.0) out.push_back({common, w, w, p_row[w] * k.rows + q_row[w], -1});
  }
  if (q_excess > 0.0) {
    for (std::size_t w = 0; w < words; ++w) {
      const double pe = p[w] - q[w];
      if (pe <= 0.0) continue;
      for (std::size_t v = 0; v < words; ++v) {
        const double qe = q[v] - p[v];
        if (qe <= 0.0) continue;
        out.push_back({pe * qe / q_excess, w, v, p_row[w] * k.rows + q_row[v], last_diff(w, v)});
      }
    }
  }
  return out;
}

}  // namespace

Dist exact_marginal(const PotentialModel& model, const History& y, std::uint64_t n, const OracleLimits& limits) {
  if (n < 1) throw DomainError("oracle", "coordinate must be >= 1");
  y.validate(model.alphabet());
  const KernelTable k = kernel_table(model, limits);
  std::vector<double> pi(k.rows, 0.0), next(k.rows, 0.0);
  pi[k.initial(y)] = 1.0;
  for (std::uint64_t t = 1;; ++t) {
    if (t == n) {
      std::vector<double> law(k.alphabet, 0.0);
      for (std::size_t r = 0; r < k.rows; ++r) {
        if (pi[r] == 0.0) continue;
        for (std::size_t a = 0; a < k.alphabet; ++a) law[a] += pi[r] * k.row(r)[a];
      }
      double s = 0.0;
      for (double v : law) s += v;
      for (double& v : law) v /= s;
      return Dist(std::move(law));
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < k.rows; ++r) {
      if (pi[r] == 0.0) continue;
      for (std::size_t a = 0; a < k.alphabet; ++a) next[k.next(r, a)] += pi[r] * k.row(r)[a];
    }
    pi.swap(next);
  }
}

double exact_tv_coordinate(const PotentialModel& model, const History& y, const History& z, std::uint64_t n,
                           const OracleLimits& limits) {
  return tv(exact_marginal(model, y, n, limits), exact_marginal(model, z, n, limits));
}

BlockCouplingExact exact_block_coupling(const PotentialModel& model, const History& y, const History& z,
                                        const BlockSchedule& schedule, std::uint64_t n_max,
                                        const OracleLimits& limits) {
  if (n_max < 1) throw DomainError("oracle", "need at least one block");
  y.validate(model.alphabet());
  z.validate(model.alphabet());
  const KernelTable k = kernel_table(model, limits);
  const std::size_t joint = k.rows * k.rows;
  const std::uint64_t horizon = schedule.boundary(n_max + 1) - 1;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const double words = std::pow(static_cast<double>(k.alphabet), static_cast<double>(block_bounds(schedule, n).length()));
    if (static_cast<double>(joint) * words * words > static_cast<double>(limits.max_joint_work))
      throw CapacityError("oracle", "exact block coupling of block " + std::to_string(n) +
                                        " exceeds max_joint_work = " + std::to_string(limits.max_joint_work));
  }

  BlockCouplingExact out;
  out.px.assign(n_max, 0.0);
  out.mismatch.assign(horizon, 0.0);
  out.theta_tail.assign(horizon, 0.0);

  // Forward pass: law of the joint context at the start of every block.
  std::vector<std::vector<double>> start_law(n_max + 1, std::vector<double>(joint, 0.0));
  start_law[1][k.initial(y) * k.rows + k.initial(z)] = 1.0;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const BlockRange b = block_bounds(schedule, n);
    std::vector<double> next(joint, 0.0);
    for (std::size_t st = 0; st < joint; ++st) {
      const double mass = start_law[n][st];
      if (mass == 0.0) continue;
      for (const auto& o : coupled_block(k, st / k.rows, st % k.rows, b.length())) {
        const double w = mass * o.prob;
        if (n < n_max) next[o.next_state] += w;
        if (o.last_diff < 0) continue;
        out.px[n - 1] += w;
        std::size_t a = o.eta_word;
        std::size_t c = o.omega_word;
        for (std::size_t i = b.length(); i-- > 0;) {
          if (a % k.alphabet != c % k.alphabet) out.mismatch[b.begin + i - 1] += w;
          a /= k.alphabet;
          c /= k.alphabet;
        }
      }
    }
    if (n < n_max) start_law[n + 1] = std::move(next);
  }

  // Backward pass: calm[st] = P[no mismatch in later blocks | joint context].
  std::vector<double> calm(joint, 1.0);
  for (std::uint64_t n = n_max; n >= 1; --n) {
    const BlockRange b = block_bounds(schedule, n);
    const std::size_t len = b.length();
    std::vector<double> calm_here(joint, 0.0);
    // agree_from[j] accumulates P[no mismatch at block position >= j and later].
    std::vector<double> agree_from(len, 0.0);
    for (std::size_t st = 0; st < joint; ++st) {
      const double mass = start_law[n][st];
      for (const auto& o : coupled_block(k, st / k.rows, st % k.rows, len)) {
        const double cont = o.prob * calm[o.next_state];
        if (o.last_diff < 0) calm_here[st] += cont;
        if (mass == 0.0) continue;
        for (std::size_t j = static_cast<std::size_t>(o.last_diff + 1); j < len; ++j) agree_from[j] += mass * cont;
      }
    }
    for (std::size_t j = 0; j < len; ++j) out.theta_tail[b.begin + j - 1] = std::max(0.0, 1.0 - agree_from[j]);
    calm.swap(calm_here);
  }
  return out;
}

std::vector<double> exact_block_coupling_fail(const PotentialModel& model, const History& y, const History& z,
                                              const BlockSchedule& schedule, std::uint64_t n_max,
                                              const OracleLimits& limits) {
  return exact_block_coupling(model, y, z, schedule, n_max, limits).px;
}

namespace {

std::vector<double> stationary_rows(const KernelTable& k) {
  std::vector<double> pi(k.rows, 1.0 / static_cast<double>(k.rows)), next(k.rows);
  for (int iter = 0; iter < 1'000'000; ++iter) {
    // Lazy chain (I + P) / 2: same stationary law, no periodicity issues.
    for (std::size_t r = 0; r < k.rows; ++r) next[r] = 0.5 * pi[r];
    for (std::size_t r = 0; r < k.rows; ++r)
      for (std::size_t a = 0; a < k.alphabet; ++a) next[k.next(r, a)] += 0.5 * pi[r] * k.row(r)[a];
    double change = 0.0;
    for (std::size_t r = 0; r < k.rows; ++r) change += std::abs(next[r] - pi[r]);
    pi.swap(next);
    if (change < 1e-15) break;
  }
  return pi;
}

// Law of the last emitted symbol given the stationary context law.
std::vector<double> symbol_law(const KernelTable& k, const std::vector<double>& pi) {
  std::vector<double> law(k.alphabet, 0.0);
  for (std::size_t r = 0; r < k.rows; ++r)
    for (std::size_t a = 0; a < k.alphabet; ++a) law[a] += pi[r] * k.row(r)[a];
  return law;
}

}  // namespace

Dist exact_stationary_symbol(const PotentialModel& model, const OracleLimits& limits) {
  const KernelTable k = kernel_table(model, limits);
  std::vector<double> law = symbol_law(k, stationary_rows(k));
  double s = 0.0;
  for (double v : law) s += v;
  for (double& v : law) v /= s;
  return Dist(std::move(law));
}

double exact_covariance(const PotentialModel& model, const std::vector<double>& f, const std::vector<double>& g,
                        std::size_t lag, const OracleLimits& limits) {
  const KernelTable k = kernel_table(model, limits);
  if (f.size() != k.alphabet || g.size() != k.alphabet)
    throw DomainError("oracle", "observable tables must have one value per symbol");
  const std::vector<double> pi = stationary_rows(k);
  // Joint weights over (context after emitting eta_0) carrying f(eta_0).
  std::vector<double> w(k.rows, 0.0), next(k.rows);
  double mean_f = 0.0;
  for (std::size_t r = 0; r < k.rows; ++r)
    for (std::size_t a = 0; a < k.alphabet; ++a) {
      const double p = pi[r] * k.row(r)[a];
      w[k.next(r, a)] += p * f[a];
      mean_f += p * f[a];
    }
  if (lag == 0) {
    const std::vector<double> law = symbol_law(k, pi);
    double e_fg = 0.0, mean_g = 0.0;
    for (std::size_t a = 0; a < k.alphabet; ++a) {
      e_fg += law[a] * f[a] * g[a];
      mean_g += law[a] * g[a];
    }
    return e_fg - mean_f * mean_g;
  }
  // Advance lag - 1 steps, then weight the emitted eta_lag by g.
  for (std::size_t s = 1; s < lag; ++s) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < k.rows; ++r)
      for (std::size_t a = 0; a < k.alphabet; ++a) next[k.next(r, a)] += w[r] * k.row(r)[a];
    w.swap(next);
  }
  double e_fg = 0.0;
  for (std::size_t r = 0; r < k.rows; ++r)
    for (std::size_t a = 0; a < k.alphabet; ++a) e_fg += w[r] * k.row(r)[a] * g[a];
  double mean_g = 0.0;
  const std::vector<double> law = symbol_law(k, pi);
  for (std::size_t a = 0; a < k.alphabet; ++a) mean_g += law[a] * g[a];
  return e_fg - mean_f * mean_g;
}

}  // namespace gmix
