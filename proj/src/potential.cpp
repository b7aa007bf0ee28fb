#include "gmix/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gmix/error.hpp"

namespace gmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxMarkovRows = 1024;

double pearson_chi2(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) {
    if (q[b] <= 0.0) {
      if (p[b] > 0.0) return kInf;
      continue;
    }
    const double d = p[b] - q[b];
    s += d * d / q[b];
  }
  return s;
}

double l1_distance(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) s += std::abs(p[b] - q[b]);
  return s;
}

double log_l1_distance(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) {
    if (p[b] == 0.0 && q[b] == 0.0) continue;
    if (p[b] == 0.0 || q[b] == 0.0) return kInf;
    s += std::abs(std::log(p[b]) - std::log(q[b]));
  }
  return s;
}

double poisson_log_pmf(std::size_t b, double lambda) {
  return -lambda + static_cast<double>(b) * std::log(lambda) - std::lgamma(static_cast<double>(b) + 1.0);
}

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<std::size_t>::max() / base)
      throw CapacityError("alphabet", "context count overflows");
    r *= base;
  }
  return r;
}

// Worst-case discrepancy between Markov rows that agree on the k most recent
// symbols, measured by `metric`.
template <class Metric>
double markov_sup(const MarkovParams& mp, std::size_t k, Metric metric) {
  if (k >= mp.order) return 0.0;
  const std::size_t a = mp.alphabet_size;
  const std::size_t rows = ipow(a, mp.order);
  const std::size_t modulus = ipow(a, k);
  double best = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    std::span<const double> p(mp.table.data() + r * a, a);
    for (std::size_t s = r % modulus; s < rows; s += modulus) {
      if (s == r) continue;
      std::span<const double> q(mp.table.data() + s * a, a);
      best = std::max(best, metric(p, q));
    }
  }
  return best;
}

// chi2 of Poisson(lx) against Poisson(ly), truncated to b < support.
double poisson_chi2_truncated(double lx, double ly, std::size_t support) {
  double s = 0.0;
  for (std::size_t b = 0; b < support; ++b) {
    const double lpy = poisson_log_pmf(b, ly);
    const double r = std::exp(poisson_log_pmf(b, lx) - lpy);
    s += std::exp(lpy) * (r - 1.0) * (r - 1.0);
  }
  return s;
}

double binary_chi2(double p1, double q1) {
  const double d = p1 - q1;
  return d * d / (q1 * (1.0 - q1));
}

}  // namespace

// ---------------------------------------------------------------------------
// RegularityProfile

double RegularityProfile::chi2_at(std::size_t k) const {
  if (k == 0) return chi2_zero.value_or(chi2_C);
  if (k <= explicit_chi2.size()) return explicit_chi2[k - 1];
  if (!explicit_chi2.empty() && explicit_exhaustive) return 0.0;
  return chi2_C / std::pow(static_cast<double>(k), 1.0 + chi2_delta);
}

double RegularityProfile::var_at(std::size_t k) const {
  if (k >= 1 && k <= explicit_var.size()) return explicit_var[k - 1];
  return std::min(2.0, std::sqrt(chi2_at(k)));
}

bool RegularityProfile::is_zero() const {
  if (chi2_at(0) != 0.0) return false;
  if (explicit_chi2.empty() || !explicit_exhaustive) {
    if (chi2_C != 0.0) return false;
  }
  return std::all_of(explicit_chi2.begin(), explicit_chi2.end(), [](double v) { return v == 0.0; });
}

void RegularityProfile::validate() const {
  if (!(chi2_C >= 0.0) || !std::isfinite(chi2_C)) throw DomainError("alphabet", "chi2_C must be finite and >= 0");
  if (!(chi2_delta > 0.0)) throw DomainError("alphabet", "chi2_delta must be > 0");
  if (chi2_zero && !(*chi2_zero >= 0.0)) throw DomainError("alphabet", "chi2_zero must be >= 0");
  auto check_seq = [](const std::vector<double>& v, const char* name) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] >= 0.0)) throw DomainError("alphabet", std::string(name) + " has a negative entry");
      if (i > 0 && v[i] > v[i - 1])
        throw DomainError("alphabet", std::string(name) + " must be non-increasing");
    }
  };
  check_seq(explicit_chi2, "explicit_chi2");
  check_seq(explicit_var, "explicit_var");
}

// ---------------------------------------------------------------------------
// PotentialModel

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::iid: return "iid";
    case ModelKind::markov: return "markov";
    case ModelKind::long_memory: return "long-memory";
    case ModelKind::poisson_ar: return "poisson-ar";
  }
  return "?";
}

PotentialModel::PotentialModel(Params params, Alphabet alphabet)
    : params_(std::move(params)), alphabet_(alphabet) {}

ModelKind PotentialModel::kind() const { return static_cast<ModelKind>(params_.index()); }

PotentialModel PotentialModel::iid(std::vector<double> p) {
  if (p.size() < 2) throw DomainError("alphabet", "iid model needs at least 2 symbols");
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw DomainError("alphabet", "iid probabilities must be >= 0");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-12) throw DomainError("alphabet", "iid probabilities must sum to 1");
  const std::size_t n = p.size();
  PotentialModel m(IIDParams{std::move(p)}, Alphabet::finite(n));
  m.finish();
  return m;
}

PotentialModel PotentialModel::markov(std::size_t alphabet_size, std::size_t order, std::vector<double> table) {
  const Alphabet alphabet = Alphabet::finite(alphabet_size);
  const std::size_t rows = ipow(alphabet_size, order);
  if (rows > kMaxMarkovRows)
    throw CapacityError("alphabet", "markov model limited to " + std::to_string(kMaxMarkovRows) + " contexts");
  if (table.size() != rows * alphabet_size)
    throw DomainError("alphabet", "markov table needs " + std::to_string(rows * alphabet_size) + " entries, got " +
                                      std::to_string(table.size()));
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t b = 0; b < alphabet_size; ++b) {
      const double v = table[r * alphabet_size + b];
      if (!(v >= 0.0)) throw DomainError("alphabet", "markov probabilities must be >= 0");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw DomainError("alphabet", "markov row " + std::to_string(r) + " does not sum to 1");
  }
  PotentialModel m(MarkovParams{alphabet_size, order, std::move(table)}, alphabet);
  m.finish();
  return m;
}

PotentialModel PotentialModel::long_memory(double eps0, double delta, std::size_t k_max) {
  if (!(eps0 > 0.0 && eps0 < 0.5)) throw DomainError("alphabet", "long-memory eps0 must lie in (0, 1/2)");
  if (!(delta > 0.0)) throw DomainError("alphabet", "long-memory delta must be > 0");
  if (k_max < 1) throw DomainError("alphabet", "long-memory k_max must be >= 1");
  PotentialModel m(LongMemoryParams{eps0, delta, k_max}, Alphabet::finite(2));
  m.finish();
  return m;
}

PotentialModel PotentialModel::poisson_ar(std::vector<double> beta, std::vector<std::uint32_t> gamma,
                                          double tail_mass_tol, double delta) {
  if (beta.empty() || beta.size() != gamma.size())
    throw DomainError("alphabet", "poisson-ar needs equally long, nonempty beta and gamma sequences");
  if (!(tail_mass_tol > 0.0 && tail_mass_tol < 1e-3))
    throw DomainError("alphabet", "poisson-ar tail_mass_tol must lie in (0, 1e-3)");
  if (!(delta > 0.0)) throw DomainError("alphabet", "poisson-ar delta must be > 0");
  for (double b : beta)
    if (!std::isfinite(b)) throw DomainError("alphabet", "poisson-ar beta must be finite");
  PotentialModel m(PoissonARParams{std::move(beta), std::move(gamma), tail_mass_tol, delta},
                   Alphabet::nonneg_integers());
  m.finish();
  return m;
}

void PotentialModel::finish() {
  switch (kind()) {
    case ModelKind::iid: {
      support_ = alphabet_.size();
      memory_ = 0;
      profile_ = RegularityProfile{};
      profile_.chi2_zero = 0.0;
      profile_.explicit_exhaustive = true;
      return;
    }
    case ModelKind::markov: {
      const auto& mp = std::get<MarkovParams>(params_);
      support_ = mp.alphabet_size;
      memory_ = mp.order;
      break;
    }
    case ModelKind::long_memory: {
      const auto& lp = std::get<LongMemoryParams>(params_);
      support_ = 2;
      memory_ = lp.k_max;
      const std::size_t K = lp.k_max;
      weights_.assign(K + 1, 0.0);
      double z = 0.0;
      for (std::size_t k = K; k >= 1; --k) {
        weights_[k] = std::pow(static_cast<double>(k), -(3.0 + lp.delta) / 2.0);
        z += weights_[k];
      }
      for (std::size_t k = 1; k <= K; ++k) weights_[k] /= z;
      prefix_w_.assign(K + 1, 0.0);
      for (std::size_t k = 1; k <= K; ++k) prefix_w_[k] = prefix_w_[k - 1] + weights_[k];
      tails_.assign(K + 1, 0.0);
      for (std::size_t k = K; k-- > 0;) tails_[k] = tails_[k + 1] + weights_[k + 1];
      break;
    }
    case ModelKind::poisson_ar: {
      const auto& pp = std::get<PoissonARParams>(params_);
      memory_ = pp.beta.size();
      poisson_S_ = 0.0;
      for (std::size_t i = 0; i < pp.beta.size(); ++i) poisson_S_ += std::abs(pp.beta[i]) * pp.gamma[i];
      if (poisson_S_ > 6.0)
        throw DomainError("alphabet", "poisson-ar S = sum |beta_i| gamma_i must be <= 6 (intensity range e^S)");
      support_ = poisson_quantile(std::exp(poisson_S_), pp.tail_mass_tol) + 1;
      break;
    }
  }

  // Exact chi2_k / var_k tables for the models with history dependence. All
  // three closed forms are exact suprema, so the tables are non-increasing up
  // to rounding; the running min removes rounding wiggles.
  const std::size_t len = memory_ == 0 ? 0 : memory_ - 1;
  std::vector<double> chi2_table(len + 1);
  if (const auto* pp = params<PoissonARParams>()) {
    // Closed form with running sums; evaluating it per k would be quadratic
    // in the cutoff.
    const std::size_t L = pp->beta.size();
    std::vector<double> pos(L + 1, 0.0), neg(L + 1, 0.0);
    for (std::size_t i = 0; i < L; ++i) {
      const double v = pp->beta[i] * static_cast<double>(pp->gamma[i]);
      pos[i + 1] = pos[i] + std::max(v, 0.0);
      neg[i + 1] = neg[i] + std::min(v, 0.0);
    }
    for (std::size_t k = 0; k <= len; ++k) {
      const double hi = pos[L] - pos[k];
      const double lo = neg[L] - neg[k];
      const double diff = std::expm1(hi - lo);
      chi2_table[k] = std::expm1(std::exp(pos[k] + lo) * diff * diff);
    }
  } else {
    for (std::size_t k = 0; k <= len; ++k) chi2_table[k] = chi2_upper(*this, k);
  }
  profile_ = RegularityProfile{};
  profile_.chi2_zero = chi2_table[0];
  profile_.explicit_exhaustive = true;
  profile_.explicit_chi2.resize(len);
  profile_.explicit_var.resize(len);
  double delta = 1.0;
  if (const auto* lp = params<LongMemoryParams>()) delta = lp->delta;
  if (const auto* pp = params<PoissonARParams>()) delta = pp->delta;
  profile_.chi2_delta = delta;
  const bool poisson = kind() == ModelKind::poisson_ar;
  double c = 0.0;
  for (std::size_t k = 1; k <= len; ++k) {
    double v = chi2_table[k];
    double w = poisson ? std::min(2.0, std::sqrt(v)) : var_upper(*this, k);
    if (k > 1) {
      v = std::min(v, profile_.explicit_chi2[k - 2]);
      w = std::min(w, profile_.explicit_var[k - 2]);
    }
    profile_.explicit_chi2[k - 1] = v;
    profile_.explicit_var[k - 1] = w;
    c = std::max(c, v * std::pow(static_cast<double>(k), 1.0 + delta));
  }
  // Inflate by a few ulps so the power law dominates the table after rounding.
  profile_.chi2_C = c * (1.0 + 1e-12);
}

std::size_t PotentialModel::markov_row(const ContextView& ctx) const {
  const auto& mp = std::get<MarkovParams>(params_);
  std::size_t row = 0;
  std::size_t scale = 1;
  for (std::size_t i = 1; i <= mp.order; ++i) {
    row += ctx.at(i) * scale;
    scale *= mp.alphabet_size;
  }
  return row;
}

double PotentialModel::long_memory_prob_one(const ContextView& ctx) const {
  const auto& lp = std::get<LongMemoryParams>(params_);
  const std::size_t K = lp.k_max;
  const std::span<const Symbol> recent = ctx.recent();
  const std::size_t R = recent.size();
  const std::size_t n1 = std::min(R, K);
  const double* w = weights_.data();
  const Symbol* last = recent.data() + R;
  double s = 0.0;
  for (std::size_t k = 1; k <= n1; ++k) s += w[k] * (2.0 * static_cast<double>(last[-static_cast<std::ptrdiff_t>(k)]) - 1.0);
  if (n1 < K) {
    const auto& prefix = ctx.start().prefix();
    const std::size_t n2 = std::min(K, R + prefix.size());
    for (std::size_t k = R + 1; k <= n2; ++k) s += w[k] * (2.0 * static_cast<double>(prefix[k - R - 1]) - 1.0);
    if (n2 < K) s += (ctx.tail() == 1 ? 1.0 : -1.0) * tails_[n2];
  }
  return 0.5 + lp.eps0 * s;
}

double PotentialModel::poisson_lambda(const ContextView& ctx) const {
  const auto& pp = std::get<PoissonARParams>(params_);
  const std::size_t L = pp.beta.size();
  const std::size_t n1 = std::min(L, ctx.explicit_depth());
  double s = 0.0;
  for (std::size_t i = 1; i <= n1; ++i) s += pp.beta[i - 1] * std::min(ctx.at(i), pp.gamma[i - 1]);
  if (n1 < L && ctx.tail() != 0) {
    for (std::size_t i = n1 + 1; i <= L; ++i) s += pp.beta[i - 1] * std::min(ctx.tail(), pp.gamma[i - 1]);
  }
  return std::exp(s);
}

void PotentialModel::conditional(const ContextView& ctx, std::span<double> out) const {
  switch (kind()) {
    case ModelKind::iid: {
      const auto& p = std::get<IIDParams>(params_).p;
      std::copy(p.begin(), p.end(), out.begin());
      return;
    }
    case ModelKind::markov: {
      const auto& mp = std::get<MarkovParams>(params_);
      const double* row = mp.table.data() + markov_row(ctx) * mp.alphabet_size;
      std::copy(row, row + mp.alphabet_size, out.begin());
      return;
    }
    case ModelKind::long_memory: {
      const double p1 = long_memory_prob_one(ctx);
      out[0] = 1.0 - p1;
      out[1] = p1;
      return;
    }
    case ModelKind::poisson_ar: {
      // Truncated at the 1 - tail_mass_tol quantile of Poisson(e^S) and
      // renormalized.
      const double lambda = poisson_lambda(ctx);
      const double log_lambda = std::log(lambda);
      double total = 0.0;
      double lfact = 0.0;
      for (std::size_t b = 0; b < support_; ++b) {
        if (b > 0) lfact += std::log(static_cast<double>(b));
        out[b] = std::exp(-lambda + static_cast<double>(b) * log_lambda - lfact);
        total += out[b];
      }
      for (std::size_t b = 0; b < support_; ++b) out[b] /= total;
      return;
    }
  }
}

double PotentialModel::log_prob(Symbol a, const ContextView& ctx) const {
  if (!alphabet_.contains(a))
    throw DomainError("alphabet", "symbol " + std::to_string(a) + " outside the model alphabet");
  switch (kind()) {
    case ModelKind::iid: return std::log(std::get<IIDParams>(params_).p[a]);
    case ModelKind::markov: {
      const auto& mp = std::get<MarkovParams>(params_);
      return std::log(mp.table[markov_row(ctx) * mp.alphabet_size + a]);
    }
    case ModelKind::long_memory: {
      const double p1 = long_memory_prob_one(ctx);
      return std::log(a == 1 ? p1 : 1.0 - p1);
    }
    case ModelKind::poisson_ar: return poisson_log_pmf(a, poisson_lambda(ctx));
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Free functions

double log_prob(const PotentialModel& model, Symbol a, const History& x) {
  return model.log_prob(a, ContextView(x));
}

double chi2_upper(const PotentialModel& model, std::size_t k) {
  switch (model.kind()) {
    case ModelKind::iid: return 0.0;
    case ModelKind::markov: return markov_sup(*model.params<MarkovParams>(), k, pearson_chi2);
    case ModelKind::long_memory: {
      // sup attained with z = all zeros, x-tail all ones, y-tail all zeros:
      // |p - q| = 2 eps0 T_k while q sits at the boundary 1/2 - eps0.
      const auto& lp = *model.params<LongMemoryParams>();
      if (k >= lp.k_max) return 0.0;
      const double d = 2.0 * lp.eps0 * model.weight_tail(k);
      return d * d / (0.25 - lp.eps0 * lp.eps0);
    }
    case ModelKind::poisson_ar:
      // chi2(Poi(lx) || Poi(ly)) = exp((lx - ly)^2 / ly) - 1, maximized with the
      // common part at its maximum, x-tail at its max and y-tail at its min.
      // The profile table holds exactly that value (see finish()).
      break;
  }
  return model.regularity().chi2_at(k);
}

double var_upper(const PotentialModel& model, std::size_t k) {
  switch (model.kind()) {
    case ModelKind::iid: return 0.0;
    case ModelKind::markov: return markov_sup(*model.params<MarkovParams>(), k, l1_distance);
    case ModelKind::long_memory: {
      const auto& lp = *model.params<LongMemoryParams>();
      if (k >= lp.k_max) return 0.0;
      return 4.0 * lp.eps0 * model.weight_tail(k);
    }
    case ModelKind::poisson_ar:
      // var_k(e^phi)^2 <= chi2_k by Cauchy-Schwarz.
      return std::min(2.0, std::sqrt(chi2_upper(model, k)));
  }
  return model.regularity().var_at(k);
}

double var_log_upper(const PotentialModel& model, std::size_t k) {
  switch (model.kind()) {
    case ModelKind::iid: return 0.0;
    case ModelKind::markov: return markov_sup(*model.params<MarkovParams>(), k, log_l1_distance);
    case ModelKind::long_memory: {
      // logit is steepest at the boundary, so the worst interval of length
      // 2 eps0 T_k hugs q = 1/2 - eps0.
      const auto& lp = *model.params<LongMemoryParams>();
      if (k >= lp.k_max) return 0.0;
      const double q = 0.5 - lp.eps0;
      const double p = q + 2.0 * lp.eps0 * model.weight_tail(k);
      return std::log(p / q) + std::log((1.0 - q) / (1.0 - p));
    }
    case ModelKind::poisson_ar: return chi2_upper(model, k) == 0.0 ? 0.0 : kInf;
  }
  return kInf;
}

double chi2_empirical(const PotentialModel& model, std::size_t k, std::size_t n_contexts, RngStream& rng) {
  switch (model.kind()) {
    case ModelKind::iid: return 0.0;
    case ModelKind::markov: {
      const auto& mp = *model.params<MarkovParams>();
      if (k >= mp.order) return 0.0;
      const std::size_t a = mp.alphabet_size;
      const std::size_t rows = ipow(a, mp.order);
      const std::size_t modulus = ipow(a, k);
      auto pair_chi2 = [&](std::size_t r, std::size_t s) {
        return pearson_chi2({mp.table.data() + r * a, a}, {mp.table.data() + s * a, a});
      };
      double best = 0.0;
      if (rows * (rows / modulus) <= n_contexts) {
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t s = r % modulus; s < rows; s += modulus) best = std::max(best, pair_chi2(r, s));
        return best;
      }
      for (std::size_t i = 0; i < n_contexts; ++i) {
        const std::size_t r = rng.below(rows);
        const std::size_t s = r % modulus + modulus * rng.below(rows / modulus);
        best = std::max(best, pair_chi2(r, s));
      }
      return best;
    }
    case ModelKind::long_memory: {
      const auto& lp = *model.params<LongMemoryParams>();
      if (k >= lp.k_max) return 0.0;
      auto eval = [&](const History& x, const History& y) {
        const double p = std::exp(model.log_prob(1, ContextView(x)));
        const double q = std::exp(model.log_prob(1, ContextView(y)));
        return binary_chi2(p, q);
      };
      double best = 0.0;
      for (Symbol zc : {Symbol{0}, Symbol{1}}) {
        std::vector<Symbol> z(k, zc);
        best = std::max(best, eval(History(z, 1), History(z, 0)));
        best = std::max(best, eval(History(z, 0), History(z, 1)));
      }
      const std::size_t depth = lp.k_max - k;
      for (std::size_t i = 0; i < n_contexts; ++i) {
        std::vector<Symbol> xs(k + depth), ys(k + depth);
        for (std::size_t j = 0; j < k; ++j) xs[j] = ys[j] = static_cast<Symbol>(rng.below(2));
        for (std::size_t j = k; j < k + depth; ++j) {
          xs[j] = static_cast<Symbol>(rng.below(2));
          ys[j] = static_cast<Symbol>(rng.below(2));
        }
        best = std::max(best, eval(History(xs, static_cast<Symbol>(rng.below(2))),
                                   History(ys, static_cast<Symbol>(rng.below(2)))));
      }
      return best;
    }
    case ModelKind::poisson_ar: {
      const auto& pp = *model.params<PoissonARParams>();
      const std::size_t L = pp.beta.size();
      if (k >= L) return 0.0;
      const std::size_t support = model.support_size();
      auto eval = [&](const History& x, const History& y) {
        return poisson_chi2_truncated(model.poisson_lambda(ContextView(x)), model.poisson_lambda(ContextView(y)),
                                      support);
      };
      // Extreme contexts: common part maximal, tails at the two extremes.
      std::vector<Symbol> hi(L), lo(L);
      for (std::size_t i = 0; i < L; ++i) {
        hi[i] = pp.beta[i] > 0 ? pp.gamma[i] : 0;
        lo[i] = pp.beta[i] > 0 ? 0 : pp.gamma[i];
      }
      std::vector<Symbol> xs = hi, ys = hi;
      for (std::size_t i = k; i < L; ++i) ys[i] = lo[i];
      double best = std::max(eval(History(xs, 0), History(ys, 0)), eval(History(ys, 0), History(xs, 0)));
      for (std::size_t c = 0; c < n_contexts; ++c) {
        for (std::size_t i = 0; i < L; ++i) {
          const Symbol v = static_cast<Symbol>(rng.below(pp.gamma[i] + 1ULL));
          xs[i] = v;
          ys[i] = i < k ? v : static_cast<Symbol>(rng.below(pp.gamma[i] + 1ULL));
        }
        best = std::max(best, eval(History(xs, 0), History(ys, 0)));
      }
      return best;
    }
  }
  return 0.0;
}

double normalization_error(const PotentialModel& model, const History& x) {
  const ContextView ctx(x);
  double s = 0.0;
  for (std::size_t a = 0; a < model.support_size(); ++a) s += std::exp(model.log_prob(static_cast<Symbol>(a), ctx));
  return std::abs(s - 1.0);
}

std::size_t poisson_quantile(double lambda, double tail_mass) {
  if (!(lambda > 0.0)) throw DomainError("alphabet", "poisson intensity must be > 0");
  // Sum the upper tail from far out downward; avoids 1 - cdf cancellation.
  const std::size_t far = static_cast<std::size_t>(lambda + 40.0 * std::sqrt(lambda) + 60.0);
  std::vector<double> pmf(far + 1);
  for (std::size_t b = 0; b <= far; ++b) pmf[b] = std::exp(poisson_log_pmf(b, lambda));
  double tail = 0.0;  // P[X > c]
  std::size_t c = far;
  while (c > 0) {
    const double next = tail + pmf[c];  // P[X > c-1]
    if (next > tail_mass) break;
    tail = next;
    --c;
  }
  return c;
}

}  // namespace gmix
