#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "gmix/error.hpp"
#include "gmix/renewal.hpp"

using namespace gmix;

namespace {

RegularityProfile power_profile(double C, double delta) {
  RegularityProfile p;
  p.chi2_C = C;
  p.chi2_delta = delta;
  return p;
}

// Direct summation in long double, lowest terms last.
double brute_power_sum(double C, double delta, std::uint64_t from, std::uint64_t to) {
  long double s = 0.0L;
  for (std::uint64_t j = to; j >= from; --j) s += C * std::pow(static_cast<long double>(j), -(1.0L + delta));
  return static_cast<double>(s);
}

}  // namespace

TEST_SUITE("renewal") {
  TEST_CASE("chi2 range sums match direct summation on both sides of the explicit limit") {
    const auto p = power_profile(1.3, 0.7);
    const Chi2Sums sums(p, 1000);
    CHECK(sums.sum(1, 10) == doctest::Approx(brute_power_sum(1.3, 0.7, 1, 10)).epsilon(1e-13));
    CHECK(sums.sum(500, 900) == doctest::Approx(brute_power_sum(1.3, 0.7, 500, 900)).epsilon(1e-12));
    CHECK(sums.sum(900, 5000) == doctest::Approx(brute_power_sum(1.3, 0.7, 900, 5000)).epsilon(1e-10));
    CHECK(sums.sum(2000, 400000) == doctest::Approx(brute_power_sum(1.3, 0.7, 2000, 400000)).epsilon(1e-10));
    CHECK(sums.sum(7, 7) == doctest::Approx(p.chi2_at(7)).epsilon(1e-14));
    // Tail from 2000: direct part to 4e6 plus the integral remainder.
    const double rest = 1.3 / 0.7 * std::pow(4e6 + 0.5, -0.7);
    CHECK(sums.tail(2000) == doctest::Approx(brute_power_sum(1.3, 0.7, 2000, 4000000) + rest).epsilon(1e-6));
  }

  TEST_CASE("exhaustive explicit tables have no tail") {
    RegularityProfile p;
    p.explicit_chi2 = {0.5, 0.2, 0.1};
    p.explicit_exhaustive = true;
    const Chi2Sums sums(p);
    CHECK(sums.tail(1) == doctest::Approx(0.8));
    CHECK(sums.tail(4) == 0.0);
    const auto b = b_seq(sums, BlockSchedule(1.0), 10);
    for (std::size_t k = 4; k <= 10; ++k) CHECK(b[k] == 0.0);
  }

  TEST_CASE("zero profile gives zero failure probabilities") {
    RegularityProfile zero;
    zero.chi2_C = 0.0;
    const auto b = b_seq(zero, BlockSchedule(2.0), 50);
    for (double v : b) CHECK(v == 0.0);
    const auto u = theorem1_bound(zero, 1.0, 20);
    CHECK(u[0] == 1.0);
    for (std::size_t n = 1; n <= 20; ++n) CHECK(u[n] == 0.0);
  }

  TEST_CASE("unit blocks: b_k = sqrt(chi2_k / 2) once below the ceiling") {
    const auto p = power_profile(1.0, 1.5);
    const auto b = b_seq(p, BlockSchedule(1.0), 2000);
    const double ceiling = bret_ceiling(Chi2Sums(p));
    for (std::size_t k = 3; k <= 2000; ++k) CHECK(b[k] == doctest::Approx(std::min(ceiling, std::sqrt(0.5 * p.chi2_at(k)))));
    CHECK(fit_decay_slope(b, 10, 2000).slope == doctest::Approx(-1.25).epsilon(1e-3));
  }

  TEST_CASE("b is non-increasing, below one and dominates q on the scanned range") {
    for (double beta : {1.0, 1.5, 2.0}) {
      const auto p = power_profile(0.05, 1.0);
      const BlockSchedule s(beta);
      const Chi2Sums sums(p);
      const auto b = b_seq(sums, s, 60, BSeqOptions{200});
      for (std::size_t k = 1; k < b.size(); ++k) {
        CHECK(b[k] <= b[k - 1]);
        CHECK(b[k] < 1.0);
      }
      for (std::uint64_t k = 1; k <= 60; ++k)
        for (std::uint64_t n = k + 1; n <= k + 50; ++n) CHECK(q_bound(sums, s, n, k) <= b[k] + 1e-15);
    }
  }

  TEST_CASE("a ceiling of one means no guarantee") {
    CHECK_THROWS_AS(b_seq(power_profile(1e300, 1.0), BlockSchedule(1.0), 5), PipelineError);
  }

  TEST_CASE("f sequence and its total mass") {
    const std::vector<double> b{0.3, 0.2, 0.1, 0.05};
    const auto f = f_seq(b);
    CHECK(f[0] == 0.0);
    CHECK(f[1] == doctest::Approx(0.3));
    CHECK(f[2] == doctest::Approx(0.2 * 0.7));
    CHECK(f[3] == doctest::Approx(0.1 * 0.7 * 0.8));
    double mass = 0.0;
    for (double v : f) mass += v;
    CHECK(mass == doctest::Approx(1.0 - 0.7 * 0.8 * 0.9 * 0.95));
  }

  TEST_CASE("renewal recursion agrees with direct convolution") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> U(0.0, 0.1);
    std::vector<double> f(12, 0.0);
    for (std::size_t i = 1; i < f.size(); ++i) f[i] = U(gen);
    const auto u = renewal_u(f, 40);
    std::vector<double> v(41, 0.0);
    v[0] = 1.0;
    for (std::size_t n = 1; n <= 40; ++n)
      for (std::size_t k = 1; k <= n && k < f.size(); ++k) v[n] += f[k] * v[n - k];
    for (std::size_t n = 0; n <= 40; ++n) CHECK(u[n] == doctest::Approx(v[n]).epsilon(1e-13));
    CHECK_THROWS_AS(renewal_u({0.0, 0.6, 0.5}, 5), PipelineError);
  }

  TEST_CASE("single-step f gives a geometric renewal sequence") {
    const auto u = renewal_u({0.0, 0.4}, 10);
    for (std::size_t n = 0; n <= 10; ++n) CHECK(u[n] == doctest::Approx(std::pow(0.4, static_cast<double>(n))));
  }

  TEST_CASE("power-law f gives u with the same decay") {
    std::vector<double> f(10001, 0.0);
    for (std::size_t n = 1; n <= 10000; ++n) f[n] = 0.3 / (static_cast<double>(n) * static_cast<double>(n));
    const auto u = renewal_u(f, 10000);
    CHECK(std::abs(fit_decay_slope(u, 100, 10000).slope + 2.0) <= 0.15);
  }

  TEST_CASE("pipeline corollaries") {
    const auto p = power_profile(0.01, 1.5);
    const BoundPipeline pipe(p, 1.5, 400);
    for (std::uint64_t k = 1; k <= 400; ++k) {
      const std::uint64_t n = pipe.schedule().block_of(k);
      CHECK(pipe.corollary1(k) == pipe.u()[n]);
      double partial = 0.0;
      for (std::size_t j = n; j <= 400; ++j) partial += pipe.u()[j];
      CHECK(pipe.corollary2(k) >= std::min(1.0, partial) - 1e-12);
      if (k > 1) CHECK(pipe.corollary2(k) <= pipe.corollary2(k - 1));
    }
    CHECK(pipe.survival_lower() > 0.0);
    CHECK(pipe.survival_lower() <= 1.0);
    CHECK_THROWS_AS(pipe.corollary1(1000000), DomainError);
  }

  TEST_CASE("bound preconditions are enforced") {
    CHECK_THROWS_AS(theorem1_bound(power_profile(1.0, 0.8), 1.0, 10), DomainError);
    CHECK_THROWS_AS(theorem1_bound(power_profile(1.0, 1.5), 0.5, 10), DomainError);
    CHECK_NOTHROW(theorem1_bound(power_profile(0.1, 0.8), 2.0, 10));
    CHECK(corollary1_bound(power_profile(0.01, 1.5), 1.0, 50) ==
          doctest::Approx(BoundPipeline(power_profile(0.01, 1.5), 1.0, 50).u()[50]));
  }

  TEST_CASE("lemma validators pass on their default grids") {
    const auto hj1 = validate_hj1(LemmaGrid{});
    const auto hj2 = validate_hj2(LemmaGrid{});
    CHECK(hj1.pass);
    CHECK(hj2.pass);
    CHECK(hj1.checks > 1000);
    CHECK(hj2.worst_margin >= 0.0);
  }

  TEST_CASE("Lemalg holds on random triples") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> A(1.0 + 1e-9, 5.0), X(1e-6, 100.0);
    for (int i = 0; i < 2000; ++i) {
      double a = X(gen), b = X(gen);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      const double alpha = A(gen);
      CHECK(check_lemalg(alpha, a, b));
      CHECK(lemalg_margin(alpha, a, b) >= -1e-12);
    }
    CHECK_THROWS_AS(check_lemalg(1.0, 1.0, 2.0), DomainError);
  }

  TEST_CASE("Delta_k^n matches its definition") {
    const double d = 0.8, beta = 2.0;
    const std::uint64_t k = 5, n = 9;
    const double direct = std::pow(81.0 - 16.0 - 2.0, -d) - std::pow(100.0 - 16.0, -d);
    CHECK(delta_nk(d, beta, k, n) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(delta_nk(d, beta, k, n) > 0.0);
  }

  TEST_CASE("log-log fits recover exact power laws") {
    std::vector<double> x, y;
    for (int i = 1; i <= 50; ++i) {
      x.push_back(i);
      y.push_back(3.0 * std::pow(i, -1.7));
    }
    const auto fit = fit_loglog(x, y);
    CHECK(fit.slope == doctest::Approx(-1.7).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0));
    CHECK_THROWS_AS(fit_loglog({1.0, 2.0}, {1.0, 0.0}), DomainError);
  }
}
