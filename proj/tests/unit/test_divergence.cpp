#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "gmix/divergence.hpp"
#include "gmix/error.hpp"
#include "support.hpp"

using namespace gmix;

TEST_SUITE("divergence") {
  TEST_CASE("known values") {
    const Dist p = Dist::bernoulli(0.5), q = Dist::bernoulli(0.25);
    CHECK(tv(p, q) == doctest::Approx(0.25));
    CHECK(kl(p, q) == doctest::Approx(0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25)));
    CHECK(chi2(p, q) == doctest::Approx(0.0625 / 0.75 + 0.0625 / 0.25));
    CHECK(tv(p, p) == 0.0);
    CHECK(kl(p, p) == 0.0);
  }

  TEST_CASE("missing absolute continuity gives infinite divergences") {
    const Dist p = Dist::bernoulli(0.5), q = Dist::point_mass(2, 0);
    CHECK(std::isinf(kl(p, q)));
    CHECK(std::isinf(chi2(p, q)));
    CHECK(kl(q, p) == doctest::Approx(std::log(2.0)));
    CHECK(bh_tv_bound(std::numeric_limits<double>::infinity()) == 1.0);
  }

  TEST_CASE("Dist validates its input") {
    CHECK_THROWS_AS(Dist({0.5, 0.6}), DomainError);
    CHECK_THROWS_AS(Dist({-0.1, 1.1}), DomainError);
    CHECK_THROWS_AS(Dist(std::vector<double>{}), DomainError);
  }

  TEST_CASE("Pinsker, Bretagnolle-Huber and kl <= chi2 on random pairs") {
    std::mt19937_64 gen(2024);
    for (int i = 0; i < 2000; ++i) {
      const std::size_t n = 2 + gen() % 19;
      const Dist p(testing::random_simplex(gen, n)), q(testing::random_simplex(gen, n, 1e-3));
      const double t = tv(p, q), k = kl(p, q);
      CHECK(pinsker_tv_bound(k) - t >= -1e-12);
      CHECK(bh_tv_bound(k) - t >= -1e-12);
      CHECK(chi2(p, q) - k >= -1e-12);
    }
  }

  TEST_CASE("maximal coupling disagrees with probability tv") {
    std::mt19937_64 gen(7);
    RngStream rng(7, 0);
    for (int pair = 0; pair < 5; ++pair) {
      const Dist p(testing::random_simplex(gen, 4)), q(testing::random_simplex(gen, 4));
      const int draws = 200000;
      int differ = 0;
      std::vector<int> first(4, 0), second(4, 0);
      for (int i = 0; i < draws; ++i) {
        const auto [a, b] = maximal_coupling_sample(p, q, rng);
        differ += a != b;
        ++first[a];
        ++second[b];
      }
      const double t = tv(p, q);
      CHECK(std::abs(differ / double(draws) - t) <= 4 * std::sqrt(t * (1 - t) / draws));
      // Marginals are p and q.
      for (int a = 0; a < 4; ++a) {
        CHECK(std::abs(first[a] / double(draws) - p[a]) <= 4 * std::sqrt(p[a] * (1 - p[a]) / draws));
        CHECK(std::abs(second[a] / double(draws) - q[a]) <= 4 * std::sqrt(q[a] * (1 - q[a]) / draws));
      }
    }
  }

  TEST_CASE("maximal coupling of identical laws never disagrees") {
    RngStream rng(1, 0);
    const Dist p({0.2, 0.3, 0.5});
    for (int i = 0; i < 10000; ++i) {
      const auto [a, b] = maximal_coupling_sample(p, p, rng);
      REQUIRE(a == b);
    }
  }

  TEST_CASE("sample_index inverts the cumulative weights") {
    const std::vector<double> w{1.0, 0.0, 3.0};
    CHECK(sample_index(w, 0.0) == 0);
    CHECK(sample_index(w, 0.999) == 0);
    CHECK(sample_index(w, 1.0) == 2);
    CHECK(sample_index(w, 3.999) == 2);
  }
}
