#include <cmath>
#include <vector>

#include "doctest.h"
#include "gmix/coupling.hpp"
#include "gmix/error.hpp"
#include "gmix/oracle.hpp"

using namespace gmix;

namespace {

// Rows (0.9, 0.1) / (0.2, 0.8): eigenvalues 1 and 0.7, stationary law (2/3, 1/3).
PotentialModel two_state() { return PotentialModel::markov(2, 1, {0.9, 0.1, 0.2, 0.8}); }

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("two-state marginals follow the spectral decomposition") {
    const auto m = two_state();
    for (std::uint64_t n = 1; n <= 30; ++n) {
      const double lam = std::pow(0.7, static_cast<double>(n));
      const Dist from0 = exact_marginal(m, History({}, 0), n);
      const Dist from1 = exact_marginal(m, History({}, 1), n);
      CHECK(from0[1] == doctest::Approx((1.0 - lam) / 3.0).epsilon(1e-12));
      CHECK(from1[1] == doctest::Approx((1.0 + 2.0 * lam) / 3.0).epsilon(1e-12));
      CHECK(exact_tv_coordinate(m, History({}, 0), History({}, 1), n) == doctest::Approx(lam).epsilon(1e-12));
    }
    CHECK(exact_tv_coordinate(m, History({}, 0), History({}, 1), 1) == doctest::Approx(0.7));
    CHECK(exact_tv_coordinate(m, History({}, 0), History({}, 1), 2) == doctest::Approx(0.49));
  }

  TEST_CASE("two-state block coupling with unit blocks") {
    const auto exact = exact_block_coupling(two_state(), History({}, 0), History({}, 1), BlockSchedule(1.0), 15);
    for (std::size_t n = 1; n <= 15; ++n) {
      const double lam = std::pow(0.7, static_cast<double>(n));
      CHECK(exact.px[n - 1] == doctest::Approx(lam).epsilon(1e-12));
      CHECK(exact.mismatch[n - 1] == doctest::Approx(lam).epsilon(1e-12));
      // Once the chains meet they move together.
      CHECK(exact.theta_tail[n - 1] == doctest::Approx(lam).epsilon(1e-12));
    }
    const auto fail = exact_block_coupling_fail(two_state(), History({}, 0), History({}, 1), BlockSchedule(1.0), 15);
    CHECK(fail == exact.px);
  }

  TEST_CASE("exact block coupling agrees with simulation for growing blocks") {
    const auto m = PotentialModel::markov(2, 2, {0.7, 0.3, 0.4, 0.6, 0.5, 0.5, 0.2, 0.8});
    const BlockSchedule s(2.0);
    const std::uint64_t R = 50000;
    const auto exact = exact_block_coupling(m, History({0, 1}, 0), History({1, 1}, 1), s, 4);
    const auto mc = simulate_coupling(m, History({0, 1}, 0), History({1, 1}, 1), 4, R, s, BlockMaximal{},
                                      RngStream(12, 0));
    for (std::uint64_t n = 1; n <= 4; ++n) {
      const double p = exact.px[n - 1];
      CHECK(std::abs(mc.px(n).value - p) <= 4 * std::sqrt(p * (1 - p) / R) + 1e-12);
    }
    for (std::uint64_t k = 1; k <= mc.horizon; ++k) {
      const double p = exact.mismatch[k - 1], q = exact.theta_tail[k - 1];
      CHECK(std::abs(mc.mismatch(k).value - p) <= 4 * std::sqrt(p * (1 - p) / R) + 1e-12);
      CHECK(std::abs(mc.theta_tail(k).value - q) <= 4 * std::sqrt(q * (1 - q) / R) + 1e-12);
    }
  }

  TEST_CASE("mismatch probability dominates the coordinate distance") {
    const auto m = PotentialModel::markov(3, 1, {0.5, 0.3, 0.2, 0.1, 0.6, 0.3, 0.3, 0.3, 0.4});
    const auto exact = exact_block_coupling(m, History({}, 0), History({}, 2), BlockSchedule(1.5), 6);
    for (std::uint64_t k = 1; k <= exact.mismatch.size(); ++k)
      CHECK(exact.mismatch[k - 1] >= exact_tv_coordinate(m, History({}, 0), History({}, 2), k) - 1e-12);
  }

  TEST_CASE("stationary law and covariances of the two-state chain") {
    const auto m = two_state();
    const Dist pi = exact_stationary_symbol(m);
    CHECK(pi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    const std::vector<double> ind{0.0, 1.0};
    CHECK(exact_covariance(m, ind, ind, 0) == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
    for (std::size_t n = 1; n <= 15; ++n)
      CHECK(exact_covariance(m, ind, ind, n) ==
            doctest::Approx(2.0 / 9.0 * std::pow(0.7, static_cast<double>(n))).epsilon(1e-10));
  }

  TEST_CASE("IID models: no coupling failures and no correlation") {
    const auto m = PotentialModel::iid({0.25, 0.75});
    const auto px = exact_block_coupling_fail(m, History({}, 0), History({}, 1), BlockSchedule(2.0), 5);
    for (double p : px) CHECK(p == 0.0);
    CHECK(std::abs(exact_covariance(m, {0.0, 1.0}, {0.0, 1.0}, 3)) < 1e-15);
  }

  TEST_CASE("infinite-memory models and oversized problems are refused") {
    const auto lm = PotentialModel::long_memory(0.2, 1.5, 10);
    CHECK_THROWS_AS(exact_marginal(lm, History({}, 0), 3), DomainError);
    OracleLimits tight;
    tight.max_joint_work = 1000;
    CHECK_THROWS_AS(exact_block_coupling(two_state(), History({}, 0), History({}, 1), BlockSchedule(2.0), 8, tight),
                    CapacityError);
  }
}
