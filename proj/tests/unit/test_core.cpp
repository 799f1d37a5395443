#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "sclab/core/error.hpp"
#include "sclab/core/game.hpp"
#include "sclab/core/parallel.hpp"
#include "sclab/core/rng.hpp"

using namespace sclab;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, MatchesStandardMt19937_64) {
  // The 10000th output of a default-seeded mt19937_64 is fixed by the standard.
  Rng r(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = r.next_u64();
  EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(Rng, UniformInUnitInterval) {
  Rng r(1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(Rng, BelowCoversRangeUniformly) {
  Rng r(2);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
  EXPECT_EQ(r.below(1), 0u);
}

TEST(Rng, GammaMeanMatchesShape) {
  Rng r(3);
  for (double shape : {0.3, 1.0, 2.5}) {
    double sum = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
      const double g = r.gamma(shape);
      ASSERT_GT(g, 0.0);
      sum += g;
    }
    // Var = shape, so the mean's standard error is sqrt(shape / n).
    EXPECT_NEAR(sum / n, shape, 5.0 * std::sqrt(shape / n));
  }
}

TEST(Rng, DeriveSeedSpreadsIndices) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(Outcome, ValueForEachPlayer) {
  const Outcome w{OutcomeValue::P1Win, OutcomeReason::Checkmate};
  EXPECT_EQ(w.value_for(Player::P1), 1.0);
  EXPECT_EQ(w.value_for(Player::P2), -1.0);
  const Outcome d{OutcomeValue::Draw, OutcomeReason::Stalemate};
  EXPECT_EQ(d.value_for(Player::P1), 0.0);
  EXPECT_EQ(d.value_for(Player::P2), 0.0);
  EXPECT_STREQ(result_token(OutcomeValue::P2Win), "0-1");
  EXPECT_STREQ(result_token(OutcomeValue::Draw), "1/2-1/2");
  EXPECT_EQ(opponent(Player::P1), Player::P2);
}

TEST(Parallel, EveryIndexOnce) {
  for (unsigned workers : {1u, 2u, 4u}) {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), workers, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) ASSERT_EQ(h.load(), 1);
  }
}

TEST(Parallel, RethrowsWorkerException) {
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 5) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Errors, RequireThrowsContractError) {
  EXPECT_NO_THROW(require(true, "fine"));
  EXPECT_THROW(require(false, "bad"), ContractError);
}
