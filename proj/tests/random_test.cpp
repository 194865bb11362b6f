#include <gtest/gtest.h>

#include <set>

#include "mwlab/parallel.hpp"
#include "mwlab/random.hpp"

namespace mwlab {
namespace {

// Known-answer vectors for Philox4x32-10 published with Random123.
TEST(Philox, KnownAnswerVectors) {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  EXPECT_EQ(Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0}), (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::apply(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::apply(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, SameAddressSameValue) {
  const CounterRng a(42), b(42);
  for (std::uint64_t step = 0; step < 100; ++step)
    EXPECT_EQ(a.uniform(Stream::Transition, 3, step), b.uniform(Stream::Transition, 3, step));
  EXPECT_EQ(a.seed(), 42u);
}

TEST(CounterRng, AddressesAreDistinct) {
  const CounterRng rng(7);
  std::set<double> seen;
  for (std::uint32_t path = 0; path < 10; ++path)
    for (std::uint64_t step = 0; step < 10; ++step)
      for (Stream s : {Stream::Transition, Stream::Brownian}) seen.insert(rng.uniform(s, path, step));
  EXPECT_EQ(seen.size(), 200u);
  EXPECT_NE(CounterRng(1).uniform(Stream::Transition, 0, 0), CounterRng(2).uniform(Stream::Transition, 0, 0));
  // The high word of the step is part of the counter.
  EXPECT_NE(rng.uniform(Stream::Transition, 0, 1), rng.uniform(Stream::Transition, 0, (1ull << 32) + 1));
}

TEST(CounterRng, UniformsInOpenInterval) {
  const CounterRng rng(99);
  double mean = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto [u, v] = rng.uniform2(Stream::Transition, 0, static_cast<std::uint64_t>(i));
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    mean += u + v;
  }
  mean /= 2.0 * n;
  // Standard error of the mean is sqrt(1/12 / 4e5), about 4.6e-4.
  EXPECT_NEAR(mean, 0.5, 5 * 4.6e-4);
}

TEST(CounterRng, NormalMoments) {
  const CounterRng rng(2024);
  const int n = 200000;
  double m1 = 0, m2 = 0, cross = 0;
  for (int i = 0; i < n; ++i) {
    const auto [z1, z2] = rng.normal2(Stream::Brownian, 1, static_cast<std::uint64_t>(i));
    m1 += z1 + z2;
    m2 += z1 * z1 + z2 * z2;
    cross += z1 * z2;
  }
  EXPECT_NEAR(m1 / (2.0 * n), 0.0, 5 / std::sqrt(2.0 * n));
  EXPECT_NEAR(m2 / (2.0 * n), 1.0, 5 * std::sqrt(2.0 / (2.0 * n)));
  EXPECT_NEAR(cross / n, 0.0, 5 / std::sqrt(static_cast<double>(n)));
}

TEST(CounterRng, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(5, i));
  EXPECT_EQ(seeds.size(), 1000u);
  EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
  EXPECT_NE(derive_seed(5, 3), derive_seed(6, 3));
}

TEST(Parallel, ResultsIndependentOfWorkers) {
  const CounterRng rng(1);
  auto run = [&](Index workers) {
    std::vector<double> out(1000);
    parallel_for(1000, workers, [&](Index i) {
      out[static_cast<std::size_t>(i)] = rng.uniform(Stream::Transition, static_cast<std::uint32_t>(i), 0);
    });
    return out;
  };
  const auto one = run(1);
  EXPECT_EQ(one, run(3));
  EXPECT_EQ(one, run(8));
  EXPECT_EQ(one, run(5000));
}

TEST(Parallel, RethrowsWorkerException) {
  EXPECT_THROW(parallel_for(100, 4,
                            [](Index i) {
                              if (i == 77) throw Error(ErrorKind::InvalidArgument, "boom");
                            }),
               Error);
}

}  // namespace
}  // namespace mwlab
