#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "bundlesight/rng.hpp"
#include "oracles.hpp"

using namespace bundlesight;

TEST_CASE("splitmix64 matches the published reference outputs") {
  // One step of the reference generator from state 0 and state 42.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(42) == 0xbdd732262feb6e95ULL);

  // Library form is stateless: splitmix64(s) equals the reference next()
  // called with internal state s.
  std::uint64_t state = 42;
  for (int i = 0; i < 16; ++i) {
    const std::uint64_t pre = state;
    const std::uint64_t want = oracle::splitmix64_reference(state);
    CHECK(splitmix64(pre) == want);
  }
}

TEST_CASE("derive_seed is deterministic and path-sensitive") {
  const std::uint64_t a = derive_seed(7, StreamTag::kPool, 1, 2, 3);
  CHECK(a == derive_seed(7, StreamTag::kPool, 1, 2, 3));
  CHECK(a != derive_seed(8, StreamTag::kPool, 1, 2, 3));
  CHECK(a != derive_seed(7, StreamTag::kOffset, 1, 2, 3));
  CHECK(a != derive_seed(7, StreamTag::kPool, 2, 1, 3));
  CHECK(a != derive_seed(7, StreamTag::kPool, 1, 2, 4));

  // No collisions across a modest grid of paths.
  std::set<std::uint64_t> seen;
  int count = 0;
  for (std::uint64_t master : {0ULL, 1ULL, 12345ULL}) {
    for (auto tag : {StreamTag::kPool, StreamTag::kOffset, StreamTag::kMenu,
                     StreamTag::kChoice, StreamTag::kTruth}) {
      for (std::uint64_t x = 0; x < 8; ++x) {
        for (std::uint64_t y = 0; y < 8; ++y) {
          seen.insert(derive_seed(master, tag, x, y));
          ++count;
        }
      }
    }
  }
  CHECK(static_cast<int>(seen.size()) == count);
}

TEST_CASE("RngStream is reproducible and streams differ") {
  RngStream a(123), b(123), c(124);
  bool same = true, diff = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t ua = a.next_u64();
    same = same && (ua == b.next_u64());
    diff = diff || (ua != c.next_u64());
  }
  CHECK(same);
  CHECK(diff);
}

TEST_CASE("uniform() lands in [0,1) with the right first two moments") {
  RngStream rng(2024);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  // SE(mean) = sqrt(1/12/n) ~ 6.5e-4; allow 4 SE.
  CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(var - 1.0 / 12.0) < 0.002);
}

TEST_CASE("uniform(lo, hi) respects its bounds") {
  RngStream rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-3.5, 2.25);
    CHECK(u >= -3.5);
    CHECK(u < 2.25);
  }
}

TEST_CASE("normal() has standard-normal moments") {
  RngStream rng(99);
  const int n = 400000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s3 += z * z * z;
    s4 += z * z * z * z;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  const double skew = s3 / n;
  const double kurt = s4 / n;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.01);
  CHECK(std::abs(skew) < 0.02);        // SE ~ sqrt(15/n) ~ 0.006
  CHECK(std::abs(kurt - 3.0) < 0.06);  // SE ~ sqrt(96/n) ~ 0.016
}

TEST_CASE("uniform_index covers its range uniformly") {
  RngStream rng(31);
  const std::uint64_t buckets = 8;
  std::vector<int> hits(buckets, 0);
  const int n = 80000;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t k = rng.uniform_index(buckets);
    REQUIRE(k < buckets);
    ++hits[k];
  }
  const double expect = static_cast<double>(n) / buckets;
  const double slack = 5.0 * std::sqrt(expect);  // ~5 sigma per bucket
  for (int h : hits) CHECK(std::abs(h - expect) < slack);
  CHECK(RngStream(1).uniform_index(1) == 0);
}

TEST_CASE("bernoulli(p) hits its rate") {
  RngStream rng(77);
  const int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += rng.bernoulli(0.3) ? 1 : 0;
  const double se = std::sqrt(0.3 * 0.7 / n);
  CHECK(std::abs(ones / static_cast<double>(n) - 0.3) < 4.0 * se);
  CHECK_FALSE(RngStream(3).bernoulli(0.0));
  CHECK(RngStream(3).bernoulli(1.0));
}
