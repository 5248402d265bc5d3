#include <cmath>
#include <vector>

#include <doctest.h>

#include "lodreg/rng.hpp"

using namespace lodreg;

TEST_SUITE("rng") {

// Known-answer vectors generated with numpy.random.Philox (4x64, 10
// rounds). numpy increments the counter before producing a block, so its
// i-th raw block equals our block at counter i + 1.
TEST_CASE("philox4x64 known answers") {
  {
    const auto b = Philox4x64::block(0, 0, 1);
    CHECK(b[0] == 0x02f4ba6408e4d89bULL);
    CHECK(b[1] == 0x3dd62b0b9ca8c5b2ULL);
    CHECK(b[2] == 0x1c8667a55d902e79ULL);
    CHECK(b[3] == 0x907d7a052fd5b4dcULL);
    const auto b2 = Philox4x64::block(0, 0, 2);
    CHECK(b2[0] == 0x809bf322883987c3ULL);
    CHECK(b2[1] == 0x471128b9e807f7ddULL);
    CHECK(b2[2] == 0xf250ba0dbec065b7ULL);
    CHECK(b2[3] == 0xfc6ed66767a457bcULL);
  }
  {
    const auto b =
        Philox4x64::block(0x9E3779B97F4A7C15ULL, 0xBB67AE8584CAA73BULL, 1);
    CHECK(b[0] == 0xfa033c62a6049001ULL);
    CHECK(b[1] == 0x003beb58330ab297ULL);
    CHECK(b[2] == 0xd45d9d1ed2e72102ULL);
    CHECK(b[3] == 0xba38a9f383a1e7e2ULL);
  }
  {
    const auto b = Philox4x64::block(42, 7, 1);
    CHECK(b[0] == 0xa64064f34e84b9a3ULL);
    CHECK(b[1] == 0xe287959a866a08fdULL);
    CHECK(b[2] == 0x8dc181f009b96c03ULL);
    CHECK(b[3] == 0xf3f6001d4fa83454ULL);
  }
  {
    // numpy with explicit counter (5,0,0,0) pre-increments to 6
    const auto b = Philox4x64::block(1, 2, 6);
    CHECK(b[0] == 0xe760a852b5937c36ULL);
    CHECK(b[1] == 0x352dae2d26b4ee43ULL);
    CHECK(b[2] == 0x7af54aafd2cee4aeULL);
    CHECK(b[3] == 0x73b649a7302bc8b1ULL);
  }
}

TEST_CASE("streams are independent of evaluation order") {
  RngStream a(123, 5);
  std::vector<std::uint64_t> first;
  for (int i = 0; i < 10; ++i) first.push_back(a.next_u64());
  RngStream other(123, 6);
  (void)other.next_u64();
  RngStream b(123, 5);
  for (int i = 0; i < 10; ++i) CHECK(b.next_u64() == first[i]);
}

TEST_CASE("uniform and normal moments") {
  RngStream rng(99, 0);
  const int n = 200000;
  double su = 0, su2 = 0, sn = 0, sn2 = 0;
  int inside = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    su += u;
    su2 += u * u;
    const double z = rng.next_normal();
    sn += z;
    sn2 += z * z;
    if (std::abs(z) < 1.959963984540054) ++inside;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(su2 / n - 0.25 == doctest::Approx(1.0 / 12).epsilon(0.02));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(static_cast<double>(inside) / n == doctest::Approx(0.95).epsilon(0.01));
}

TEST_CASE("poisson sampler moments") {
  RngStream rng(7, 1);
  for (const double lambda : {0.5, 3.0, 25.0, 80.0, 900.0}) {
    const int n = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.next_poisson(lambda));
      s += k;
      s2 += k * k;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    const double mean_se = std::sqrt(lambda / n);
    CHECK(std::abs(mean - lambda) < 5.0 * mean_se);
    CHECK(var == doctest::Approx(lambda).epsilon(0.06));
  }
}

TEST_CASE("poisson small-lambda pmf") {
  RngStream rng(11, 2);
  const double lambda = 3.0;
  const int n = 200000;
  std::vector<int> counts(15, 0);
  for (int i = 0; i < n; ++i) {
    const long k = rng.next_poisson(lambda);
    if (k < 15) ++counts[static_cast<std::size_t>(k)];
  }
  double pk = std::exp(-lambda);
  for (int k = 0; k < 10; ++k) {
    const double expected = n * pk;
    const double se = std::sqrt(expected * (1.0 - pk));
    CHECK(std::abs(counts[static_cast<std::size_t>(k)] - expected) <
          5.0 * se + 5.0);
    pk *= lambda / (k + 1);
  }
}

TEST_CASE("next_below is unbiased and in range") {
  RngStream rng(5, 3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i)
    ++counts[static_cast<std::size_t>(rng.next_below(7))];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("normal quantile reference values") {
  CHECK(normal_quantile(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.95) ==
        doctest::Approx(1.6448536269514722).epsilon(1e-12));
  CHECK(std::abs(normal_quantile(0.5)) < 1e-12);
  CHECK(normal_quantile(0.025) ==
        doctest::Approx(-1.959963984540054).epsilon(1e-12));
  for (double p : {0.001, 0.1, 0.3, 0.7, 0.9, 0.999})
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
}

}  // TEST_SUITE
