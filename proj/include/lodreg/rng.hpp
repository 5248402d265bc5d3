#pragma once

#include <array>
#include <cstdint>

namespace lodreg {

// Philox4x64-10 counter-based generator. A block is a pure function of
// (key, counter), so independent streams keyed by (seed, stream id) can be
// generated in any order; replicate results do not depend on scheduling.
class Philox4x64 {
 public:
  using Block = std::array<std::uint64_t, 4>;

  static Block block(std::uint64_t key0, std::uint64_t key1,
                     std::uint64_t ctr0, std::uint64_t ctr1 = 0,
                     std::uint64_t ctr2 = 0, std::uint64_t ctr3 = 0);
};

// Sequential view over one Philox stream: key = (seed, stream), counter
// increments per block. Box-Muller pairs are cached per stream.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double next_double();                 // uniform [0, 1)
  double next_normal();                 // standard normal (Box-Muller)
  double next_normal(double mean, double sd);
  bool next_bernoulli(double p);
  std::uint64_t next_below(std::uint64_t n);  // uniform on {0,...,n-1}
  long next_poisson(double lambda);

 private:
  void refill();

  std::uint64_t key0_, key1_;
  std::uint64_t counter_ = 0;
  Philox4x64::Block buf_{};
  int buf_pos_ = 4;  // force refill on first use
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// Standard normal quantile, accurate to ~1e-15 (rough seed + Newton on the
// erfc-based CDF).
double normal_quantile(double p);

double normal_cdf(double x);

}  // namespace lodreg
