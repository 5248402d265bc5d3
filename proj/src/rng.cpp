#include "lodreg/rng.hpp"

#include <cmath>
#include <numbers>

#include "lodreg/errors.hpp"

namespace lodreg {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mul128(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                   std::uint64_t& lo) {
  const unsigned __int128 prod =
      static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
  hi = static_cast<std::uint64_t>(prod >> 64);
  lo = static_cast<std::uint64_t>(prod);
}

inline void philox_round(std::array<std::uint64_t, 4>& ctr, std::uint64_t k0,
                         std::uint64_t k1) {
  std::uint64_t hi0, lo0, hi1, lo1;
  mul128(kMul0, ctr[0], hi0, lo0);
  mul128(kMul1, ctr[2], hi1, lo1);
  ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
}

}  // namespace

Philox4x64::Block Philox4x64::block(std::uint64_t key0, std::uint64_t key1,
                                    std::uint64_t ctr0, std::uint64_t ctr1,
                                    std::uint64_t ctr2, std::uint64_t ctr3) {
  Block ctr{ctr0, ctr1, ctr2, ctr3};
  philox_round(ctr, key0, key1);
  for (int r = 1; r < 10; ++r) {
    key0 += kWeyl0;
    key1 += kWeyl1;
    philox_round(ctr, key0, key1);
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : key0_(seed), key1_(stream) {}

void RngStream::refill() {
  buf_ = Philox4x64::block(key0_, key1_, counter_++);
  buf_pos_ = 0;
}

std::uint64_t RngStream::next_u64() {
  if (buf_pos_ >= 4) refill();
  return buf_[buf_pos_++];
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = 1.0 - next_double();  // (0, 1]
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(a);
  have_cached_normal_ = true;
  return r * std::cos(a);
}

double RngStream::next_normal(double mean, double sd) {
  return mean + sd * next_normal();
}

bool RngStream::next_bernoulli(double p) { return next_double() < p; }

std::uint64_t RngStream::next_below(std::uint64_t n) {
  if (n == 0) throw ConfigError("next_below: n must be positive");
  const std::uint64_t limit = n * (~0ULL / n);  // rejection bound
  std::uint64_t u;
  do {
    u = next_u64();
  } while (u >= limit);
  return u % n;
}

long RngStream::next_poisson(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw NumericError("poisson: invalid rate");
  if (lambda < 30.0) {
    // inversion by sequential search
    const double el = std::exp(-lambda);
    double p = el;
    double cdf = p;
    const double u = next_double();
    long k = 0;
    while (u > cdf && k < 10000) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  // Hormann's PTRS transformed rejection, exact for lambda >= 10.
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_lambda = std::log(lambda);
  for (;;) {
    double u = next_double() - 0.5;
    double v = next_double();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = -lambda + kf * log_lambda - std::lgamma(kf + 1.0);
    if (lhs <= rhs) return static_cast<long>(kf);
  }
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal_quantile: p in (0,1)");
  // bracketed bisection, then Newton polish clamped to the bracket
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    const double err = normal_cdf(x) - p;
    const double pdf =
        std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    if (pdf <= 0.0) break;
    double next = x - err / pdf;
    if (next <= lo || next >= hi) break;
    x = next;
  }
  return x;
}

}  // namespace lodreg
