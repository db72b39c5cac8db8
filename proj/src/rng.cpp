#include "pdcsample/rng.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace pdcsample {

std::uint64_t splitmix64(std::uint64_t value) {
  value += 0x9E3779B97F4A7C15ULL;
  value = (value ^ (value >> 30)) * 0xBF58476D1CE4E5B9ULL;
  value = (value ^ (value >> 27)) * 0x94D049BB133111EBULL;
  return value ^ (value >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(splitmix64(splitmix64(seed) + stream)) {}

double Rng::exponential() { return -std::log(uniform_positive()); }

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
  if ((bound & (bound - 1)) == 0) return next_u64() & (bound - 1);
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t value = next_u64();
    if (value >= limit) return value % bound;
  }
}

BigInt Rng::uniform_rank(const BigInt& count) {
  if (sgn(count) <= 0) throw std::invalid_argument("uniform_rank: count must be positive");
  if (count == 1) return BigInt(1);
  if (mpz_fits_ulong_p(count.get_mpz_t()) != 0) {
    return BigInt(static_cast<unsigned long>(uniform_below(count.get_ui()) + 1));
  }
  const std::size_t bits = mpz_sizeinbase(count.get_mpz_t(), 2);
  const std::size_t words = (bits + 63) / 64;
  const std::size_t excess = words * 64 - bits;
  for (;;) {
    BigInt candidate = 0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t word = next_u64();
      if (w == 0 && excess > 0) word >>= excess;
      candidate <<= 64;
      candidate += BigInt(static_cast<unsigned long>(word));
    }
    if (candidate < count) return candidate + 1;
  }
}

Threshold::Threshold(Rational value) : value_(std::move(value)) {
  if (sgn(value_) < 0) throw std::invalid_argument("Threshold: negative value");
  is_zero_ = sgn(value_) == 0;
  at_least_one_ = value_ >= 1;
  approx_ = at_least_one_ ? 1.0 : value_.get_d();
  if (!at_least_one_ && !is_zero_) {
    BigInt scaled = value_.get_num();
    scaled <<= 64;
    scaled /= value_.get_den();  // floor, fits in 64 bits since value < 1
    floor64_ = 0;
    mpz_export(&floor64_, nullptr, -1, sizeof(floor64_), 0, 0, scaled.get_mpz_t());
  }
}

bool LazyUniform::less_than(const Threshold& t) {
  if (t.is_zero()) return false;
  if (t.at_least_one()) return true;
  if (words_ == 1) {
    if (head_ < t.floor64()) return true;  // U < (head+1)/2^64 <= floor64/2^64 <= t
    if (head_ > t.floor64()) return false;  // U >= head/2^64 >= (floor64+1)/2^64 > t
  }
  return resolve_slow(t.value());
}

bool LazyUniform::less_than(const Rational& t) {
  if (sgn(t) <= 0) return false;
  if (t >= 1) return true;
  return resolve_slow(t);
}

bool LazyUniform::resolve_slow(const Rational& t) {
  if (words_ == 1) tail_ = BigInt(static_cast<unsigned long>(head_));
  for (;;) {
    // U in [B / 2^(64k), (B + 1) / 2^(64k)); compare both ends against num/den.
    BigInt scaled_num = t.get_num();
    scaled_num <<= static_cast<mp_bitcnt_t>(64 * words_);
    const BigInt low = tail_ * t.get_den();
    if (low >= scaled_num) return false;
    if (low + t.get_den() <= scaled_num) return true;
    tail_ <<= 64;
    tail_ += BigInt(static_cast<unsigned long>(rng_->next_u64()));
    ++words_;
  }
}

}  // namespace pdcsample
