#pragma once

#include <cstdint>
#include <random>

#include "pdcsample/numeric.hpp"

namespace pdcsample {

/// Arithmetic used for acceptance tests and variate generation.
///   exact: comparisons against exact rationals on a lazily extended bit stream.
///   fast:  53-bit doubles.
enum class Mode { exact, fast };

/// Seedable generator with a fixed, platform-independent output sequence.
///
/// Only the raw engine output is used; every derived variate (doubles, bounded
/// integers, big ranks) is computed here rather than through <random>
/// distributions, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Stream splitting rule: engine seed = mix(mix(root) + stream), where mix is
  /// the splitmix64 finalizer. Child streams of one root never share a seed.
  static Rng fork(std::uint64_t root_seed, std::uint64_t stream) { return Rng(root_seed, stream); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe to take the log of.
  double uniform_positive() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  /// Standard exponential variate.
  double exponential();

  /// Uniform on {0, ..., bound - 1}; bound > 0.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Uniform on {1, ..., count}; count > 0. Consumes whole 64-bit words.
  BigInt uniform_rank(const BigInt& count);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t value);

/// A threshold in [0, 1] with a cached 64-bit fixed-point prefix, so most
/// exact comparisons resolve without big-number arithmetic.
class Threshold {
 public:
  Threshold() = default;
  explicit Threshold(Rational value);

  const Rational& value() const { return value_; }
  bool at_least_one() const { return at_least_one_; }
  bool is_zero() const { return is_zero_; }
  std::uint64_t floor64() const { return floor64_; }
  double approx() const { return approx_; }

 private:
  Rational value_{0};
  std::uint64_t floor64_ = 0;  // floor(value * 2^64) when value < 1
  bool at_least_one_ = false;
  bool is_zero_ = true;
  double approx_ = 0.0;
};

/// One uniform U on [0, 1) whose binary expansion is drawn on demand.
///
/// After k words have been drawn, U lies in [B / 2^(64k), (B + 1) / 2^(64k)).
/// A comparison with a rational t is decided as soon as that interval falls
/// entirely on one side of t; it needs more words with probability 2^-64 per
/// round, so every comparison terminates with probability one.
class LazyUniform {
 public:
  explicit LazyUniform(Rng& rng) : rng_(&rng), head_(rng.next_u64()) {}

  /// True iff U < t.
  bool less_than(const Threshold& t);
  bool less_than(const Rational& t);

  std::uint64_t words_drawn() const { return words_; }

 private:
  bool resolve_slow(const Rational& t);

  Rng* rng_;
  std::uint64_t head_;
  BigInt tail_;  // all words drawn so far, head first; valid when words_ > 1
  std::uint64_t words_ = 1;
};

}  // namespace pdcsample
