#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdcsample/numeric.hpp"
#include "pdcsample/rng.hpp"

namespace pdcsample {

/// The three decomposable classes; their component laws are Poisson,
/// negative binomial and binomial respectively.
enum class StructureClass { assembly, multiset, selection };

std::string_view to_string(StructureClass cls);

/// Component sizes, sorted ascending, each in 1..n.
using IndexSet = std::vector<std::size_t>;

IndexSet full_index_set(std::size_t n);
IndexSet complement(const IndexSet& indices, std::size_t n);
bool contains(const IndexSet& indices, std::size_t i);
std::string to_string(const IndexSet& indices);

/// Tilt stored exactly; `value` is the nearest double, used by fast mode.
struct Tilt {
  Rational exact;
  double value = 0.0;

  static Tilt from_rational(Rational x);
  static Tilt from_double(double x) { return from_rational(rational_from_double(x)); }
};

/// e^{-pi/sqrt(6n)} rounded to a 53-bit dyadic rational.
Tilt tilt_unrestricted(std::uint64_t n);

/// e^{-pi/sqrt(12n)} rounded to a 53-bit dyadic rational.
Tilt tilt_distinct(std::uint64_t n);

/// Root of x e^x = n, rounded to a 64-bit dyadic rational.
Tilt tilt_set_partition(std::uint64_t n);

/// Bisection for x e^x = target on x >= 0; target > 0.
HighPrec solve_x_exp_x(const HighPrec& target);

/// A decomposable class with target weight n, per-size multiplicities m_i,
/// weights w_i and tilt x. Indices run 1..n; index 0 of the internal vectors
/// is unused.
class StructureSpec {
 public:
  StructureSpec(StructureClass cls, std::size_t n, Tilt tilt,
                std::vector<std::uint64_t> multiplicities = {},
                std::vector<std::uint64_t> weights = {});

  static StructureSpec partitions(std::size_t n);
  static StructureSpec partitions(std::size_t n, Tilt tilt);
  static StructureSpec distinct_partitions(std::size_t n);
  static StructureSpec distinct_partitions(std::size_t n, Tilt tilt);
  static StructureSpec set_partitions(std::size_t n);
  static StructureSpec set_partitions(std::size_t n, Tilt tilt);

  StructureClass cls() const { return cls_; }
  std::size_t n() const { return n_; }
  const Tilt& tilt() const { return tilt_; }
  std::uint64_t multiplicity(std::size_t i) const { return multiplicities_.at(i); }
  std::uint64_t weight(std::size_t i) const { return weights_.at(i); }
  bool unit_multiplicities() const;
  bool identity_weights() const;

  /// Same structure with a different tilt.
  StructureSpec with_tilt(Tilt tilt) const;

 private:
  StructureClass cls_;
  std::size_t n_;
  Tilt tilt_;
  std::vector<std::uint64_t> multiplicities_;
  std::vector<std::uint64_t> weights_;
};

enum class LawKind { geometric, binomial, negative_binomial, poisson };

std::string_view to_string(LawKind kind);

/// Law of Z_i: P(Z_i = k) = c_i g_i(k) x^{w_i k}.
///
/// `relative_mass` is g_i(k) x^{w_i k}, exact for every class. `point_mass`
/// multiplies by c_i; that is exact for binomial and negative binomial laws
/// and carries a 2^-128 approximation of e^{-lambda} for Poisson laws.
class TiltedDistribution {
 public:
  TiltedDistribution(StructureClass cls, std::size_t index, std::uint64_t multiplicity,
                     std::uint64_t weight, const Tilt& tilt);

  std::size_t index() const { return index_; }
  LawKind kind() const { return kind_; }
  std::uint64_t multiplicity() const { return multiplicity_; }
  std::uint64_t weight() const { return weight_; }

  /// x^{w}; for Poisson laws, the rate lambda = m x^w / w!.
  const Rational& parameter() const { return parameter_; }
  double parameter_value() const { return parameter_value_; }

  /// Largest k with positive mass (binomial laws only).
  std::optional<std::uint64_t> support_max() const;

  Rational relative_mass(std::uint64_t k) const;
  Rational point_mass(std::uint64_t k) const;
  double point_mass_value(std::uint64_t k) const;

  /// c_i(x) and its log.
  Rational normalization() const;
  double log_normalization() const;

  /// Smallest k maximizing the point mass.
  std::uint64_t mode() const { return mode_; }

  /// P(Z = k) / max_l P(Z = l), exact.
  Rational ratio_to_mode(std::uint64_t k) const;
  double log_ratio_to_mode(std::uint64_t k) const;

  double mean() const;

 private:
  double log_relative_mass(std::uint64_t k) const;

  StructureClass cls_;
  LawKind kind_;
  std::size_t index_;
  std::uint64_t multiplicity_;
  std::uint64_t weight_;
  Rational parameter_;
  double parameter_value_;
  double log_parameter_;
  std::uint64_t mode_ = 0;
};

TiltedDistribution component_distribution(const StructureSpec& spec, std::size_t i);

/// Draws from one component law.
///
/// Exact mode precomputes the CDF as exact rationals down to a 2^-70 tail
/// (further terms are produced on the fly) and inverts a LazyUniform. Fast
/// mode uses floating transforms: log-inversion for geometric laws, sums of
/// Bernoulli/geometric draws for binomial and negative binomial laws, and
/// inversion or PTRS for Poisson laws.
class ComponentSampler {
 public:
  ComponentSampler(TiltedDistribution dist, Mode mode);

  const TiltedDistribution& distribution() const { return dist_; }
  Mode mode() const { return mode_; }

  std::uint64_t sample(Rng& rng) const;

 private:
  std::uint64_t sample_exact(Rng& rng) const;
  std::uint64_t sample_fast(Rng& rng) const;

  TiltedDistribution dist_;
  Mode mode_;
  std::vector<Threshold> cdf_;
  double log_q_ = 0.0;
  double poisson_zero_mass_ = 0.0;
};

std::uint64_t sample_component(const TiltedDistribution& dist, Rng& rng, Mode mode);

/// Standard PTRS Poisson generator (transformed rejection with squeeze).
std::uint64_t sample_poisson_fast(double lambda, Rng& rng);

}  // namespace pdcsample
