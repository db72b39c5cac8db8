#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "pdcsample/numeric.hpp"
#include "pdcsample/stage1.hpp"
#include "pdcsample/structures.hpp"
#include "pdcsample/tables.hpp"

namespace pdcsample {

inline constexpr std::size_t kMaxEnumerationWeight = 14;
inline constexpr std::size_t kMaxLabeledWeight = 8;

/// Every object of weight n, grouped by component profile.
///
/// `objects[p]` is the number of objects with profile `profiles[p]`:
///   multiset  prod C(m_i + z_i - 1, z_i)
///   selection prod C(m_i, z_i)
///   assembly  n! prod m_i^{z_i} / (i!^{z_i} z_i!)
/// For plain set partitions (m = 1, w_i = i, n <= 8) the labeled block
/// families are listed too, in canonical form.
struct ObjectCensus {
  StructureClass cls;
  std::size_t n = 0;
  std::vector<SparseCounts> profiles;  // lexicographic
  std::vector<BigInt> objects;
  BigInt total;
  std::vector<SetPartition> labeled;  // sorted

  std::size_t size() const { return profiles.size(); }
  /// Position of a profile; throws std::logic_error if it is not an object.
  std::size_t index_of(const SparseCounts& profile) const;
  std::size_t index_of(const SetPartition& blocks) const;
  /// P(profile) under the uniform law on objects.
  std::vector<double> profile_probabilities() const;
};

/// Backtracking over component counts; `indices` restricts the sizes used
/// (all of 1..n by default) and `weight` the target (n by default). Throws
/// std::length_error above the size guard.
ObjectCensus enumerate(const StructureSpec& spec, const std::optional<IndexSet>& indices = std::nullopt,
                       std::optional<std::size_t> weight = std::nullopt);

/// Counts of objects of every weight 0..n built from `indices`, by brute
/// force; the ground truth for restricted tables.
std::vector<BigInt> brute_force_counts(const StructureSpec& spec, const IndexSet& indices, std::size_t n);

/// Set partitions of {1..n} via restricted growth strings.
std::vector<SetPartition> enumerate_set_partitions(std::size_t n);

/// Partitions of y into parts <= k, each descending, in reverse lexicographic order.
std::vector<std::vector<std::size_t>> enumerate_partitions(std::size_t y, std::size_t k, bool distinct = false);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  double min_expected = 0.0;
};

/// Pearson goodness of fit of observed cell counts against probabilities.
ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& observed, const std::vector<double>& probs);

/// Profiles against the uniform law on objects. An unmapped sample throws.
ChiSquareResult chi_square_uniformity(const std::vector<SparseCounts>& samples, const ObjectCensus& census);
/// Labeled set partitions against the uniform law.
ChiSquareResult chi_square_uniformity(const std::vector<SetPartition>& samples, const ObjectCensus& census);

/// Two-sample homogeneity test on a common set of cells.
ChiSquareResult chi_square_homogeneity(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b);

/// Per-test significance level for a grid of `tests` chi-square tests.
double bonferroni_threshold(std::size_t tests, double family = 0.05, double cap = 1e-3);

/// P(Z = z | sum w_i Z_i = n) built from the exact component laws.
struct ConditionalLaw {
  ObjectCensus census;
  std::vector<Rational> profile_probability;
  std::vector<Rational> object_probability;  // profile probability / objects
  bool uniform = false;
};

/// Throws std::logic_error unless every object gets the same probability.
ConditionalLaw exact_conditional_law(const StructureSpec& spec);
/// Same computation without the uniformity assertion.
ConditionalLaw conditional_law(const StructureSpec& spec);

/// P(sum w_i Z_i = n) by convolving the component laws over 1..n. Exact for
/// multisets and selections; Poisson laws carry the 2^-128 error of e^{-lambda}.
Rational exact_hit_probability(const StructureSpec& spec);

}  // namespace pdcsample
