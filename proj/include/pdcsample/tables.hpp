#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdcsample/numeric.hpp"
#include "pdcsample/rng.hpp"
#include "pdcsample/stage1.hpp"
#include "pdcsample/structures.hpp"

namespace pdcsample {

enum class TableKind {
  partition_bounded,     // p(j, kappa): partitions of j into parts <= kappa
  distinct_bounded,      // q(j, kappa): distinct parts <= kappa
  bell,                  // B_j
  restricted_assembly,   // p_I(j) for assemblies
  restricted_multiset,   // p_I(j) for multisets
  restricted_selection,  // p_I(j) for selections
};

std::string_view to_string(TableKind kind);
std::optional<TableKind> parse_table_kind(std::string_view name);

/// Immutable table of exact counts.
///
/// Bounded kinds hold entry(j, kappa) for 0 <= j <= n, 0 <= kappa <= k and
/// expose the column T(j) = entry(j, k). One-dimensional kinds hold T(j) for
/// 0 <= j <= n. Restricted multiset/selection tables also keep the prefix
/// counts P(j, r) over the first r sizes of I, which drive unranking.
class CountTable {
 public:
  TableKind kind() const { return kind_; }
  std::size_t max_weight() const { return n_; }
  std::size_t bound() const { return k_; }
  const IndexSet& indices() const { return indices_; }
  bool bounded() const { return kind_ == TableKind::partition_bounded || kind_ == TableKind::distinct_bounded; }

  /// Bounded kinds only; kappa > k is rejected, kappa > j follows entry(j, j).
  const BigInt& entry(std::size_t j, std::size_t kappa) const;

  /// T(j): the bound-k column for bounded kinds, the value for 1-D kinds.
  const BigInt& count(std::size_t j) const;
  const std::vector<BigInt>& counts() const { return column_; }

  /// Component counts of the object with the given rank in 1..count(y).
  SparseCounts unrank(std::size_t y, const BigInt& rank) const;

  /// Text dump: header `kind n k I`, then one row per line of decimal entries
  /// separated by single spaces. Bounded kinds print rows kappa = 1..k over
  /// columns j = 1..n; 1-D kinds print one row j = 0..n.
  std::string dump() const;
  static CountTable parse(std::string_view text);

  /// Replace one entry; for building corrupted fixtures in tests.
  CountTable with_count(std::size_t j, BigInt value) const;

 private:
  friend CountTable build_partition_table(std::size_t n, std::size_t k);
  friend CountTable build_distinct_table(std::size_t n, std::size_t k);
  friend CountTable build_bell(std::size_t n);
  friend CountTable build_restricted_table(const StructureSpec& spec, const IndexSet& indices, std::size_t n);

  CountTable(TableKind kind, std::size_t n, std::size_t k, IndexSet indices)
      : kind_(kind), n_(n), k_(k), indices_(std::move(indices)) {}

  SparseCounts unrank_bounded(std::size_t y, BigInt rank) const;
  SparseCounts unrank_assembly(std::size_t y, BigInt rank) const;
  SparseCounts unrank_prefix(std::size_t y, BigInt rank) const;

  const BigInt& grid(std::size_t j, std::size_t kappa) const { return grid_[j * (k_ + 1) + kappa]; }
  const BigInt& prefix(std::size_t j, std::size_t r) const { return prefix_[j * (indices_.size() + 1) + r]; }

  TableKind kind_;
  std::size_t n_;
  std::size_t k_ = 0;
  IndexSet indices_;
  std::vector<BigInt> grid_;    // bounded kinds, row-major (j, kappa)
  std::vector<BigInt> column_;  // T(0..n)
  std::vector<BigInt> prefix_;  // restricted multiset/selection, row-major (j, r)
  std::vector<std::uint64_t> multiplicities_;  // per position in indices_
  std::vector<std::uint64_t> weights_;         // per position in indices_
};

/// p(j, kappa) = p(j - kappa, kappa) + p(j, kappa - 1), with p(0, kappa) = 1
/// and p(j, 0) = 0 for j >= 1. Requires k <= n.
CountTable build_partition_table(std::size_t n, std::size_t k);

/// q(j, kappa) = q(j - kappa, kappa - 1) + q(j, kappa - 1). Requires k <= n.
CountTable build_distinct_table(std::size_t n, std::size_t k);

/// B_j = sum_i C(j-1, i) B_i.
CountTable build_bell(std::size_t n);

/// p_I(0..n): objects of weight j built only from component sizes in I.
///
/// Assemblies use p_I(j) = sum_{b in I, b <= j} C(j-1, b-1) m_b p_I(j-b).
/// Multisets and selections use the log-derivative recursion
/// j p_I(j) = sum_{i=1}^{j} g_I(i) p_I(j-i) with the tilt set to 1, where
/// g_I(i) = sum over d in I with w_d | i of w_d m_d, negated and signed by
/// (-1)^{i/w_d} for selections. Throws if a value is negative or a division
/// is inexact.
CountTable build_restricted_table(const StructureSpec& spec, const IndexSet& indices, std::size_t n);

/// Part sizes (descending) of the partition of y into parts <= k with the
/// given rank in 1..p(y, k): the largest part is the smallest kappa with
/// p(y, kappa) >= rank; the rank drops by p(y, kappa - 1) and the walk
/// continues at (y - kappa, kappa).
std::vector<std::size_t> unrank_partition(const CountTable& table, std::size_t y, std::size_t k,
                                          const BigInt& rank);
std::vector<std::size_t> unrank_partition(const CountTable& table, std::size_t y, std::size_t k, Rng& rng);

/// Uniform profile of weight y from a restricted or bounded table.
SparseCounts unrank_restricted(const CountTable& table, std::size_t y, Rng& rng);

/// p(0..n) and sigma(1..n) for the divisor-sum sampler.
class EulerTable {
 public:
  explicit EulerTable(std::size_t n);

  std::size_t max_weight() const { return partitions_.size() - 1; }
  const BigInt& partitions(std::size_t j) const { return partitions_.at(j); }
  std::uint64_t sigma(std::size_t j) const { return sigma_.at(j); }

  /// Uniform partition of n, parts descending. Each level draws one rank in
  /// 1..n p(n); its block picks the residual m (block size sigma(n-m) p(m))
  /// and its quotient by p(m) picks the divisor d of n - m with weight d.
  std::vector<std::size_t> sample(std::size_t n, Rng& rng) const;

  /// One level of the walk: (m, d) for a rank in 1..n p(n).
  std::pair<std::size_t, std::size_t> decode(std::size_t n, const BigInt& rank) const;

 private:
  std::vector<BigInt> partitions_;
  std::vector<std::uint64_t> sigma_;
};

std::uint64_t divisor_sum(std::uint64_t n);

/// g_I(1..n) of the multiset/selection recursion at tilt 1 (index 0 unused).
std::vector<BigInt> restricted_log_derivative(const StructureSpec& spec, const IndexSet& indices,
                                              std::size_t n);

std::vector<std::size_t> euler_sample(const EulerTable& table, std::size_t n, Rng& rng);

/// Blocks of a set partition of {1..n}; each block ascending, blocks ordered
/// by their minimum element.
using SetPartition = std::vector<std::vector<std::size_t>>;

void canonicalize(SetPartition& blocks);

/// Uniform labeled set partition with the given block-size profile: shuffle
/// the labels and cut the permutation into consecutive blocks.
SetPartition realize_set_partition(const SparseCounts& profile, std::size_t n, Rng& rng);

std::vector<std::size_t> counts_to_parts(const SparseCounts& counts);
SparseCounts parts_to_counts(const std::vector<std::size_t>& parts);

}  // namespace pdcsample
