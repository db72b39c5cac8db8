#include "pdcsample/tables.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pdcsample {

namespace {

constexpr std::string_view kNoValue = "-";

void require(bool condition, const char* message) {
  if (!condition) throw std::invalid_argument(message);
}

BigInt big(std::uint64_t value) { return BigInt(static_cast<unsigned long>(value)); }

void record(SparseCounts& counts, std::size_t index, std::uint64_t z) {
  if (z == 0) return;
  if (!counts.empty() && counts.back().first == index) {
    counts.back().second += z;
  } else {
    counts.emplace_back(index, z);
  }
}

}  // namespace

std::string_view to_string(TableKind kind) {
  switch (kind) {
    case TableKind::partition_bounded: return "partitionBounded";
    case TableKind::distinct_bounded: return "distinctBounded";
    case TableKind::bell: return "bell";
    case TableKind::restricted_assembly: return "restrictedAssembly";
    case TableKind::restricted_multiset: return "restrictedMultiset";
    case TableKind::restricted_selection: return "restrictedSelection";
  }
  return "unknown";
}

std::optional<TableKind> parse_table_kind(std::string_view name) {
  for (TableKind kind : {TableKind::partition_bounded, TableKind::distinct_bounded, TableKind::bell,
                         TableKind::restricted_assembly, TableKind::restricted_multiset,
                         TableKind::restricted_selection}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

const BigInt& CountTable::entry(std::size_t j, std::size_t kappa) const {
  if (!bounded()) throw std::logic_error("CountTable::entry: table is one-dimensional");
  if (j > n_) throw std::out_of_range("CountTable::entry: weight beyond table");
  if (kappa > k_) throw std::out_of_range("CountTable::entry: bound beyond table");
  return grid(j, kappa);
}

const BigInt& CountTable::count(std::size_t j) const {
  if (j > n_) throw std::out_of_range("CountTable::count: weight beyond table");
  return column_[j];
}

SparseCounts CountTable::unrank(std::size_t y, const BigInt& rank) const {
  if (y > n_) throw std::out_of_range("CountTable::unrank: weight beyond table");
  if (sgn(column_[y]) == 0) throw std::domain_error("CountTable::unrank: unreachable weight");
  if (rank < 1 || rank > column_[y]) throw std::out_of_range("CountTable::unrank: rank outside 1..T(y)");
  switch (kind_) {
    case TableKind::partition_bounded:
    case TableKind::distinct_bounded:
      return unrank_bounded(y, rank);
    case TableKind::bell:
    case TableKind::restricted_assembly:
      return unrank_assembly(y, rank);
    case TableKind::restricted_multiset:
    case TableKind::restricted_selection:
      if (prefix_.empty()) throw std::logic_error("CountTable::unrank: parsed tables cannot unrank");
      return unrank_prefix(y, rank);
  }
  throw std::logic_error("CountTable::unrank: unknown kind");
}

SparseCounts CountTable::unrank_bounded(std::size_t y, BigInt rank) const {
  std::vector<std::size_t> parts;
  std::size_t limit = k_;
  const bool distinct = kind_ == TableKind::distinct_bounded;
  while (y > 0) {
    const std::size_t top = std::min(limit, y);
    // Entries are nondecreasing in kappa; find the first that reaches rank.
    std::size_t lo = 1;
    std::size_t hi = top;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (grid(y, mid) >= rank) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    const std::size_t part = lo;
    if (grid(y, part) < rank) throw std::logic_error("unrank: rank exceeds table entry");
    rank -= grid(y, part - 1);
    parts.push_back(part);
    y -= part;
    limit = distinct ? part - 1 : part;
  }
  return parts_to_counts(parts);
}

SparseCounts CountTable::unrank_assembly(std::size_t y, BigInt rank) const {
  std::vector<std::size_t> blocks;
  while (y > 0) {
    bool chosen = false;
    for (std::size_t pos = 0; pos < indices_.size() && indices_[pos] <= y; ++pos) {
      const std::size_t b = indices_[pos];
      const BigInt& rest = column_[y - b];
      if (sgn(rest) == 0) continue;
      const BigInt block = binomial(y - 1, b - 1) * big(multiplicities_[pos]) * rest;
      if (rank <= block) {
        // The quotient picks labels and type; the remainder ranks the rest.
        rank = (rank - 1) % rest + 1;
        blocks.push_back(b);
        y -= b;
        chosen = true;
        break;
      }
      rank -= block;
    }
    if (!chosen) throw std::logic_error("unrank: rank exceeds restricted assembly count");
  }
  return parts_to_counts(blocks);
}

SparseCounts CountTable::unrank_prefix(std::size_t y, BigInt rank) const {
  const bool selection = kind_ == TableKind::restricted_selection;
  SparseCounts reversed;
  for (std::size_t r = indices_.size(); r >= 1; --r) {
    const std::uint64_t w = weights_[r - 1];
    const std::uint64_t m = multiplicities_[r - 1];
    bool chosen = false;
    for (std::uint64_t c = 0; c * w <= y; ++c) {
      if (selection && c > m) break;
      const BigInt& rest = prefix(y - c * w, r - 1);
      if (sgn(rest) == 0) continue;
      const BigInt ways = selection ? binomial(m, c) : binomial(m + c - 1, c);
      const BigInt block = ways * rest;
      if (rank <= block) {
        rank = (rank - 1) % rest + 1;
        if (c > 0) reversed.emplace_back(indices_[r - 1], c);
        y -= c * w;
        chosen = true;
        break;
      }
      rank -= block;
    }
    if (!chosen) throw std::logic_error("unrank: rank exceeds restricted count");
  }
  if (y != 0) throw std::logic_error("unrank: residual weight left after walk");
  std::reverse(reversed.begin(), reversed.end());
  return reversed;
}

std::string CountTable::dump() const {
  std::ostringstream out;
  out << to_string(kind_) << ' ' << n_ << ' ';
  if (bounded()) {
    out << k_;
  } else {
    out << kNoValue;
  }
  out << ' ' << (bounded() || kind_ == TableKind::bell ? std::string(kNoValue) : to_string(indices_)) << '\n';
  if (bounded()) {
    for (std::size_t kappa = 1; kappa <= k_; ++kappa) {
      for (std::size_t j = 1; j <= n_; ++j) {
        if (j > 1) out << ' ';
        out << grid(j, kappa).get_str();
      }
      out << '\n';
    }
  } else {
    for (std::size_t j = 0; j <= n_; ++j) {
      if (j > 0) out << ' ';
      out << column_[j].get_str();
    }
    out << '\n';
  }
  return out.str();
}

CountTable CountTable::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string kind_name, n_field, k_field, index_field;
  if (!(in >> kind_name >> n_field >> k_field >> index_field)) {
    throw std::invalid_argument("CountTable::parse: missing header");
  }
  const auto kind = parse_table_kind(kind_name);
  if (!kind) throw std::invalid_argument("CountTable::parse: unknown kind " + kind_name);
  const std::size_t n = std::stoul(n_field);
  IndexSet indices;
  if (index_field != kNoValue) {
    std::istringstream list(index_field);
    std::string item;
    while (std::getline(list, item, ',')) indices.push_back(std::stoul(item));
  }
  auto read_entry = [&in]() {
    std::string token;
    if (!(in >> token)) throw std::invalid_argument("CountTable::parse: truncated table");
    BigInt value;
    if (value.set_str(token, 10) != 0) throw std::invalid_argument("CountTable::parse: bad entry " + token);
    return value;
  };

  if (*kind == TableKind::partition_bounded || *kind == TableKind::distinct_bounded) {
    const std::size_t k = std::stoul(k_field);
    CountTable table(*kind, n, k, {});
    table.grid_.assign((n + 1) * (k + 1), BigInt(0));
    for (std::size_t kappa = 0; kappa <= k; ++kappa) table.grid_[kappa] = 1;  // j = 0
    for (std::size_t kappa = 1; kappa <= k; ++kappa) {
      for (std::size_t j = 1; j <= n; ++j) table.grid_[j * (k + 1) + kappa] = read_entry();
    }
    table.column_.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) table.column_[j] = table.grid(j, k);
    return table;
  }
  if (*kind == TableKind::bell) indices = full_index_set(n);
  CountTable table(*kind, n, 0, indices);
  table.multiplicities_.assign(indices.size(), 1);
  table.weights_.assign(indices.begin(), indices.end());
  table.column_.reserve(n + 1);
  for (std::size_t j = 0; j <= n; ++j) table.column_.push_back(read_entry());
  return table;
}

CountTable CountTable::with_count(std::size_t j, BigInt value) const {
  CountTable copy = *this;
  copy.column_.at(j) = value;
  if (bounded()) copy.grid_.at(j * (k_ + 1) + k_) = std::move(value);
  return copy;
}

CountTable build_partition_table(std::size_t n, std::size_t k) {
  require(k <= n, "build_partition_table: k must not exceed n");
  CountTable table(TableKind::partition_bounded, n, k, {});
  table.grid_.assign((n + 1) * (k + 1), BigInt(0));
  const std::size_t stride = k + 1;
  for (std::size_t kappa = 0; kappa <= k; ++kappa) table.grid_[kappa] = 1;
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t kappa = 1; kappa <= k; ++kappa) {
      BigInt& cell = table.grid_[j * stride + kappa];
      cell = table.grid_[j * stride + kappa - 1];
      if (j >= kappa) cell += table.grid_[(j - kappa) * stride + kappa];
    }
  }
  table.column_.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) table.column_[j] = table.grid_[j * stride + k];
  return table;
}

CountTable build_distinct_table(std::size_t n, std::size_t k) {
  require(k <= n, "build_distinct_table: k must not exceed n");
  CountTable table(TableKind::distinct_bounded, n, k, {});
  table.grid_.assign((n + 1) * (k + 1), BigInt(0));
  const std::size_t stride = k + 1;
  for (std::size_t kappa = 0; kappa <= k; ++kappa) table.grid_[kappa] = 1;
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t kappa = 1; kappa <= k; ++kappa) {
      BigInt& cell = table.grid_[j * stride + kappa];
      cell = table.grid_[j * stride + kappa - 1];
      if (j >= kappa) cell += table.grid_[(j - kappa) * stride + kappa - 1];
    }
  }
  table.column_.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) table.column_[j] = table.grid_[j * stride + k];
  return table;
}

CountTable build_bell(std::size_t n) {
  CountTable table(TableKind::bell, n, 0, full_index_set(n));
  table.multiplicities_.assign(n, 1);
  table.weights_.assign(table.indices_.begin(), table.indices_.end());
  table.column_.assign(n + 1, BigInt(0));
  table.column_[0] = 1;
  std::vector<BigInt> pascal{BigInt(1)};  // row j-1 of Pascal's triangle
  for (std::size_t j = 1; j <= n; ++j) {
    BigInt total = 0;
    for (std::size_t i = 0; i < j; ++i) total += pascal[i] * table.column_[i];
    table.column_[j] = total;
    std::vector<BigInt> next(j + 1, BigInt(1));
    for (std::size_t i = 1; i < j; ++i) next[i] = pascal[i - 1] + pascal[i];
    pascal = std::move(next);
  }
  return table;
}

std::vector<BigInt> restricted_log_derivative(const StructureSpec& spec, const IndexSet& indices,
                                              std::size_t n) {
  require(spec.cls() != StructureClass::assembly, "restricted_log_derivative: multisets and selections only");
  std::vector<BigInt> g(n + 1, BigInt(0));
  const bool selection = spec.cls() == StructureClass::selection;
  for (std::size_t d : indices) {
    const std::uint64_t w = spec.weight(d);
    const BigInt term = big(w) * big(spec.multiplicity(d));
    for (std::uint64_t t = 1; t * w <= n; ++t) {
      // Selections: -(w m)(-1)^t, i.e. +w m for odd t and -w m for even t.
      if (selection && t % 2 == 0) {
        g[t * w] -= term;
      } else {
        g[t * w] += term;
      }
    }
  }
  return g;
}

CountTable build_restricted_table(const StructureSpec& spec, const IndexSet& indices, std::size_t n) {
  require(!indices.empty(), "build_restricted_table: index set must be nonempty");
  require(std::is_sorted(indices.begin(), indices.end()) &&
              std::adjacent_find(indices.begin(), indices.end()) == indices.end(),
          "build_restricted_table: index set must be sorted and distinct");
  require(indices.front() >= 1 && indices.back() <= spec.n(), "build_restricted_table: index outside 1..n");

  TableKind kind = TableKind::restricted_assembly;
  if (spec.cls() == StructureClass::multiset) kind = TableKind::restricted_multiset;
  if (spec.cls() == StructureClass::selection) kind = TableKind::restricted_selection;
  CountTable table(kind, n, 0, indices);
  for (std::size_t i : indices) {
    table.multiplicities_.push_back(spec.multiplicity(i));
    table.weights_.push_back(spec.weight(i));
  }
  table.column_.assign(n + 1, BigInt(0));
  table.column_[0] = 1;

  if (kind == TableKind::restricted_assembly) {
    std::vector<BigInt> pascal{BigInt(1)};  // row j-1
    for (std::size_t j = 1; j <= n; ++j) {
      BigInt total = 0;
      for (std::size_t pos = 0; pos < indices.size() && indices[pos] <= j; ++pos) {
        const std::size_t b = indices[pos];
        total += pascal[b - 1] * big(table.multiplicities_[pos]) * table.column_[j - b];
      }
      table.column_[j] = total;
      std::vector<BigInt> next(j + 1, BigInt(1));
      for (std::size_t i = 1; i < j; ++i) next[i] = pascal[i - 1] + pascal[i];
      pascal = std::move(next);
    }
    return table;
  }

  const std::vector<BigInt> g = restricted_log_derivative(spec, indices, n);
  for (std::size_t j = 1; j <= n; ++j) {
    BigInt total = 0;
    for (std::size_t i = 1; i <= j; ++i) {
      if (sgn(g[i]) != 0) total += g[i] * table.column_[j - i];
    }
    if (mpz_divisible_ui_p(total.get_mpz_t(), j) == 0) {
      throw std::domain_error("build_restricted_table: recursion produced a non-integer count");
    }
    mpz_divexact_ui(total.get_mpz_t(), total.get_mpz_t(), j);
    if (sgn(total) < 0) throw std::domain_error("build_restricted_table: recursion produced a negative count");
    table.column_[j] = std::move(total);
  }

  // Prefix counts over the first r sizes: multiply by (1 - y^w)^{-m} or (1 + y^w)^m.
  const std::size_t stride = indices.size() + 1;
  table.prefix_.assign((n + 1) * stride, BigInt(0));
  std::vector<BigInt> current(n + 1, BigInt(0));
  current[0] = 1;
  for (std::size_t j = 0; j <= n; ++j) table.prefix_[j * stride] = current[j];
  for (std::size_t r = 1; r <= indices.size(); ++r) {
    const std::size_t w = table.weights_[r - 1];
    for (std::uint64_t rep = 0; rep < table.multiplicities_[r - 1]; ++rep) {
      if (w > n) break;
      if (kind == TableKind::restricted_multiset) {
        for (std::size_t j = w; j <= n; ++j) current[j] += current[j - w];
      } else {
        for (std::size_t j = n; j >= w; --j) current[j] += current[j - w];
      }
    }
    for (std::size_t j = 0; j <= n; ++j) table.prefix_[j * stride + r] = current[j];
  }
  for (std::size_t j = 0; j <= n; ++j) {
    if (current[j] != table.column_[j]) {
      throw std::logic_error("build_restricted_table: prefix counts disagree with the divisor recursion");
    }
  }
  return table;
}

std::vector<std::size_t> unrank_partition(const CountTable& table, std::size_t y, std::size_t k,
                                          const BigInt& rank) {
  if (table.kind() != TableKind::partition_bounded) {
    throw std::invalid_argument("unrank_partition: needs a partitionBounded table");
  }
  if (y > table.max_weight() || k > table.bound()) throw std::out_of_range("unrank_partition: outside table");
  const BigInt& total = table.entry(y, std::min(k, y));
  if (sgn(total) == 0) throw std::domain_error("unrank_partition: unreachable target");
  if (rank < 1 || rank > total) throw std::out_of_range("unrank_partition: rank outside 1..p(y,k)");
  std::vector<std::size_t> parts;
  BigInt remaining = rank;
  std::size_t limit = k;
  while (y > 0) {
    const std::size_t top = std::min(limit, y);
    std::size_t part = 1;
    while (table.entry(y, part) < remaining) ++part;
    if (part > top) throw std::logic_error("unrank_partition: rank exceeds entry");
    remaining -= table.entry(y, part - 1);
    parts.push_back(part);
    y -= part;
    limit = part;
  }
  return parts;
}

std::vector<std::size_t> unrank_partition(const CountTable& table, std::size_t y, std::size_t k, Rng& rng) {
  if (y > table.max_weight() || k > table.bound()) throw std::out_of_range("unrank_partition: outside table");
  const BigInt& total = table.entry(y, std::min(k, y));
  if (sgn(total) == 0) throw std::domain_error("unrank_partition: unreachable target");
  return unrank_partition(table, y, k, rng.uniform_rank(total));
}

SparseCounts unrank_restricted(const CountTable& table, std::size_t y, Rng& rng) {
  if (y > table.max_weight()) throw std::out_of_range("unrank_restricted: weight beyond table");
  const BigInt& total = table.count(y);
  if (sgn(total) == 0) throw std::domain_error("unrank_restricted: unreachable weight");
  return table.unrank(y, rng.uniform_rank(total));
}

std::uint64_t divisor_sum(std::uint64_t n) {
  std::uint64_t total = 0;
  for (std::uint64_t d = 1; d * d <= n; ++d) {
    if (n % d != 0) continue;
    total += d;
    if (d != n / d) total += n / d;
  }
  return total;
}

EulerTable::EulerTable(std::size_t n) : partitions_(n + 1, BigInt(0)), sigma_(n + 1, 0) {
  partitions_[0] = 1;
  for (std::size_t j = 1; j <= n; ++j) sigma_[j] = divisor_sum(j);
  for (std::size_t j = 1; j <= n; ++j) {
    BigInt total = 0;
    for (std::size_t m = 0; m < j; ++m) total += big(sigma_[j - m]) * partitions_[m];
    mpz_divexact_ui(total.get_mpz_t(), total.get_mpz_t(), j);
    partitions_[j] = std::move(total);
  }
}

std::pair<std::size_t, std::size_t> EulerTable::decode(std::size_t n, const BigInt& rank) const {
  BigInt remaining = rank;
  for (std::size_t m = 0; m < n; ++m) {
    const BigInt block = big(sigma_[n - m]) * partitions_[m];
    if (remaining > block) {
      remaining -= block;
      continue;
    }
    // Within the block, (rank - 1) / p(m) is uniform on 0..sigma(n-m)-1.
    const BigInt slot = (remaining - 1) / partitions_[m];
    std::uint64_t position = slot.get_ui();
    const std::size_t residual = n - m;
    for (std::size_t d = 1; d <= residual; ++d) {
      if (residual % d != 0) continue;
      if (position < d) return {m, d};
      position -= d;
    }
    throw std::logic_error("EulerTable::decode: divisor slot out of range");
  }
  throw std::out_of_range("EulerTable::decode: rank beyond n p(n)");
}

std::vector<std::size_t> EulerTable::sample(std::size_t n, Rng& rng) const {
  if (n > max_weight()) throw std::out_of_range("EulerTable::sample: n beyond table");
  std::vector<std::size_t> parts;
  while (n > 0) {
    const BigInt range = big(n) * partitions_[n];
    const auto [m, d] = decode(n, rng.uniform_rank(range));
    parts.insert(parts.end(), (n - m) / d, d);
    n = m;
  }
  std::sort(parts.begin(), parts.end(), std::greater<>());
  return parts;
}

std::vector<std::size_t> euler_sample(const EulerTable& table, std::size_t n, Rng& rng) {
  return table.sample(n, rng);
}

void canonicalize(SetPartition& blocks) {
  for (auto& block : blocks) std::sort(block.begin(), block.end());
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

SetPartition realize_set_partition(const SparseCounts& profile, std::size_t n, Rng& rng) {
  std::size_t total = 0;
  for (const auto& [size, count] : profile) total += size * count;
  if (total != n) throw std::invalid_argument("realize_set_partition: profile does not sum to n");
  std::vector<std::size_t> labels(n);
  std::iota(labels.begin(), labels.end(), std::size_t{1});
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(labels[i - 1], labels[j]);
  }
  SetPartition blocks;
  std::size_t cursor = 0;
  for (const auto& [size, count] : profile) {
    for (std::uint64_t c = 0; c < count; ++c) {
      blocks.emplace_back(labels.begin() + static_cast<std::ptrdiff_t>(cursor),
                          labels.begin() + static_cast<std::ptrdiff_t>(cursor + size));
      cursor += size;
    }
  }
  canonicalize(blocks);
  return blocks;
}

std::vector<std::size_t> counts_to_parts(const SparseCounts& counts) {
  std::vector<std::size_t> parts;
  for (auto it = counts.rbegin(); it != counts.rend(); ++it) parts.insert(parts.end(), it->second, it->first);
  return parts;
}

SparseCounts parts_to_counts(const std::vector<std::size_t>& parts) {
  std::vector<std::size_t> sorted = parts;
  std::sort(sorted.begin(), sorted.end());
  SparseCounts counts;
  for (std::size_t part : sorted) record(counts, part, 1);
  return counts;
}

}  // namespace pdcsample
