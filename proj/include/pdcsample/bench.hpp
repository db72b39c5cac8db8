#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdcsample/pdc.hpp"
#include "pdcsample/rng.hpp"
#include "pdcsample/structures.hpp"

namespace pdcsample {

/// The named structures the benchmarks and the CLI know how to build.
enum class NamedStructure { partitions, distinct_partitions, set_partitions };

std::string_view to_string(NamedStructure structure);
std::optional<NamedStructure> parse_named_structure(std::string_view name);

/// The structure at weight n with its default tilt.
StructureSpec make_structure(NamedStructure structure, std::size_t n);

/// Asymptotic expected attempts where a closed form exists:
///   partitions   hard (96 n^3)^{1/4},  dsh(1) that times pi / sqrt(6n)
///   distinct     hard (192 n^3)^{1/4}, dsh(1) that divided by 1 + x
///   set parts    hard sqrt(2 pi n (x + 1))
std::optional<double> predict_cost(NamedStructure structure, Method method, std::size_t n);

struct BenchCell {
  NamedStructure structure = NamedStructure::partitions;
  Method method = Method::hard;
  std::size_t n = 1;
  std::optional<IndexPolicy> policy;
};

/// One line `structure method n [policy]`; blank lines and `#` comments are
/// skipped by parse_grid.
BenchCell parse_cell(std::string_view line);
std::vector<BenchCell> parse_grid(std::istream& in);

struct CostReport {
  BenchCell cell;
  std::string policy;  // resolved policy, "-" when none
  std::size_t samples = 0;
  double mean_attempts = 0.0;
  double stderr_attempts = 0.0;
  std::optional<double> predicted;
  double table_ms = 0.0;
  double sample_ms = 0.0;
  std::uint64_t stage1_component_draws = 0;
  bool exhausted = false;
  std::vector<std::uint64_t> attempts;  // per accepted sample
};

struct BenchOptions {
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  Mode mode = Mode::fast;
  std::size_t threads = 1;
  std::uint64_t attempt_cap = kDefaultAttemptCap;
};

/// Runs one cell. Cell `index` draws from streams 2 index and 2 index + 1 of
/// the root seed, so reports do not depend on the thread count.
CostReport run_cell(const BenchCell& cell, std::size_t index, const BenchOptions& options);

/// Runs every cell, in parallel over `options.threads`; reports in grid order.
std::vector<CostReport> run_benchmark(const std::vector<BenchCell>& grid, const BenchOptions& options);

inline constexpr std::string_view kCostCsvHeader =
    "structure,method,n,policy,samples,mean_attempts,stderr,predicted,table_ms,sample_ms";

std::string to_csv_row(const CostReport& report);
void write_csv(std::ostream& out, const std::vector<CostReport>& reports);

struct SlopeFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double lower = 0.0;  // two-sided 95% interval
  double upper = 0.0;
  double one_sided_lower = 0.0;  // one-sided 95% lower bound
};

/// Weighted least squares of log mean attempts on log n; the variance of
/// each log mean comes from its standard error by the delta method.
SlopeFit fit_log_slope(const std::vector<CostReport>& reports);

}  // namespace pdcsample
