#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdcsample/pdc.hpp"
#include "pdcsample/stage1.hpp"
#include "pdcsample/structures.hpp"
#include "pdcsample/tables.hpp"

namespace pdcsample {

inline constexpr int kExitOk = 0;
inline constexpr int kExitStatistical = 1;
inline constexpr int kExitExactMismatch = 2;
inline constexpr int kExitConfig = 3;

/// Samples are drawn in chunks of this many; chunk c uses streams 2c and
/// 2c + 1 of the root seed, so output does not depend on the thread count.
inline constexpr std::size_t kSampleChunk = 1024;

struct SampleRecord {
  SparseCounts counts;
  std::uint64_t attempts = 0;
  std::optional<SetPartition> blocks;  // plain set partitions only
};

/// Draws `count` samples from `plan` over `threads` workers. `on_chunk` is
/// called with (chunk index, records) as chunks finish, in chunk order when
/// `ordered` is set. Labeled blocks are realized from the chunk's second
/// stream right after each sample when `realize_blocks` is set.
void run_sampling(const SamplerPlan& plan, std::size_t count, std::uint64_t seed, std::size_t threads,
                  bool ordered, bool realize_blocks,
                  const std::function<void(std::size_t, std::vector<SampleRecord>&)>& on_chunk);

/// Convenience: all records, in draw order.
std::vector<SampleRecord> draw_samples(const SamplerPlan& plan, std::size_t count, std::uint64_t seed,
                                       std::size_t threads = 1, bool realize_blocks = false);

/// Builds the spec for a structure name: partitions, distinct-partitions,
/// set-partitions, or a generic assembly / multiset / selection class.
/// Comma-separated multiplicities and weights list m_1, m_2, ... (missing
/// entries default to 1 and i). `tilt` is "p/q" or a decimal.
StructureSpec parse_structure(std::string_view name, std::size_t n, const std::string& tilt = "",
                              const std::string& multiplicities = "", const std::string& weights = "");

Rational parse_rational(std::string_view text);

/// One JSONL line for a sample: n, counts, parts or blocks, attempts, seed.
std::string to_jsonl(const StructureSpec& spec, const SampleRecord& record, std::uint64_t seed);

/// Entry point shared by the binary and the tests; returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pdcsample
