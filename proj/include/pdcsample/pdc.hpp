#pragma once

#include <atomic>
#include <cmath>
#include <chrono>
#include <cstdint>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pdcsample/rng.hpp"
#include "pdcsample/stage1.hpp"
#include "pdcsample/structures.hpp"
#include "pdcsample/tables.hpp"

namespace pdcsample {

/// Raised when a sampler hits its attempt cap.
class BudgetExhausted : public std::runtime_error {
 public:
  explicit BudgetExhausted(std::uint64_t attempts)
      : std::runtime_error("attempt budget exhausted after " + std::to_string(attempts) + " attempts"),
        attempts_(attempts) {}
  std::uint64_t attempts() const { return attempts_; }

 private:
  std::uint64_t attempts_;
};

inline constexpr std::uint64_t kDefaultAttemptCap = 10'000'000;

/// Per-run counters; updated atomically so workers may share one instance.
/// An attempt is one full draw of X^(I).
struct RejectionStats {
  std::atomic<std::uint64_t> attempts{0};
  std::atomic<std::uint64_t> acceptances{0};
  std::atomic<std::uint64_t> stage1_component_draws{0};
  std::atomic<std::int64_t> table_build_ns{0};
  std::atomic<std::int64_t> sampling_ns{0};

  double rejection_ratio() const {
    const auto accepted = acceptances.load();
    return accepted == 0 ? 0.0 : static_cast<double>(attempts.load()) / static_cast<double>(accepted);
  }
};

/// Acceptance probability for PDC with a count table:
///   t(y) = T(y) r(y) / max_l T(l) r(l),  r(l) = x^l / f(l),
/// with f(l) = l! for assemblies and 1 otherwise. The product of the
/// normalization constants over I cancels and is never formed.
class AcceptanceFunction {
 public:
  AcceptanceFunction(const StructureSpec& spec, const std::vector<BigInt>& counts, Mode mode);

  std::size_t max_weight() const { return log_tilted_.size() - 1; }
  Mode mode() const { return mode_; }

  /// t(y); zero when T(y) = 0 or y is beyond the table.
  double value(std::size_t y) const;

  /// Exact t(y) (exact mode only).
  const Threshold& threshold(std::size_t y) const;

  /// T(l) x^l / f(l) as a double.
  double tilted(std::size_t l) const { return std::exp(log_tilted_.at(l)); }
  double log_tilted(std::size_t l) const { return log_tilted_.at(l); }
  double log_max() const { return log_max_; }
  std::size_t argmax() const { return argmax_; }

  bool reachable(std::size_t y) const { return y < log_tilted_.size() && std::isfinite(log_tilted_[y]); }

 private:
  Mode mode_;
  std::vector<double> log_tilted_;
  double log_max_ = 0.0;
  std::size_t argmax_ = 0;
  std::vector<Threshold> exact_;  // exact mode
};

/// True with probability exactly t (exact mode) or to 53-bit resolution (fast).
bool accept_test(const Rational& t, Rng& rng, Mode mode);
bool accept_test(const Threshold& t, Rng& rng, Mode mode);

/// 1 / max_l P(T_I = l): the saving of PDC over hard rejection. Equals 1
/// for an empty index set.
double boost_factor(const StructureSpec& spec, const IndexSet& indices, const std::vector<BigInt>& counts);
double boost_factor(const StructureSpec& spec, const IndexSet& indices, const CountTable& table);

/// Index-set policies.
struct IndexPolicy {
  enum class Kind { prefix, window, singleton };
  Kind kind = Kind::prefix;
  std::size_t size = 1;  // prefix length or singleton index
  double alpha = 1.0;    // window half-width in units of sqrt(center)

  static IndexPolicy prefix(std::size_t k) { return {Kind::prefix, k, 0.0}; }
  static IndexPolicy window(double alpha) { return {Kind::window, 0, alpha}; }
  static IndexPolicy singleton(std::size_t i) { return {Kind::singleton, i, 0.0}; }

  /// "prefix:K", "window:ALPHA" or "singleton:I".
  static IndexPolicy parse(std::string_view text);
  std::string to_string() const;
};

/// Center of the window policy: the tilt x for assemblies (x e^x = n puts
/// the typical block size near x), otherwise the index maximizing w_i E Z_i.
double window_center(const StructureSpec& spec);

IndexSet choose_index_set(const StructureSpec& spec, const IndexPolicy& policy);

/// Default single index for DSH: 1 for multisets and selections, the nearest
/// integer to x for assemblies.
std::size_t default_dsh_index(const StructureSpec& spec);

struct SampleResult {
  SparseCounts counts;
  std::uint64_t attempts = 0;
};

class Sampler {
 public:
  explicit Sampler(StructureSpec spec) : spec_(std::move(spec)) {}
  virtual ~Sampler() = default;
  Sampler(const Sampler&) = delete;
  Sampler& operator=(const Sampler&) = delete;

  /// `stage1` feeds draws of X^(I); `second` feeds acceptance tests and the
  /// completion. Passing the same generator for both is fine.
  virtual SampleResult sample(Rng& stage1, Rng& second) = 0;
  SampleResult sample(Rng& rng) { return sample(rng, rng); }

  const StructureSpec& spec() const { return spec_; }
  RejectionStats& stats() { return stats_; }
  const RejectionStats& stats() const { return stats_; }
  void set_attempt_cap(std::uint64_t cap) { attempt_cap_ = cap; }

 protected:
  void count_attempt(std::uint64_t& attempts, const Stage1Draw& draw);

  StructureSpec spec_;
  RejectionStats stats_;
  std::uint64_t attempt_cap_ = kDefaultAttemptCap;
};

/// Exact Boltzmann sampling: draw (Z_1..Z_n) until sum w_i Z_i = n.
class HardRejectionSampler : public Sampler {
 public:
  HardRejectionSampler(StructureSpec spec, Mode mode, Stage1Strategy strategy = Stage1Strategy::automatic);
  SampleResult sample(Rng& stage1, Rng& second) override;
  using Sampler::sample;

 private:
  Stage1Sampler full_;
};

/// PDC deterministic second half with I = {i}: the stage-1 weight m fixes
/// z_i = (n - m) / w_i, accepted with probability P(Z_i = z_i) / max_l P(Z_i = l).
class DshSampler : public Sampler {
 public:
  DshSampler(StructureSpec spec, std::size_t index, Mode mode,
             Stage1Strategy strategy = Stage1Strategy::automatic);
  SampleResult sample(Rng& stage1, Rng& second) override;
  using Sampler::sample;

  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
  Mode mode_;
  Stage1Sampler rest_;
  TiltedDistribution dist_;
  std::vector<Threshold> exact_ratio_;  // exact mode, z = 0..n/w
  std::vector<double> ratio_;           // fast mode
};

using TableFuture = std::shared_future<std::shared_ptr<const CountTable>>;

/// PDC with the recursive method: draw X^(I), accept with probability
/// t(n - m), complete X_I by unranking from the table. Stage-1 draws may run
/// before the table is ready; `sample_batch` buffers them meanwhile.
class PdcRecursiveSampler : public Sampler {
 public:
  PdcRecursiveSampler(StructureSpec spec, IndexSet indices, TableFuture table, Mode mode,
                      Stage1Strategy strategy = Stage1Strategy::automatic);
  PdcRecursiveSampler(StructureSpec spec, IndexSet indices, std::shared_ptr<const CountTable> table, Mode mode,
                      Stage1Strategy strategy = Stage1Strategy::automatic);

  SampleResult sample(Rng& stage1, Rng& second) override;
  using Sampler::sample;

  /// `count` samples; while the table is still being built, stage-1
  /// observations are drawn ahead and buffered. Output is identical to
  /// `count` sequential calls of sample(stage1, second).
  std::vector<SampleResult> sample_batch(std::size_t count, Rng& stage1, Rng& second);

  const IndexSet& indices() const { return indices_; }
  const CountTable& table();
  const AcceptanceFunction& acceptance();
  double boost();

  std::size_t buffered_high_water() const { return buffered_high_water_; }
  /// Drops buffered stage-1 draws; they are independent of everything
  /// already returned, so discarding them leaves the output law unchanged.
  void discard_buffer() { buffer_.clear(); }

 private:
  void resolve();
  std::optional<SampleResult> try_complete(const Stage1Draw& draw, Rng& second);

  IndexSet indices_;
  Mode mode_;
  Stage1Sampler rest_;
  TableFuture future_;
  std::once_flag resolved_;
  std::shared_ptr<const CountTable> table_;
  std::unique_ptr<AcceptanceFunction> acceptance_;
  std::deque<Stage1Draw> buffer_;
  std::size_t buffered_high_water_ = 0;
};

/// Divisor-sum sampler for integer partitions (attempts always 1).
class EulerSampler : public Sampler {
 public:
  explicit EulerSampler(StructureSpec spec);
  SampleResult sample(Rng& stage1, Rng& second) override;
  using Sampler::sample;

 private:
  EulerTable table_;
};

enum class Method { hard, dsh, pdc_recursive, euler };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

/// Table for PDC with index set I: the bounded partition / distinct table
/// when the structure is plain (distinct) partitions and I = {1..k},
/// otherwise the restricted table.
std::shared_ptr<const CountTable> build_completion_table(const StructureSpec& spec, const IndexSet& indices);

/// A resolved sampler configuration. Its pdc-recursive table is built once,
/// on a background thread, and shared by every sampler it instantiates.
class SamplerPlan {
 public:
  /// `policy` picks I for dsh (singleton only) and pdc-recursive.
  SamplerPlan(StructureSpec spec, Method method, const std::optional<IndexPolicy>& policy, Mode mode);
  /// Uses a ready table for pdc-recursive instead of building one.
  SamplerPlan(StructureSpec spec, IndexSet indices, std::shared_ptr<const CountTable> table, Mode mode);

  std::unique_ptr<Sampler> instantiate() const;

  const StructureSpec& spec() const { return spec_; }
  Method method() const { return method_; }
  Mode mode() const { return mode_; }
  /// I for dsh and pdc-recursive; empty otherwise.
  const IndexSet& indices() const { return indices_; }
  const TableFuture& table() const { return table_; }

 private:
  StructureSpec spec_;
  Method method_;
  Mode mode_;
  IndexSet indices_;
  TableFuture table_;
};

std::unique_ptr<Sampler> make_sampler(const StructureSpec& spec, Method method,
                                      const std::optional<IndexPolicy>& policy, Mode mode);

/// Free-function forms of the three engines.
SparseCounts hard_rejection(const StructureSpec& spec, Rng& rng, Mode mode = Mode::exact);
SparseCounts pdc_dsh(const StructureSpec& spec, std::size_t index, Rng& rng, Mode mode = Mode::exact);
SparseCounts pdc_recursive(const StructureSpec& spec, const IndexSet& indices,
                           std::shared_ptr<const CountTable> table, Rng& rng, Mode mode = Mode::exact);

std::uint64_t weighted_sum(const StructureSpec& spec, const SparseCounts& counts);

}  // namespace pdcsample
