#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "pdcsample/rng.hpp"
#include "pdcsample/structures.hpp"

namespace pdcsample {

/// Sparse component counts: (index, z_i) pairs with z_i > 0, ascending index.
using SparseCounts = std::vector<std::pair<std::size_t, std::uint64_t>>;

/// One observation of X^(I) = (Z_i)_{i not in I}.
struct Stage1Draw {
  SparseCounts counts;
  std::uint64_t weight = 0;     // sum of w_i z_i over the drawn indices
  bool overflow = false;        // stopped early: weight exceeded the limit
  std::uint64_t variates = 0;   // component-level entropy spent
};

enum class Stage1Strategy {
  automatic,        // exact: per_index; fast: poisson_process (assembly) or sparse
  per_index,        // one independent draw per index (reference)
  sparse,           // fast, multiset/selection: jump between nonzero components
  poisson_process,  // fast, assembly: one Poisson process over the total rate
};

/// Samples the independent components outside an index set I.
///
/// The sparse strategy treats each (index, type) pair as a unit whose event
/// {Z >= 1} has hazard h = -log P(Z = 0), walks the cumulative hazard with
/// exponential jumps to find the next nonzero unit, then draws the excess
/// from the memoryless law (geometric) or sets it to one (Bernoulli). Cost is
/// proportional to the number of nonzero components, not to n.
class Stage1Sampler {
 public:
  Stage1Sampler(const StructureSpec& spec, IndexSet excluded, Mode mode,
                Stage1Strategy strategy = Stage1Strategy::automatic);

  /// Draws X^(I); stops as soon as the running weight exceeds `weight_limit`.
  Stage1Draw sample(Rng& rng, std::uint64_t weight_limit = std::numeric_limits<std::uint64_t>::max()) const;

  const IndexSet& drawn_indices() const { return drawn_; }
  Stage1Strategy strategy() const { return strategy_; }

 private:
  Stage1Draw sample_per_index(Rng& rng, std::uint64_t limit) const;
  Stage1Draw sample_sparse(Rng& rng, std::uint64_t limit) const;
  Stage1Draw sample_poisson_process(Rng& rng, std::uint64_t limit) const;

  struct Unit {
    std::size_t index;
    std::uint64_t weight;
    double log_q;  // geometric units only
    bool bernoulli;
  };

  IndexSet drawn_;
  Stage1Strategy strategy_;
  std::vector<ComponentSampler> samplers_;  // per_index, aligned with drawn_
  std::vector<Unit> units_;                 // sparse
  std::vector<double> cumulative_hazard_;   // sparse, size units_.size() + 1
  std::vector<double> cumulative_rate_;     // poisson_process, aligned with drawn_
  double total_rate_ = 0.0;
};

/// Convenience wrapper: X^(I) for I = `excluded`.
Stage1Draw sample_stage1(const StructureSpec& spec, const IndexSet& excluded, Rng& rng, Mode mode);

}  // namespace pdcsample
