#include "pdcsample/stage1.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdcsample {

Stage1Sampler::Stage1Sampler(const StructureSpec& spec, IndexSet excluded, Mode mode,
                             Stage1Strategy strategy)
    : drawn_(complement(excluded, spec.n())), strategy_(strategy) {
  if (strategy_ == Stage1Strategy::automatic) {
    if (mode == Mode::exact) {
      strategy_ = Stage1Strategy::per_index;
    } else {
      strategy_ = spec.cls() == StructureClass::assembly ? Stage1Strategy::poisson_process
                                                         : Stage1Strategy::sparse;
    }
  }
  if (mode == Mode::exact && strategy_ != Stage1Strategy::per_index) {
    throw std::invalid_argument("Stage1Sampler: exact mode requires per-index draws");
  }

  switch (strategy_) {
    case Stage1Strategy::per_index:
      samplers_.reserve(drawn_.size());
      for (std::size_t i : drawn_) samplers_.emplace_back(component_distribution(spec, i), mode);
      break;
    case Stage1Strategy::sparse: {
      if (spec.cls() == StructureClass::assembly) {
        throw std::invalid_argument("Stage1Sampler: sparse strategy is for multisets and selections");
      }
      const bool bernoulli = spec.cls() == StructureClass::selection;
      cumulative_hazard_.push_back(0.0);
      for (std::size_t i : drawn_) {
        const double log_q = static_cast<double>(spec.weight(i)) * std::log(spec.tilt().value);
        const double q = std::exp(log_q);
        // -log P(Z = 0): geometric P(Z=0) = 1-q; Bernoulli P(Z=0) = 1/(1+q).
        const double hazard = bernoulli ? std::log1p(q) : -std::log1p(-q);
        for (std::uint64_t t = 0; t < spec.multiplicity(i); ++t) {
          units_.push_back(Unit{i, spec.weight(i), log_q, bernoulli});
          cumulative_hazard_.push_back(cumulative_hazard_.back() + hazard);
        }
      }
      break;
    }
    case Stage1Strategy::poisson_process: {
      if (spec.cls() != StructureClass::assembly) {
        throw std::invalid_argument("Stage1Sampler: Poisson process strategy is for assemblies");
      }
      cumulative_rate_.reserve(drawn_.size());
      for (std::size_t i : drawn_) {
        total_rate_ += component_distribution(spec, i).parameter_value();
        cumulative_rate_.push_back(total_rate_);
      }
      break;
    }
    case Stage1Strategy::automatic:
      break;
  }
}

Stage1Draw Stage1Sampler::sample(Rng& rng, std::uint64_t weight_limit) const {
  switch (strategy_) {
    case Stage1Strategy::per_index: return sample_per_index(rng, weight_limit);
    case Stage1Strategy::sparse: return sample_sparse(rng, weight_limit);
    case Stage1Strategy::poisson_process: return sample_poisson_process(rng, weight_limit);
    case Stage1Strategy::automatic: break;
  }
  throw std::logic_error("Stage1Sampler: unresolved strategy");
}

Stage1Draw Stage1Sampler::sample_per_index(Rng& rng, std::uint64_t limit) const {
  Stage1Draw out;
  for (std::size_t j = 0; j < drawn_.size(); ++j) {
    const std::uint64_t z = samplers_[j].sample(rng);
    ++out.variates;
    if (z == 0) continue;
    out.counts.emplace_back(drawn_[j], z);
    out.weight += z * samplers_[j].distribution().weight();
    if (out.weight > limit) {
      out.overflow = true;
      return out;
    }
  }
  return out;
}

Stage1Draw Stage1Sampler::sample_sparse(Rng& rng, std::uint64_t limit) const {
  Stage1Draw out;
  std::size_t position = 0;  // units [0, position) are settled
  for (;;) {
    const double target = cumulative_hazard_[position] + rng.exponential();
    ++out.variates;
    const auto hit = std::upper_bound(cumulative_hazard_.begin() + static_cast<std::ptrdiff_t>(position) + 1,
                                      cumulative_hazard_.end(), target);
    if (hit == cumulative_hazard_.end()) return out;
    const std::size_t unit_index = static_cast<std::size_t>(hit - cumulative_hazard_.begin()) - 1;
    const Unit& unit = units_[unit_index];
    std::uint64_t z = 1;
    if (!unit.bernoulli) {
      z += static_cast<std::uint64_t>(std::floor(std::log(rng.uniform_positive()) / unit.log_q));
      ++out.variates;
    }
    if (!out.counts.empty() && out.counts.back().first == unit.index) {
      out.counts.back().second += z;
    } else {
      out.counts.emplace_back(unit.index, z);
    }
    out.weight += z * unit.weight;
    if (out.weight > limit) {
      out.overflow = true;
      return out;
    }
    position = unit_index + 1;
  }
}

Stage1Draw Stage1Sampler::sample_poisson_process(Rng& rng, std::uint64_t limit) const {
  Stage1Draw out;
  if (drawn_.empty()) return out;
  const std::uint64_t arrivals = sample_poisson_fast(total_rate_, rng);
  ++out.variates;
  std::vector<std::size_t> buckets;
  buckets.reserve(arrivals);
  for (std::uint64_t a = 0; a < arrivals; ++a) {
    const double point = rng.uniform01() * total_rate_;
    ++out.variates;
    auto hit = std::upper_bound(cumulative_rate_.begin(), cumulative_rate_.end(), point);
    if (hit == cumulative_rate_.end()) --hit;
    const std::size_t slot = static_cast<std::size_t>(hit - cumulative_rate_.begin());
    buckets.push_back(slot);
    out.weight += drawn_[slot];
    if (out.weight > limit) {
      out.overflow = true;
      break;
    }
  }
  std::sort(buckets.begin(), buckets.end());
  for (std::size_t slot : buckets) {
    if (!out.counts.empty() && out.counts.back().first == drawn_[slot]) {
      ++out.counts.back().second;
    } else {
      out.counts.emplace_back(drawn_[slot], 1);
    }
  }
  return out;
}

Stage1Draw sample_stage1(const StructureSpec& spec, const IndexSet& excluded, Rng& rng, Mode mode) {
  return Stage1Sampler(spec, excluded, mode).sample(rng);
}

}  // namespace pdcsample
