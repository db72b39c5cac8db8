#include "pdcsample/oracle.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace pdcsample {

namespace {

void walk_profiles(const StructureSpec& spec, const IndexSet& indices, std::size_t target,
                   const std::function<void(const SparseCounts&)>& visit) {
  SparseCounts current;
  std::function<void(std::size_t, std::size_t)> step = [&](std::size_t position, std::size_t remaining) {
    if (remaining == 0) {
      visit(current);
      return;
    }
    if (position == indices.size()) return;
    const std::size_t i = indices[position];
    const std::uint64_t w = spec.weight(i);
    std::uint64_t cap = remaining / w;
    if (spec.cls() == StructureClass::selection) cap = std::min<std::uint64_t>(cap, spec.multiplicity(i));
    for (std::uint64_t z = 0; z <= cap; ++z) {
      if (z > 0) current.emplace_back(i, z);
      step(position + 1, remaining - z * w);
      if (z > 0) current.pop_back();
    }
  };
  step(0, target);
}

BigInt objects_with_profile(const StructureSpec& spec, const SparseCounts& profile, std::size_t weight) {
  BigInt count = 1;
  switch (spec.cls()) {
    case StructureClass::multiset:
      for (const auto& [i, z] : profile) count *= binomial(spec.multiplicity(i) + z - 1, z);
      break;
    case StructureClass::selection:
      for (const auto& [i, z] : profile) count *= binomial(spec.multiplicity(i), z);
      break;
    case StructureClass::assembly: {
      count = factorial(weight);
      BigInt denominator = 1;
      for (const auto& [i, z] : profile) {
        BigInt m_power;
        mpz_pow_ui(m_power.get_mpz_t(), BigInt(static_cast<unsigned long>(spec.multiplicity(i))).get_mpz_t(), z);
        count *= m_power;
        BigInt block;
        mpz_pow_ui(block.get_mpz_t(), factorial(i).get_mpz_t(), z);
        denominator *= block * factorial(z);
      }
      count /= denominator;
      break;
    }
  }
  return count;
}

bool plain_set_partitions(const StructureSpec& spec) {
  return spec.cls() == StructureClass::assembly && spec.unit_multiplicities() && spec.identity_weights();
}

SparseCounts profile_of(const SetPartition& blocks) {
  std::vector<std::size_t> sizes;
  for (const auto& block : blocks) sizes.push_back(block.size());
  return parts_to_counts(sizes);
}

}  // namespace

std::size_t ObjectCensus::index_of(const SparseCounts& profile) const {
  const auto it = std::lower_bound(profiles.begin(), profiles.end(), profile);
  if (it == profiles.end() || *it != profile) throw std::logic_error("sample is not an object of the census");
  return static_cast<std::size_t>(it - profiles.begin());
}

std::size_t ObjectCensus::index_of(const SetPartition& blocks) const {
  SetPartition canonical = blocks;
  canonicalize(canonical);
  const auto it = std::lower_bound(labeled.begin(), labeled.end(), canonical);
  if (it == labeled.end() || *it != canonical) throw std::logic_error("sample is not a labeled set partition of the census");
  return static_cast<std::size_t>(it - labeled.begin());
}

std::vector<double> ObjectCensus::profile_probabilities() const {
  std::vector<double> out;
  out.reserve(objects.size());
  for (const auto& count : objects) out.push_back(Rational(count, total).get_d());
  return out;
}

ObjectCensus enumerate(const StructureSpec& spec, const std::optional<IndexSet>& indices,
                       std::optional<std::size_t> weight) {
  const std::size_t n = weight.value_or(spec.n());
  if (n > kMaxEnumerationWeight) throw std::length_error("enumerate: n exceeds the enumeration guard");
  ObjectCensus census{spec.cls(), n, {}, {}, 0, {}};
  walk_profiles(spec, indices.value_or(full_index_set(spec.n())), n, [&](const SparseCounts& profile) {
    census.profiles.push_back(profile);
  });
  std::sort(census.profiles.begin(), census.profiles.end());
  for (const auto& profile : census.profiles) {
    census.objects.push_back(objects_with_profile(spec, profile, n));
    census.total += census.objects.back();
  }
  if (plain_set_partitions(spec) && n <= kMaxLabeledWeight) {
    for (auto& blocks : enumerate_set_partitions(n)) {
      const SparseCounts profile = profile_of(blocks);
      if (indices && std::any_of(profile.begin(), profile.end(),
                                 [&](const auto& entry) { return !contains(*indices, entry.first); })) {
        continue;
      }
      census.labeled.push_back(std::move(blocks));
    }
    std::sort(census.labeled.begin(), census.labeled.end());
  }
  return census;
}

std::vector<BigInt> brute_force_counts(const StructureSpec& spec, const IndexSet& indices, std::size_t n) {
  if (n > kMaxEnumerationWeight + 6) throw std::length_error("brute_force_counts: n exceeds the guard");
  std::vector<BigInt> out(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    IndexSet usable;
    for (std::size_t i : indices) {
      if (i <= spec.n()) usable.push_back(i);
    }
    walk_profiles(spec, usable, j, [&](const SparseCounts& profile) {
      out[j] += objects_with_profile(spec, profile, j);
    });
  }
  return out;
}

std::vector<SetPartition> enumerate_set_partitions(std::size_t n) {
  std::vector<SetPartition> out;
  if (n == 0) {
    out.emplace_back();
    return out;
  }
  std::vector<std::size_t> growth(n, 0);
  std::function<void(std::size_t, std::size_t)> step = [&](std::size_t position, std::size_t blocks) {
    if (position == n) {
      SetPartition partition(blocks);
      for (std::size_t e = 0; e < n; ++e) partition[growth[e]].push_back(e + 1);
      out.push_back(std::move(partition));
      return;
    }
    for (std::size_t b = 0; b <= blocks; ++b) {
      growth[position] = b;
      step(position + 1, std::max(blocks, b + 1));
    }
  };
  growth[0] = 0;
  step(1, 1);
  return out;
}

std::vector<std::vector<std::size_t>> enumerate_partitions(std::size_t y, std::size_t k, bool distinct) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current;
  std::function<void(std::size_t, std::size_t)> step = [&](std::size_t remaining, std::size_t bound) {
    if (remaining == 0) {
      out.push_back(current);
      return;
    }
    for (std::size_t part = std::min(remaining, bound); part >= 1; --part) {
      current.push_back(part);
      step(remaining - part, distinct ? part - 1 : part);
      current.pop_back();
    }
  };
  step(y, k);
  return out;
}

ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& observed, const std::vector<double>& probs) {
  if (observed.size() != probs.size()) throw std::invalid_argument("chi_square_gof: size mismatch");
  ChiSquareResult result;
  std::uint64_t total = 0;
  for (auto c : observed) total += c;
  if (total == 0 || observed.size() < 2) return result;
  result.min_expected = static_cast<double>(total);
  std::size_t cells = 0;
  for (std::size_t c = 0; c < observed.size(); ++c) {
    const double expected = probs[c] * static_cast<double>(total);
    if (expected <= 0.0) {
      if (observed[c] > 0) {
        result.statistic = std::numeric_limits<double>::infinity();
        result.p_value = 0.0;
        return result;
      }
      continue;
    }
    ++cells;
    result.min_expected = std::min(result.min_expected, expected);
    const double diff = static_cast<double>(observed[c]) - expected;
    result.statistic += diff * diff / expected;
  }
  result.dof = cells > 0 ? cells - 1 : 0;
  result.p_value = result.dof == 0 ? 1.0
                                   : boost::math::gamma_q(static_cast<double>(result.dof) / 2.0,
                                                          result.statistic / 2.0);
  return result;
}

ChiSquareResult chi_square_uniformity(const std::vector<SparseCounts>& samples, const ObjectCensus& census) {
  std::vector<std::uint64_t> observed(census.size(), 0);
  for (const auto& sample : samples) ++observed[census.index_of(sample)];
  return chi_square_gof(observed, census.profile_probabilities());
}

ChiSquareResult chi_square_uniformity(const std::vector<SetPartition>& samples, const ObjectCensus& census) {
  if (census.labeled.empty()) throw std::invalid_argument("chi_square_uniformity: census has no labeled objects");
  std::vector<std::uint64_t> observed(census.labeled.size(), 0);
  for (const auto& sample : samples) ++observed[census.index_of(sample)];
  return chi_square_gof(observed, std::vector<double>(census.labeled.size(), 1.0 / census.labeled.size()));
}

ChiSquareResult chi_square_homogeneity(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("chi_square_homogeneity: size mismatch");
  double total_a = 0.0, total_b = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    total_a += static_cast<double>(a[c]);
    total_b += static_cast<double>(b[c]);
  }
  ChiSquareResult result;
  if (total_a == 0.0 || total_b == 0.0) return result;
  const double total = total_a + total_b;
  std::size_t cells = 0;
  result.min_expected = total;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double column = static_cast<double>(a[c] + b[c]);
    if (column == 0.0) continue;
    ++cells;
    for (const auto& [observed, row] : {std::pair{a[c], total_a}, std::pair{b[c], total_b}}) {
      const double expected = row * column / total;
      result.min_expected = std::min(result.min_expected, expected);
      const double diff = static_cast<double>(observed) - expected;
      result.statistic += diff * diff / expected;
    }
  }
  result.dof = cells > 0 ? cells - 1 : 0;
  result.p_value = result.dof == 0 ? 1.0
                                   : boost::math::gamma_q(static_cast<double>(result.dof) / 2.0,
                                                          result.statistic / 2.0);
  return result;
}

double bonferroni_threshold(std::size_t tests, double family, double cap) {
  if (tests == 0) return cap;
  return std::min(cap, family / static_cast<double>(tests));
}

ConditionalLaw conditional_law(const StructureSpec& spec) {
  ConditionalLaw law{enumerate(spec), {}, {}, true};
  std::vector<TiltedDistribution> laws;
  for (std::size_t i = 1; i <= spec.n(); ++i) laws.push_back(component_distribution(spec, i));

  Rational total = 0;
  for (const auto& profile : law.census.profiles) {
    Rational mass = 1;
    for (const auto& [i, z] : profile) mass *= laws[i - 1].relative_mass(z);
    mass.canonicalize();
    law.profile_probability.push_back(mass);
    total += mass;
  }
  for (std::size_t p = 0; p < law.census.size(); ++p) {
    law.profile_probability[p] /= total;
    Rational per_object = law.profile_probability[p] / Rational(law.census.objects[p]);
    per_object.canonicalize();
    law.object_probability.push_back(per_object);
    if (per_object != law.object_probability.front()) law.uniform = false;
  }
  return law;
}

ConditionalLaw exact_conditional_law(const StructureSpec& spec) {
  ConditionalLaw law = conditional_law(spec);
  if (!law.uniform) throw std::logic_error("exact_conditional_law: conditional law is not uniform");
  return law;
}

Rational exact_hit_probability(const StructureSpec& spec) {
  const std::size_t n = spec.n();
  std::vector<Rational> poly(n + 1, Rational(0));
  poly[0] = 1;
  Rational normalization = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const TiltedDistribution law = component_distribution(spec, i);
    normalization *= law.normalization();
    const std::uint64_t w = law.weight();
    std::vector<Rational> next(n + 1, Rational(0));
    for (std::uint64_t z = 0; z * w <= n; ++z) {
      const Rational mass = law.relative_mass(z);
      if (sgn(mass) == 0) continue;
      for (std::size_t j = 0; j + z * w <= n; ++j) {
        if (sgn(poly[j]) == 0) continue;
        next[j + z * w] += poly[j] * mass;
      }
    }
    poly = std::move(next);
  }
  Rational out = poly[n] * normalization;
  out.canonicalize();
  return out;
}

}  // namespace pdcsample
