#include "pdcsample/structures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pdcsample {

namespace {

constexpr std::size_t kMaxCachedCdf = 64;

HighPrec high_prec_pi() { return boost::math::constants::pi<HighPrec>(); }

Tilt tilt_from_high_prec(const HighPrec& value, unsigned bits) {
  return Tilt::from_rational(rational_from_high_prec(value, bits));
}

double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

std::string_view to_string(StructureClass cls) {
  switch (cls) {
    case StructureClass::assembly: return "assembly";
    case StructureClass::multiset: return "multiset";
    case StructureClass::selection: return "selection";
  }
  return "unknown";
}

std::string_view to_string(LawKind kind) {
  switch (kind) {
    case LawKind::geometric: return "geometric";
    case LawKind::binomial: return "binomial";
    case LawKind::negative_binomial: return "negative_binomial";
    case LawKind::poisson: return "poisson";
  }
  return "unknown";
}

IndexSet full_index_set(std::size_t n) {
  IndexSet out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i + 1;
  return out;
}

IndexSet complement(const IndexSet& indices, std::size_t n) {
  IndexSet out;
  out.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) {
    if (!contains(indices, i)) out.push_back(i);
  }
  return out;
}

bool contains(const IndexSet& indices, std::size_t i) {
  return std::binary_search(indices.begin(), indices.end(), i);
}

std::string to_string(const IndexSet& indices) {
  if (indices.empty()) return "-";
  std::ostringstream out;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (j > 0) out << ',';
    out << indices[j];
  }
  return out.str();
}

Tilt Tilt::from_rational(Rational x) {
  Tilt out;
  out.exact = std::move(x);
  out.exact.canonicalize();
  out.value = out.exact.get_d();
  return out;
}

Tilt tilt_unrestricted(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("tilt_unrestricted: n must be positive");
  const HighPrec x = exp(-high_prec_pi() / sqrt(HighPrec(6) * n));
  return tilt_from_high_prec(x, 53);
}

Tilt tilt_distinct(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("tilt_distinct: n must be positive");
  const HighPrec x = exp(-high_prec_pi() / sqrt(HighPrec(12) * n));
  return tilt_from_high_prec(x, 53);
}

HighPrec solve_x_exp_x(const HighPrec& target) {
  if (target <= 0) throw std::invalid_argument("solve_x_exp_x: target must be positive");
  HighPrec lo = 0;
  HighPrec hi = target > boost::math::constants::e<HighPrec>() ? HighPrec(log(target)) : HighPrec(1);
  while (hi * exp(hi) < target) hi *= 2;
  // 166-bit working precision; 200 halvings exhaust it.
  for (int iter = 0; iter < 200; ++iter) {
    const HighPrec mid = (lo + hi) / 2;
    if (mid == lo || mid == hi) break;
    if (mid * exp(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

Tilt tilt_set_partition(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("tilt_set_partition: n must be positive");
  return tilt_from_high_prec(solve_x_exp_x(HighPrec(n)), 64);
}

StructureSpec::StructureSpec(StructureClass cls, std::size_t n, Tilt tilt,
                             std::vector<std::uint64_t> multiplicities,
                             std::vector<std::uint64_t> weights)
    : cls_(cls), n_(n), tilt_(std::move(tilt)),
      multiplicities_(std::move(multiplicities)), weights_(std::move(weights)) {
  if (multiplicities_.empty()) multiplicities_.assign(n_ + 1, 1);
  if (weights_.empty()) {
    weights_.resize(n_ + 1);
    for (std::size_t i = 0; i <= n_; ++i) weights_[i] = i;
  }
  if (multiplicities_.size() != n_ + 1 || weights_.size() != n_ + 1) {
    throw std::invalid_argument("StructureSpec: multiplicities and weights must cover indices 1..n");
  }
  for (std::size_t i = 1; i <= n_; ++i) {
    if (multiplicities_[i] == 0) throw std::invalid_argument("StructureSpec: multiplicity must be positive");
    if (weights_[i] == 0) throw std::invalid_argument("StructureSpec: weight must be positive");
  }
  if (sgn(tilt_.exact) <= 0) throw std::invalid_argument("StructureSpec: tilt must be positive");
  if (cls_ != StructureClass::assembly && tilt_.exact >= 1) {
    throw std::invalid_argument("StructureSpec: multiset/selection tilt must lie in (0,1)");
  }
  if (cls_ == StructureClass::assembly && !identity_weights()) {
    throw std::invalid_argument("StructureSpec: assemblies require weight w_i = i");
  }
}

StructureSpec StructureSpec::partitions(std::size_t n) { return partitions(n, tilt_unrestricted(n)); }
StructureSpec StructureSpec::partitions(std::size_t n, Tilt tilt) {
  return StructureSpec(StructureClass::multiset, n, std::move(tilt));
}
StructureSpec StructureSpec::distinct_partitions(std::size_t n) {
  return distinct_partitions(n, tilt_distinct(n));
}
StructureSpec StructureSpec::distinct_partitions(std::size_t n, Tilt tilt) {
  return StructureSpec(StructureClass::selection, n, std::move(tilt));
}
StructureSpec StructureSpec::set_partitions(std::size_t n) {
  return set_partitions(n, tilt_set_partition(n));
}
StructureSpec StructureSpec::set_partitions(std::size_t n, Tilt tilt) {
  return StructureSpec(StructureClass::assembly, n, std::move(tilt));
}

bool StructureSpec::unit_multiplicities() const {
  return std::all_of(multiplicities_.begin() + 1, multiplicities_.end(),
                     [](std::uint64_t m) { return m == 1; });
}

bool StructureSpec::identity_weights() const {
  for (std::size_t i = 1; i <= n_; ++i) {
    if (weights_[i] != i) return false;
  }
  return true;
}

StructureSpec StructureSpec::with_tilt(Tilt tilt) const {
  return StructureSpec(cls_, n_, std::move(tilt), multiplicities_, weights_);
}

TiltedDistribution::TiltedDistribution(StructureClass cls, std::size_t index,
                                       std::uint64_t multiplicity, std::uint64_t weight,
                                       const Tilt& tilt)
    : cls_(cls), index_(index), multiplicity_(multiplicity), weight_(weight) {
  if (multiplicity == 0 || weight == 0) throw std::invalid_argument("TiltedDistribution: bad parameters");
  const Rational q = pow(tilt.exact, weight);
  const double log_q = static_cast<double>(weight) * std::log(tilt.value);
  switch (cls) {
    case StructureClass::multiset:
      kind_ = multiplicity == 1 ? LawKind::geometric : LawKind::negative_binomial;
      parameter_ = q;
      log_parameter_ = log_q;
      break;
    case StructureClass::selection:
      kind_ = LawKind::binomial;
      parameter_ = q;
      log_parameter_ = log_q;
      break;
    case StructureClass::assembly:
      kind_ = LawKind::poisson;
      parameter_ = q * Rational(BigInt(static_cast<unsigned long>(multiplicity)), factorial(weight));
      parameter_.canonicalize();
      log_parameter_ = std::log(static_cast<double>(multiplicity)) + log_q - std::lgamma(weight + 1.0);
      break;
  }
  parameter_value_ = std::exp(log_parameter_);

  // Every law here is log-concave, so the first local maximum is global.
  for (;;) {
    if (auto top = support_max(); top && mode_ >= *top) break;
    const Rational step = relative_mass(mode_ + 1) / relative_mass(mode_);
    if (step <= 1) break;
    ++mode_;
  }
}

std::optional<std::uint64_t> TiltedDistribution::support_max() const {
  if (kind_ == LawKind::binomial) return multiplicity_;
  return std::nullopt;
}

Rational TiltedDistribution::relative_mass(std::uint64_t k) const {
  switch (kind_) {
    case LawKind::geometric:
      return pow(parameter_, k);
    case LawKind::negative_binomial:
      return Rational(binomial(multiplicity_ + k - 1, k)) * pow(parameter_, k);
    case LawKind::binomial:
      if (k > multiplicity_) return Rational(0);
      return Rational(binomial(multiplicity_, k)) * pow(parameter_, k);
    case LawKind::poisson: {
      Rational out = pow(parameter_, k);
      out /= Rational(factorial(k));
      return out;
    }
  }
  return Rational(0);
}

double TiltedDistribution::log_relative_mass(std::uint64_t k) const {
  const double kd = static_cast<double>(k);
  const double md = static_cast<double>(multiplicity_);
  switch (kind_) {
    case LawKind::geometric:
      return kd * log_parameter_;
    case LawKind::negative_binomial:
      return log_binomial(md + kd - 1.0, kd) + kd * log_parameter_;
    case LawKind::binomial:
      if (k > multiplicity_) return -INFINITY;
      return log_binomial(md, kd) + kd * log_parameter_;
    case LawKind::poisson:
      return kd * log_parameter_ - std::lgamma(kd + 1.0);
  }
  return -INFINITY;
}

Rational TiltedDistribution::normalization() const {
  switch (kind_) {
    case LawKind::geometric:
    case LawKind::negative_binomial:
      return pow(Rational(1) - parameter_, multiplicity_);
    case LawKind::binomial: {
      Rational out = 1 / pow(Rational(1) + parameter_, multiplicity_);
      return out;
    }
    case LawKind::poisson:
      return rational_from_high_prec(exp(-to_high_prec(parameter_)), 128);
  }
  return Rational(0);
}

double TiltedDistribution::log_normalization() const {
  const double md = static_cast<double>(multiplicity_);
  switch (kind_) {
    case LawKind::geometric:
    case LawKind::negative_binomial:
      return md * std::log1p(-parameter_value_);
    case LawKind::binomial:
      return -md * std::log1p(parameter_value_);
    case LawKind::poisson:
      return -parameter_value_;
  }
  return 0.0;
}

Rational TiltedDistribution::point_mass(std::uint64_t k) const {
  Rational out = relative_mass(k) * normalization();
  out.canonicalize();
  return out;
}

double TiltedDistribution::point_mass_value(std::uint64_t k) const {
  return std::exp(log_relative_mass(k) + log_normalization());
}

Rational TiltedDistribution::ratio_to_mode(std::uint64_t k) const {
  Rational out = relative_mass(k) / relative_mass(mode_);
  return out;
}

double TiltedDistribution::log_ratio_to_mode(std::uint64_t k) const {
  return log_relative_mass(k) - log_relative_mass(mode_);
}

double TiltedDistribution::mean() const {
  const double md = static_cast<double>(multiplicity_);
  switch (kind_) {
    case LawKind::geometric:
    case LawKind::negative_binomial:
      return md * parameter_value_ / (1.0 - parameter_value_);
    case LawKind::binomial:
      return md * parameter_value_ / (1.0 + parameter_value_);
    case LawKind::poisson:
      return parameter_value_;
  }
  return 0.0;
}

TiltedDistribution component_distribution(const StructureSpec& spec, std::size_t i) {
  if (i < 1 || i > spec.n()) throw std::out_of_range("component_distribution: index outside 1..n");
  return TiltedDistribution(spec.cls(), i, spec.multiplicity(i), spec.weight(i), spec.tilt());
}

ComponentSampler::ComponentSampler(TiltedDistribution dist, Mode mode)
    : dist_(std::move(dist)), mode_(mode) {
  if (mode_ == Mode::exact) {
    const Rational tail_bound(BigInt(1), BigInt(1) << 70);
    Rational cumulative = 0;
    const auto top = dist_.support_max();
    for (std::uint64_t k = 0; cdf_.size() < kMaxCachedCdf; ++k) {
      if (top && k > *top) break;
      cumulative += dist_.point_mass(k);
      cdf_.emplace_back(cumulative);
      if (Rational(1) - cumulative < tail_bound) break;
    }
  } else {
    log_q_ = std::log(dist_.parameter_value());
    if (dist_.kind() == LawKind::poisson) poisson_zero_mass_ = std::exp(-dist_.parameter_value());
  }
}

std::uint64_t ComponentSampler::sample(Rng& rng) const {
  return mode_ == Mode::exact ? sample_exact(rng) : sample_fast(rng);
}

std::uint64_t ComponentSampler::sample_exact(Rng& rng) const {
  LazyUniform u(rng);
  for (std::size_t k = 0; k < cdf_.size(); ++k) {
    if (u.less_than(cdf_[k])) return k;
  }
  // Past the cached prefix: keep accumulating exact terms.
  const auto top = dist_.support_max();
  Rational cumulative = cdf_.back().value();
  std::uint64_t k = cdf_.size();
  for (;; ++k) {
    if (top && k >= *top) return *top;
    const Rational mass = dist_.point_mass(k);
    cumulative += mass;
    if (u.less_than(cumulative)) return k;
    // Poisson masses carry a rounded normalizer, so the partial sums may
    // stall just below U; stop once the terms are negligible.
    if (dist_.kind() == LawKind::poisson && static_cast<double>(k) > dist_.mean() &&
        mass < Rational(BigInt(1), BigInt(1) << 200)) {
      return k;
    }
  }
}

std::uint64_t ComponentSampler::sample_fast(Rng& rng) const {
  const double q = dist_.parameter_value();
  switch (dist_.kind()) {
    case LawKind::geometric:
      return static_cast<std::uint64_t>(std::floor(std::log(rng.uniform_positive()) / log_q_));
    case LawKind::negative_binomial: {
      std::uint64_t total = 0;
      for (std::uint64_t t = 0; t < dist_.multiplicity(); ++t) {
        total += static_cast<std::uint64_t>(std::floor(std::log(rng.uniform_positive()) / log_q_));
      }
      return total;
    }
    case LawKind::binomial: {
      const double p = q / (1.0 + q);
      std::uint64_t total = 0;
      for (std::uint64_t t = 0; t < dist_.multiplicity(); ++t) total += rng.uniform01() < p ? 1 : 0;
      return total;
    }
    case LawKind::poisson: {
      if (q >= 10.0) return sample_poisson_fast(q, rng);
      double u = rng.uniform01();
      double mass = poisson_zero_mass_;
      std::uint64_t k = 0;
      while (u >= mass && k < 1000) {
        u -= mass;
        ++k;
        mass *= q / static_cast<double>(k);
      }
      return k;
    }
  }
  return 0;
}

std::uint64_t sample_component(const TiltedDistribution& dist, Rng& rng, Mode mode) {
  return ComponentSampler(dist, mode).sample(rng);
}

std::uint64_t sample_poisson_fast(double lambda, Rng& rng) {
  if (lambda <= 0.0) return 0;
  if (lambda < 10.0) {
    double u = rng.uniform01();
    double mass = std::exp(-lambda);
    std::uint64_t k = 0;
    while (u >= mass && k < 1000) {
      u -= mass;
      ++k;
      mass *= lambda / static_cast<double>(k);
    }
    return k;
  }
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform01() - 0.5;
    const double v = rng.uniform01();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace pdcsample
