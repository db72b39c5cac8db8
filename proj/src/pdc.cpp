#include "pdcsample/pdc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pdcsample {

namespace {

constexpr std::size_t kStage1BufferCap = 1 << 16;

bool is_plain(const StructureSpec& spec) { return spec.unit_multiplicities() && spec.identity_weights(); }

bool is_prefix(const IndexSet& indices) {
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] != j + 1) return false;
  }
  return !indices.empty();
}

double log_tilted_term(const StructureSpec& spec, const BigInt& count, std::size_t l, double log_x) {
  if (sgn(count) == 0) return -std::numeric_limits<double>::infinity();
  double out = log_of(count) + static_cast<double>(l) * log_x;
  if (spec.cls() == StructureClass::assembly) out -= std::lgamma(static_cast<double>(l) + 1.0);
  return out;
}

SparseCounts merge(const SparseCounts& a, const SparseCounts& b) {
  SparseCounts out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out),
             [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
  return out;
}

template <typename Clock = std::chrono::steady_clock>
class ScopedTimer {
 public:
  explicit ScopedTimer(std::atomic<std::int64_t>& sink) : sink_(sink), start_(Clock::now()) {}
  ~ScopedTimer() {
    sink_ += std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start_).count();
  }

 private:
  std::atomic<std::int64_t>& sink_;
  typename Clock::time_point start_;
};

TableFuture ready_table(std::shared_ptr<const CountTable> table) {
  std::promise<std::shared_ptr<const CountTable>> ready;
  ready.set_value(std::move(table));
  return ready.get_future().share();
}

}  // namespace

AcceptanceFunction::AcceptanceFunction(const StructureSpec& spec, const std::vector<BigInt>& counts, Mode mode)
    : mode_(mode) {
  if (counts.empty()) throw std::invalid_argument("AcceptanceFunction: empty table");
  const double log_x = std::log(spec.tilt().value);
  log_tilted_.resize(counts.size());
  log_max_ = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < counts.size(); ++l) {
    log_tilted_[l] = log_tilted_term(spec, counts[l], l, log_x);
    if (log_tilted_[l] > log_max_) {
      log_max_ = log_tilted_[l];
      argmax_ = l;
    }
  }
  if (!std::isfinite(log_max_)) throw std::invalid_argument("AcceptanceFunction: table has no reachable weight");

  if (mode_ == Mode::exact) {
    std::vector<Rational> tilted(counts.size());
    Rational power = 1;
    Rational best = 0;
    for (std::size_t l = 0; l < counts.size(); ++l) {
      if (l > 0) {
        power *= spec.tilt().exact;
        if (spec.cls() == StructureClass::assembly) power /= static_cast<unsigned long>(l);
      }
      tilted[l] = Rational(counts[l]) * power;
      tilted[l].canonicalize();
      if (tilted[l] > best) best = tilted[l];
    }
    exact_.reserve(counts.size());
    for (auto& value : tilted) {
      Rational t = value / best;
      exact_.emplace_back(std::move(t));
    }
  }
}

double AcceptanceFunction::value(std::size_t y) const {
  if (!reachable(y)) return 0.0;
  if (mode_ == Mode::exact) return exact_[y].approx();
  return std::exp(log_tilted_[y] - log_max_);
}

const Threshold& AcceptanceFunction::threshold(std::size_t y) const {
  if (mode_ != Mode::exact) throw std::logic_error("AcceptanceFunction::threshold: exact mode only");
  return exact_.at(y);
}

bool accept_test(const Rational& t, Rng& rng, Mode mode) {
  if (sgn(t) <= 0) return false;
  if (t >= 1) return true;
  if (mode == Mode::exact) {
    LazyUniform u(rng);
    return u.less_than(t);
  }
  return rng.uniform01() < t.get_d();
}

bool accept_test(const Threshold& t, Rng& rng, Mode mode) {
  if (t.is_zero()) return false;
  if (t.at_least_one()) return true;
  if (mode == Mode::exact) {
    LazyUniform u(rng);
    return u.less_than(t);
  }
  return rng.uniform01() < t.approx();
}

double boost_factor(const StructureSpec& spec, const IndexSet& indices, const std::vector<BigInt>& counts) {
  if (indices.empty()) return 1.0;
  const double log_x = std::log(spec.tilt().value);
  double log_max = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < counts.size(); ++l) {
    log_max = std::max(log_max, log_tilted_term(spec, counts[l], l, log_x));
  }
  double log_norm = 0.0;
  for (std::size_t i : indices) log_norm += component_distribution(spec, i).log_normalization();
  return std::exp(-(log_max + log_norm));
}

double boost_factor(const StructureSpec& spec, const IndexSet& indices, const CountTable& table) {
  return boost_factor(spec, indices, table.counts());
}

IndexPolicy IndexPolicy::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("policy must look like kind:value");
  const std::string kind(text.substr(0, colon));
  const std::string value(text.substr(colon + 1));
  try {
    if (kind == "prefix") return prefix(std::stoul(value));
    if (kind == "singleton") return singleton(std::stoul(value));
    if (kind == "window") return window(std::stod(value));
  } catch (const std::logic_error&) {
    throw std::invalid_argument("bad policy value: " + value);
  }
  throw std::invalid_argument("unknown policy kind: " + kind);
}

std::string IndexPolicy::to_string() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::prefix: out << "prefix:" << size; break;
    case Kind::singleton: out << "singleton:" << size; break;
    case Kind::window: out << "window:" << alpha; break;
  }
  return out.str();
}

double window_center(const StructureSpec& spec) {
  if (spec.cls() == StructureClass::assembly) return spec.tilt().value;
  double best = -1.0;
  std::size_t best_index = 1;
  for (std::size_t i = 1; i <= spec.n(); ++i) {
    const double load = static_cast<double>(spec.weight(i)) * component_distribution(spec, i).mean();
    if (load > best) {
      best = load;
      best_index = i;
    }
  }
  return static_cast<double>(best_index);
}

IndexSet choose_index_set(const StructureSpec& spec, const IndexPolicy& policy) {
  const std::size_t n = spec.n();
  switch (policy.kind) {
    case IndexPolicy::Kind::prefix:
      if (policy.size == 0) throw std::invalid_argument("choose_index_set: empty prefix");
      return full_index_set(std::min(policy.size, n));
    case IndexPolicy::Kind::singleton:
      if (policy.size < 1 || policy.size > n) throw std::invalid_argument("choose_index_set: singleton outside 1..n");
      return IndexSet{policy.size};
    case IndexPolicy::Kind::window: {
      const double center = window_center(spec);
      const double half = policy.alpha * std::sqrt(center);
      const long long lo = std::max(1LL, std::llround(center - half));
      const long long hi = std::min(static_cast<long long>(n), std::llround(center + half));
      if (lo > hi) throw std::invalid_argument("choose_index_set: empty window");
      IndexSet out;
      for (long long i = lo; i <= hi; ++i) out.push_back(static_cast<std::size_t>(i));
      return out;
    }
  }
  throw std::invalid_argument("choose_index_set: unknown policy");
}

std::size_t default_dsh_index(const StructureSpec& spec) {
  if (spec.cls() != StructureClass::assembly) return 1;
  const long long nearest = std::llround(spec.tilt().value);
  return static_cast<std::size_t>(std::clamp(nearest, 1LL, static_cast<long long>(spec.n())));
}

void Sampler::count_attempt(std::uint64_t& attempts, const Stage1Draw& draw) {
  ++attempts;
  stats_.attempts.fetch_add(1, std::memory_order_relaxed);
  stats_.stage1_component_draws.fetch_add(draw.variates, std::memory_order_relaxed);
  if (attempts > attempt_cap_) throw BudgetExhausted(attempt_cap_);
}

HardRejectionSampler::HardRejectionSampler(StructureSpec spec, Mode mode, Stage1Strategy strategy)
    : Sampler(std::move(spec)), full_(spec_, IndexSet{}, mode, strategy) {}

SampleResult HardRejectionSampler::sample(Rng& stage1, Rng& /*second*/) {
  ScopedTimer timer(stats_.sampling_ns);
  const std::uint64_t n = spec_.n();
  std::uint64_t attempts = 0;
  for (;;) {
    Stage1Draw draw = full_.sample(stage1, n);
    count_attempt(attempts, draw);
    if (!draw.overflow && draw.weight == n) {
      stats_.acceptances.fetch_add(1, std::memory_order_relaxed);
      return {std::move(draw.counts), attempts};
    }
  }
}

DshSampler::DshSampler(StructureSpec spec, std::size_t index, Mode mode, Stage1Strategy strategy)
    : Sampler(std::move(spec)), index_(index), mode_(mode),
      rest_(spec_, IndexSet{index}, mode, strategy), dist_(component_distribution(spec_, index)) {
  std::uint64_t top = spec_.n() / dist_.weight();
  if (auto support = dist_.support_max()) top = std::min(top, *support);
  for (std::uint64_t z = 0; z <= top; ++z) {
    if (mode_ == Mode::exact) {
      exact_ratio_.emplace_back(dist_.ratio_to_mode(z));
    } else {
      ratio_.push_back(std::exp(dist_.log_ratio_to_mode(z)));
    }
  }
}

SampleResult DshSampler::sample(Rng& stage1, Rng& second) {
  ScopedTimer timer(stats_.sampling_ns);
  const std::uint64_t n = spec_.n();
  const std::uint64_t w = dist_.weight();
  std::uint64_t attempts = 0;
  for (;;) {
    Stage1Draw draw = rest_.sample(stage1, n);
    count_attempt(attempts, draw);
    if (draw.overflow) continue;
    const std::uint64_t residual = n - draw.weight;
    if (residual % w != 0) continue;
    const std::uint64_t z = residual / w;
    const std::size_t slots = mode_ == Mode::exact ? exact_ratio_.size() : ratio_.size();
    if (z >= slots) continue;
    const bool accepted = mode_ == Mode::exact ? accept_test(exact_ratio_[z], second, mode_)
                                               : second.uniform01() < ratio_[z];
    if (!accepted) continue;
    stats_.acceptances.fetch_add(1, std::memory_order_relaxed);
    SparseCounts counts = std::move(draw.counts);
    if (z > 0) {
      counts.emplace_back(index_, z);
      std::sort(counts.begin(), counts.end());
    }
    return {std::move(counts), attempts};
  }
}

PdcRecursiveSampler::PdcRecursiveSampler(StructureSpec spec, IndexSet indices, TableFuture table, Mode mode,
                                         Stage1Strategy strategy)
    : Sampler(std::move(spec)), indices_(std::move(indices)), mode_(mode),
      rest_(spec_, indices_, mode, strategy), future_(std::move(table)) {
  if (indices_.empty()) throw std::invalid_argument("PdcRecursiveSampler: index set must be nonempty");
}

PdcRecursiveSampler::PdcRecursiveSampler(StructureSpec spec, IndexSet indices,
                                         std::shared_ptr<const CountTable> table, Mode mode,
                                         Stage1Strategy strategy)
    : PdcRecursiveSampler(std::move(spec), std::move(indices),
                          ready_table(std::move(table)),
                          mode, strategy) {}

void PdcRecursiveSampler::resolve() {
  std::call_once(resolved_, [this] {
    table_ = future_.get();
    if (!table_) throw std::invalid_argument("PdcRecursiveSampler: null table");
    if (table_->max_weight() < spec_.n()) {
      throw std::invalid_argument("PdcRecursiveSampler: table max weight is below n");
    }
    acceptance_ = std::make_unique<AcceptanceFunction>(spec_, table_->counts(), mode_);
  });
}

const CountTable& PdcRecursiveSampler::table() {
  resolve();
  return *table_;
}

const AcceptanceFunction& PdcRecursiveSampler::acceptance() {
  resolve();
  return *acceptance_;
}

double PdcRecursiveSampler::boost() {
  resolve();
  return boost_factor(spec_, indices_, *table_);
}

std::optional<SampleResult> PdcRecursiveSampler::try_complete(const Stage1Draw& draw, Rng& second) {
  if (draw.overflow) return std::nullopt;
  const std::size_t residual = spec_.n() - draw.weight;
  // T(y) = 0 means t(y) = 0; skip the uniform.
  if (!acceptance_->reachable(residual)) return std::nullopt;
  const bool accepted = mode_ == Mode::exact ? accept_test(acceptance_->threshold(residual), second, mode_)
                                             : second.uniform01() < acceptance_->value(residual);
  if (!accepted) return std::nullopt;
  SparseCounts completion = table_->unrank(residual, second.uniform_rank(table_->count(residual)));
  return SampleResult{merge(draw.counts, completion), 0};
}

SampleResult PdcRecursiveSampler::sample(Rng& stage1, Rng& second) {
  resolve();
  ScopedTimer timer(stats_.sampling_ns);
  std::uint64_t attempts = 0;
  for (;;) {
    Stage1Draw draw;
    if (!buffer_.empty()) {
      draw = std::move(buffer_.front());
      buffer_.pop_front();
    } else {
      draw = rest_.sample(stage1, spec_.n());
    }
    count_attempt(attempts, draw);
    if (auto result = try_complete(draw, second)) {
      stats_.acceptances.fetch_add(1, std::memory_order_relaxed);
      result->attempts = attempts;
      return std::move(*result);
    }
  }
}

std::vector<SampleResult> PdcRecursiveSampler::sample_batch(std::size_t count, Rng& stage1, Rng& second) {
  while (future_.wait_for(std::chrono::seconds(0)) != std::future_status::ready &&
         buffer_.size() < kStage1BufferCap) {
    buffer_.push_back(rest_.sample(stage1, spec_.n()));
    buffered_high_water_ = std::max(buffered_high_water_, buffer_.size());
  }
  std::vector<SampleResult> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) out.push_back(sample(stage1, second));
  return out;
}

EulerSampler::EulerSampler(StructureSpec spec) : Sampler(std::move(spec)), table_(spec_.n()) {
  if (spec_.cls() != StructureClass::multiset || !is_plain(spec_)) {
    throw std::invalid_argument("EulerSampler: only for integer partitions");
  }
}

SampleResult EulerSampler::sample(Rng& /*stage1*/, Rng& second) {
  ScopedTimer timer(stats_.sampling_ns);
  stats_.attempts.fetch_add(1, std::memory_order_relaxed);
  stats_.acceptances.fetch_add(1, std::memory_order_relaxed);
  return {parts_to_counts(table_.sample(spec_.n(), second)), 1};
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::hard: return "hard";
    case Method::dsh: return "dsh";
    case Method::pdc_recursive: return "pdc-recursive";
    case Method::euler: return "euler";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method method : {Method::hard, Method::dsh, Method::pdc_recursive, Method::euler}) {
    if (to_string(method) == name) return method;
  }
  return std::nullopt;
}

std::shared_ptr<const CountTable> build_completion_table(const StructureSpec& spec, const IndexSet& indices) {
  if (is_plain(spec) && is_prefix(indices)) {
    const std::size_t k = indices.size();
    if (spec.cls() == StructureClass::multiset) {
      return std::make_shared<const CountTable>(build_partition_table(spec.n(), k));
    }
    if (spec.cls() == StructureClass::selection) {
      return std::make_shared<const CountTable>(build_distinct_table(spec.n(), k));
    }
  }
  return std::make_shared<const CountTable>(build_restricted_table(spec, indices, spec.n()));
}

SamplerPlan::SamplerPlan(StructureSpec spec, Method method, const std::optional<IndexPolicy>& policy, Mode mode)
    : spec_(std::move(spec)), method_(method), mode_(mode) {
  switch (method_) {
    case Method::hard:
      break;
    case Method::dsh:
      if (policy && policy->kind != IndexPolicy::Kind::singleton) {
        throw std::invalid_argument("dsh needs a singleton policy");
      }
      indices_ = policy ? choose_index_set(spec_, *policy) : IndexSet{default_dsh_index(spec_)};
      break;
    case Method::pdc_recursive: {
      const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(spec_.n()))));
      indices_ = choose_index_set(spec_, policy.value_or(IndexPolicy::prefix(root)));
      table_ = std::async(std::launch::async, [spec = spec_, indices = indices_] {
                 return build_completion_table(spec, indices);
               }).share();
      break;
    }
    case Method::euler:
      if (spec_.cls() != StructureClass::multiset || !is_plain(spec_)) {
        throw std::invalid_argument("euler is only for integer partitions");
      }
      break;
  }
}

SamplerPlan::SamplerPlan(StructureSpec spec, IndexSet indices, std::shared_ptr<const CountTable> table, Mode mode)
    : spec_(std::move(spec)), method_(Method::pdc_recursive), mode_(mode), indices_(std::move(indices)),
      table_(ready_table(std::move(table))) {}

std::unique_ptr<Sampler> SamplerPlan::instantiate() const {
  switch (method_) {
    case Method::hard: return std::make_unique<HardRejectionSampler>(spec_, mode_);
    case Method::dsh: return std::make_unique<DshSampler>(spec_, indices_.front(), mode_);
    case Method::pdc_recursive: return std::make_unique<PdcRecursiveSampler>(spec_, indices_, table_, mode_);
    case Method::euler: return std::make_unique<EulerSampler>(spec_);
  }
  throw std::invalid_argument("SamplerPlan: unknown method");
}

std::unique_ptr<Sampler> make_sampler(const StructureSpec& spec, Method method,
                                      const std::optional<IndexPolicy>& policy, Mode mode) {
  return SamplerPlan(spec, method, policy, mode).instantiate();
}

SparseCounts hard_rejection(const StructureSpec& spec, Rng& rng, Mode mode) {
  return HardRejectionSampler(spec, mode).sample(rng).counts;
}

SparseCounts pdc_dsh(const StructureSpec& spec, std::size_t index, Rng& rng, Mode mode) {
  return DshSampler(spec, index, mode).sample(rng).counts;
}

SparseCounts pdc_recursive(const StructureSpec& spec, const IndexSet& indices,
                           std::shared_ptr<const CountTable> table, Rng& rng, Mode mode) {
  return PdcRecursiveSampler(spec, indices, std::move(table), mode).sample(rng).counts;
}

std::uint64_t weighted_sum(const StructureSpec& spec, const SparseCounts& counts) {
  std::uint64_t total = 0;
  for (const auto& [index, z] : counts) total += spec.weight(index) * z;
  return total;
}

}  // namespace pdcsample
