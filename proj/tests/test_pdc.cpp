#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

#include "pdcsample/oracle.hpp"
#include "pdcsample/pdc.hpp"

using namespace pdcsample;

namespace {

std::vector<SparseCounts> draw(Sampler& sampler, std::size_t count, std::uint64_t seed) {
  Rng stage1 = Rng::fork(seed, 0);
  Rng second = Rng::fork(seed, 1);
  std::vector<SparseCounts> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) out.push_back(sampler.sample(stage1, second).counts);
  return out;
}

std::vector<std::uint64_t> histogram(const std::vector<SparseCounts>& samples, const ObjectCensus& census) {
  std::vector<std::uint64_t> cells(census.size(), 0);
  for (const auto& z : samples) ++cells[census.index_of(z)];
  return cells;
}

double mean_attempts(Sampler& sampler, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  double total = 0.0;
  for (std::size_t s = 0; s < count; ++s) total += static_cast<double>(sampler.sample(rng).attempts);
  return total / static_cast<double>(count);
}

}  // namespace

TEST_CASE("worked example at n = 10, I = {1,2,3}") {
  const auto spec = StructureSpec::partitions(10);
  const auto table = build_completion_table(spec, {1, 2, 3});
  CHECK(table->bounded());
  const double row[] = {0.666591, 0.888688, 0.888588, 0.789767, 0.658065,
                        0.614125, 0.467852, 0.389833, 0.311831, 0.242508};
  for (Mode mode : {Mode::fast, Mode::exact}) {
    const AcceptanceFunction acceptance(spec, table->counts(), mode);
    for (std::size_t l = 1; l <= 10; ++l) CHECK(acceptance.tilted(l) == doctest::Approx(row[l - 1]).epsilon(1e-5));
    // T(0) x^0 = 1 is the row maximum, so t(6) = T(6) x^6.
    CHECK(acceptance.argmax() == 0);
    CHECK(acceptance.value(6) == doctest::Approx(0.614125).epsilon(1e-5));
    // Ratio against the largest printed column, l = 2.
    CHECK(acceptance.tilted(6) / acceptance.tilted(2) == doctest::Approx(0.691047).epsilon(1e-5));
  }
  const AcceptanceFunction exact(spec, table->counts(), Mode::exact);
  CHECK(exact.threshold(6).value() == table->count(6) * pow(spec.tilt().exact, 6));
  CHECK(exact.value(11) == 0.0);
}

TEST_CASE("max of t is exactly one") {
  const std::vector<std::pair<StructureSpec, IndexSet>> cases{
      {StructureSpec::partitions(10), {1, 2, 3}},
      {StructureSpec::partitions(12), full_index_set(12)},
      {StructureSpec::distinct_partitions(15), {1, 2, 3, 4}},
      {StructureSpec::set_partitions(12), {2, 3, 4}},
      {StructureSpec::set_partitions(9), full_index_set(9)},
      {StructureSpec(StructureClass::selection, 10, Tilt::from_rational(Rational(2, 3)),
                     {0, 1, 2, 1, 3, 1, 1, 2, 1, 1, 1}),
       {1, 4}},
  };
  for (const auto& [spec, indices] : cases) {
    const auto table = build_completion_table(spec, indices);
    const AcceptanceFunction acceptance(spec, table->counts(), Mode::exact);
    Rational best(0);
    for (std::size_t l = 0; l <= spec.n(); ++l) {
      const Rational& t = acceptance.threshold(l).value();
      CHECK(t >= 0);
      CHECK(t <= 1);
      if (t > best) best = t;
    }
    CHECK(best == 1);
    CHECK(acceptance.threshold(acceptance.argmax()).at_least_one());
  }
}

TEST_CASE("accept test") {
  Rng rng(4);
  for (Mode mode : {Mode::exact, Mode::fast}) {
    for (int s = 0; s < 1000; ++s) {
      CHECK(accept_test(Rational(1), rng, mode));
      CHECK_FALSE(accept_test(Rational(0), rng, mode));
    }
    const std::size_t trials = 1'000'000;
    const Threshold third(Rational(1, 3));
    std::size_t hits = 0;
    for (std::size_t s = 0; s < trials; ++s) hits += accept_test(third, rng, mode) ? 1 : 0;
    const double sigma = std::sqrt(trials * (1.0 / 3.0) * (2.0 / 3.0));
    CHECK(std::abs(static_cast<double>(hits) - trials / 3.0) < 3.0 * sigma);
  }
}

TEST_CASE("boost factor") {
  for (std::size_t n : {10, 100, 400}) {
    const auto spec = StructureSpec::partitions(n);
    std::vector<BigInt> empty_only(n + 1, 0);
    empty_only[0] = 1;
    CHECK(boost_factor(spec, {}, empty_only) == doctest::Approx(1.0));
    const double x = spec.tilt().value;
    CHECK(boost_factor(spec, {1}, build_partition_table(n, 1)) == doctest::Approx(1.0 / (1.0 - x)));
  }
  const auto big = StructureSpec::partitions(100000);
  const double asymptotic = std::sqrt(6.0 * 100000) / std::numbers::pi;
  CHECK(boost_factor(big, {1}, build_partition_table(100000, 1)) == doctest::Approx(asymptotic).epsilon(0.01));

  for (std::size_t n : {5, 20, 100, 400, 1600}) {
    const auto spec = StructureSpec::distinct_partitions(n);
    const double boost = boost_factor(spec, {1}, build_distinct_table(n, 1));
    CHECK(boost >= 1.0);
    CHECK(boost <= 2.0);
  }
  const auto sets = StructureSpec::set_partitions(3);
  CHECK(boost_factor(sets, {}, std::vector<BigInt>{1, 0, 0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("index set policies") {
  CHECK(choose_index_set(StructureSpec::partitions(10), IndexPolicy::prefix(3)) == IndexSet{1, 2, 3});
  CHECK(choose_index_set(StructureSpec::partitions(2), IndexPolicy::prefix(3)) == IndexSet{1, 2});
  CHECK(choose_index_set(StructureSpec::partitions(10), IndexPolicy::singleton(1)) == IndexSet{1});
  CHECK_THROWS_AS(choose_index_set(StructureSpec::partitions(10), IndexPolicy::singleton(11)), std::invalid_argument);
  CHECK_THROWS_AS(choose_index_set(StructureSpec::partitions(10), IndexPolicy::prefix(0)), std::invalid_argument);

  const auto sets = StructureSpec::set_partitions(1000);
  CHECK(window_center(sets) == doctest::Approx(5.2496).epsilon(1e-4));
  const IndexSet window = choose_index_set(sets, IndexPolicy::window(2.0));
  REQUIRE_FALSE(window.empty());
  const double mid = 0.5 * static_cast<double>(window.front() + window.back());
  CHECK(std::abs(mid - 5.25) <= 0.5);
  CHECK(contains(window, 5));
  CHECK(default_dsh_index(sets) == 5);
  CHECK(default_dsh_index(StructureSpec::partitions(50)) == 1);

  for (const char* text : {"prefix:4", "window:1.5", "singleton:2"}) {
    CHECK(IndexPolicy::parse(text).to_string() == text);
  }
  CHECK_THROWS(IndexPolicy::parse("window"));
  CHECK_THROWS(IndexPolicy::parse("ring:3"));
  CHECK(parse_method("pdc-recursive") == Method::pdc_recursive);
  CHECK_FALSE(parse_method("soft").has_value());
}

TEST_CASE("every sample has weight n") {
  const std::vector<StructureSpec> specs{
      StructureSpec::partitions(30), StructureSpec::distinct_partitions(30), StructureSpec::set_partitions(30),
      StructureSpec(StructureClass::multiset, 12, Tilt::from_rational(Rational(3, 4)),
                    {0, 1, 2, 1, 1, 3, 1, 1, 2, 1, 1, 1, 1}, {0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6})};
  for (const auto& spec : specs) {
    for (Mode mode : {Mode::exact, Mode::fast}) {
      for (Method method : {Method::hard, Method::dsh, Method::pdc_recursive}) {
        auto sampler = make_sampler(spec, method, std::nullopt, mode);
        for (const auto& z : draw(*sampler, 200, 9)) CHECK(weighted_sum(spec, z) == spec.n());
      }
    }
  }
  EulerSampler euler(StructureSpec::partitions(30));
  for (const auto& z : draw(euler, 200, 9)) CHECK(weighted_sum(euler.spec(), z) == 30);
}

TEST_CASE("methods agree at n = 6") {
  const std::size_t samples = 100'000;
  for (const auto& spec : {StructureSpec::partitions(6), StructureSpec::distinct_partitions(6),
                           StructureSpec::set_partitions(6)}) {
    const ObjectCensus census = enumerate(spec);
    std::vector<std::vector<std::uint64_t>> cells;
    std::uint64_t seed = 100;
    std::vector<std::unique_ptr<Sampler>> samplers;
    samplers.push_back(make_sampler(spec, Method::hard, std::nullopt, Mode::exact));
    samplers.push_back(make_sampler(spec, Method::dsh, std::nullopt, Mode::exact));
    samplers.push_back(make_sampler(spec, Method::pdc_recursive, IndexPolicy::prefix(3), Mode::exact));
    samplers.push_back(make_sampler(spec, Method::pdc_recursive, IndexPolicy::prefix(6), Mode::exact));
    if (spec.cls() == StructureClass::multiset) samplers.push_back(std::make_unique<EulerSampler>(spec));
    const double alpha = bonferroni_threshold(2 * samplers.size());
    for (auto& sampler : samplers) {
      const auto samples_drawn = draw(*sampler, samples, ++seed);
      cells.push_back(histogram(samples_drawn, census));
      CHECK(chi_square_uniformity(samples_drawn, census).p_value > alpha);
    }
    for (std::size_t m = 1; m < cells.size(); ++m) {
      CHECK(chi_square_homogeneity(cells[0], cells[m]).p_value > alpha);
    }
  }
}

TEST_CASE("uniform under any tilt") {
  for (const Rational& x : {Rational(1, 5), Rational(9, 10)}) {
    const auto spec = StructureSpec::partitions(6, Tilt::from_rational(x));
    const ObjectCensus census = enumerate(spec);
    for (Method method : {Method::dsh, Method::pdc_recursive}) {
      auto sampler = make_sampler(spec, method, std::nullopt, Mode::exact);
      CHECK(chi_square_uniformity(draw(*sampler, 50'000, 3), census).p_value > 1e-3);
    }
  }
}

TEST_CASE("exact mode is deterministic") {
  for (const auto& spec : {StructureSpec::partitions(40), StructureSpec::set_partitions(25)}) {
    for (Method method : {Method::hard, Method::dsh, Method::pdc_recursive}) {
      auto a = make_sampler(spec, method, std::nullopt, Mode::exact);
      auto b = make_sampler(spec, method, std::nullopt, Mode::exact);
      CHECK(draw(*a, 300, 77) == draw(*b, 300, 77));
    }
  }
}

TEST_CASE("attempt ratios follow the boost factor") {
  // mean hard / mean pdc = boost(I), since P(accept) = P(E) boost(I).
  const std::size_t n = 60;
  const std::size_t samples = 10'000;
  const auto spec = StructureSpec::partitions(n);
  HardRejectionSampler hard(spec, Mode::fast);
  DshSampler dsh(spec, 1, Mode::fast);
  PdcRecursiveSampler pdc(spec, {1, 2, 3, 4, 5, 6, 7, 8}, build_completion_table(spec, full_index_set(8)), Mode::fast);
  const double hard_mean = mean_attempts(hard, samples, 1);
  const double dsh_mean = mean_attempts(dsh, samples, 2);
  const double pdc_mean = mean_attempts(pdc, samples, 3);
  const double dsh_boost = boost_factor(spec, {1}, build_partition_table(n, 1));
  CHECK(hard_mean / dsh_mean == doctest::Approx(dsh_boost).epsilon(0.2));
  CHECK(hard_mean / pdc_mean == doctest::Approx(pdc.boost()).epsilon(0.2));
  CHECK(pdc_mean <= dsh_mean);
  CHECK(dsh_mean <= hard_mean);
  CHECK(pdc.stats().acceptances.load() == samples);
  CHECK(pdc.stats().rejection_ratio() == doctest::Approx(pdc_mean));
}

TEST_CASE("attempt cap") {
  const auto spec = StructureSpec::partitions(50, Tilt::from_rational(Rational(1, 1000)));
  HardRejectionSampler hard(spec, Mode::fast);
  hard.set_attempt_cap(1000);
  Rng rng(1);
  try {
    hard.sample(rng);
    FAIL("expected budget exhaustion");
  } catch (const BudgetExhausted& e) {
    CHECK(e.attempts() == 1000);
  }
  CHECK(hard.stats().acceptances.load() == 0);

  // A cap of one still admits a first-attempt success.
  PdcRecursiveSampler whole(StructureSpec::partitions(8), full_index_set(8),
                            build_completion_table(StructureSpec::partitions(8), full_index_set(8)), Mode::exact);
  whole.set_attempt_cap(1);
  Rng other(2);
  std::size_t completed = 0;
  for (int s = 0; s < 50; ++s) {
    std::uint64_t attempts = 0;
    try {
      attempts = whole.sample(other).attempts;
    } catch (const BudgetExhausted&) {
      continue;
    }
    CHECK(attempts == 1);
    ++completed;
  }
  CHECK(completed > 0);
}

TEST_CASE("table smaller than n is rejected") {
  const auto spec = StructureSpec::partitions(10);
  auto small = std::make_shared<const CountTable>(build_partition_table(8, 3));
  PdcRecursiveSampler sampler(spec, {1, 2, 3}, small, Mode::exact);
  Rng rng(1);
  CHECK_THROWS_AS(sampler.sample(rng), std::invalid_argument);
}

TEST_CASE("batch sampling matches sequential sampling") {
  const auto spec = StructureSpec::partitions(200);
  const IndexSet indices = full_index_set(15);
  const auto table = build_completion_table(spec, indices);

  std::promise<std::shared_ptr<const CountTable>> promise;
  PdcRecursiveSampler pending(spec, indices, promise.get_future().share(), Mode::exact);
  std::thread builder([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    promise.set_value(table);
  });
  Rng a1 = Rng::fork(5, 0), a2 = Rng::fork(5, 1);
  const auto batched = pending.sample_batch(400, a1, a2);
  builder.join();

  PdcRecursiveSampler ready(spec, indices, table, Mode::exact);
  Rng b1 = Rng::fork(5, 0), b2 = Rng::fork(5, 1);
  REQUIRE(batched.size() == 400);
  for (const auto& result : batched) {
    const SampleResult expected = ready.sample(b1, b2);
    CHECK(result.counts == expected.counts);
    CHECK(result.attempts == expected.attempts);
  }
  CHECK(pending.buffered_high_water() > 0);
}

TEST_CASE("plans share one table") {
  const SamplerPlan plan(StructureSpec::set_partitions(40), Method::pdc_recursive, IndexPolicy::window(1.0), Mode::fast);
  CHECK_FALSE(plan.indices().empty());
  auto a = plan.instantiate();
  auto b = plan.instantiate();
  auto& pa = dynamic_cast<PdcRecursiveSampler&>(*a);
  auto& pb = dynamic_cast<PdcRecursiveSampler&>(*b);
  CHECK(&pa.table() == &pb.table());
  CHECK_THROWS(SamplerPlan(StructureSpec::set_partitions(10), Method::euler, std::nullopt, Mode::exact));
}
