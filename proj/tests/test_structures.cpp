#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include <boost/math/constants/constants.hpp>

#include "pdcsample/oracle.hpp"
#include "pdcsample/rng.hpp"
#include "pdcsample/stage1.hpp"
#include "pdcsample/structures.hpp"

using namespace pdcsample;

namespace {

Tilt half() { return Tilt::from_rational(Rational(1, 2)); }

// |observed - expected| within z standard errors of a binomial proportion.
void check_proportion(std::uint64_t hits, std::uint64_t trials, double p, double z = 4.0) {
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(trials));
  CHECK(std::abs(static_cast<double>(hits) / static_cast<double>(trials) - p) < z * sigma);
}

}  // namespace

TEST_CASE("unrestricted tilt") {
  // High-precision reference values of e^{-pi/sqrt(6n)}.
  CHECK(tilt_unrestricted(10).value == doctest::Approx(0.666591497911943).epsilon(1e-14));
  CHECK(tilt_unrestricted(6).value == doctest::Approx(0.592384847188389).epsilon(1e-14));
  CHECK(tilt_unrestricted(1000000).value > tilt_unrestricted(1000).value);
  for (std::uint64_t n : {1ULL, 2ULL, 10ULL, 1000ULL, 1000000ULL}) {
    const Tilt x = tilt_unrestricted(n);
    CHECK(x.exact > 0);
    CHECK(x.exact < 1);
    // Dyadic with at most 53 significant bits.
    CHECK(mpz_sizeinbase(x.exact.get_num_mpz_t(), 2) <= 53);
    const double exact = std::exp(-boost::math::constants::pi<double>() / std::sqrt(6.0 * static_cast<double>(n)));
    CHECK(std::abs(x.value - exact) <= 4 * std::ldexp(exact, -53));
  }
}

TEST_CASE("distinct tilt") {
  CHECK(tilt_distinct(12).value == doctest::Approx(0.769665412493240).epsilon(1e-14));
  CHECK(tilt_distinct(3).exact == tilt_unrestricted(6).exact);
  for (std::uint64_t n : {1ULL, 7ULL, 100ULL, 5000ULL}) {
    CHECK(tilt_distinct(n).exact > tilt_unrestricted(n).exact);
    CHECK(tilt_distinct(n).exact < 1);
  }
}

TEST_CASE("set partition tilt solves x e^x = n") {
  CHECK(tilt_set_partition(1).value == doctest::Approx(0.567143290409784).epsilon(1e-14));
  CHECK(tilt_set_partition(10).value == doctest::Approx(1.745528002740699).epsilon(1e-14));
  CHECK(tilt_set_partition(1000).value == doctest::Approx(5.249602852401596).epsilon(1e-14));
  for (std::uint64_t n : {1ULL, 10ULL, 200ULL, 1000ULL, 123457ULL, 1000000ULL}) {
    const HighPrec x = to_high_prec(tilt_set_partition(n).exact);
    const HighPrec residual = abs(x * exp(x) - HighPrec(n));
    CHECK(residual < HighPrec(n) * ldexp(HighPrec(1), -50));
  }
  const HighPrec e = exp(HighPrec(1));
  CHECK(abs(solve_x_exp_x(e) - 1) < HighPrec(1e-40));
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(StructureSpec(StructureClass::multiset, 5, Tilt::from_rational(1)), std::invalid_argument);
  CHECK_THROWS_AS(StructureSpec(StructureClass::selection, 5, Tilt::from_rational(Rational(3, 2))),
                  std::invalid_argument);
  CHECK_NOTHROW(StructureSpec(StructureClass::assembly, 5, Tilt::from_rational(Rational(3, 2))));
  CHECK_THROWS_AS(StructureSpec(StructureClass::multiset, 3, half(), {0, 1, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(StructureSpec(StructureClass::multiset, 3, half(), {0, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(StructureSpec(StructureClass::assembly, 3, half(), {}, {0, 1, 1, 3}), std::invalid_argument);
}

TEST_CASE("component laws follow the class") {
  const auto partitions = StructureSpec::partitions(10, half());
  const auto distinct = StructureSpec::distinct_partitions(10, half());
  const auto sets = StructureSpec::set_partitions(10);
  CHECK(component_distribution(partitions, 3).kind() == LawKind::geometric);
  CHECK(component_distribution(distinct, 3).kind() == LawKind::binomial);
  CHECK(component_distribution(sets, 3).kind() == LawKind::poisson);
  const StructureSpec doubled(StructureClass::multiset, 4, half(), {0, 2, 1, 3, 1});
  CHECK(component_distribution(doubled, 1).kind() == LawKind::negative_binomial);
  CHECK(component_distribution(doubled, 2).kind() == LawKind::geometric);
  CHECK_THROWS_AS(component_distribution(partitions, 0), std::out_of_range);
  CHECK_THROWS_AS(component_distribution(partitions, 11), std::out_of_range);
}

TEST_CASE("geometric point masses at x = 1/2") {
  const auto law = component_distribution(StructureSpec::partitions(5, half()), 1);
  for (std::uint64_t k = 0; k < 10; ++k) {
    Rational expected(1, 2);
    for (std::uint64_t j = 0; j < k; ++j) expected /= 2;
    CHECK(law.point_mass(k) == expected);
  }
  CHECK(law.mode() == 0);
  CHECK(law.ratio_to_mode(3) == Rational(1, 8));
}

TEST_CASE("Bernoulli point mass x^i / (1 + x^i)") {
  const Tilt x = Tilt::from_rational(Rational(2, 3));
  const auto law = component_distribution(StructureSpec::distinct_partitions(6, x), 2);
  CHECK(law.point_mass(1) == Rational(4, 13));
  CHECK(law.point_mass(0) == Rational(9, 13));
  CHECK(law.point_mass(2) == 0);
  REQUIRE(law.support_max());
  CHECK(*law.support_max() == 1);
}

TEST_CASE("Poisson rate x^i / i! and mean x at i = 1") {
  const auto spec = StructureSpec::set_partitions(10);
  const auto first = component_distribution(spec, 1);
  CHECK(first.parameter() == spec.tilt().exact);
  CHECK(first.mean() == doctest::Approx(spec.tilt().value));
  const auto third = component_distribution(spec, 3);
  Rational expected = pow(spec.tilt().exact, 3) / 6;
  expected.canonicalize();
  CHECK(third.parameter() == expected);
}

TEST_CASE("point masses sum to one") {
  const StructureSpec specs[] = {
      StructureSpec::partitions(12), StructureSpec::distinct_partitions(12), StructureSpec::set_partitions(12),
      StructureSpec(StructureClass::multiset, 6, Tilt::from_rational(Rational(3, 4)), {0, 3, 1, 2, 1, 1, 4}),
      StructureSpec(StructureClass::selection, 6, Tilt::from_rational(Rational(3, 4)), {0, 3, 1, 2, 1, 1, 4}),
      StructureSpec(StructureClass::assembly, 6, Tilt::from_rational(2), {0, 2, 3, 1, 1, 1, 1})};
  for (const auto& spec : specs) {
    for (std::size_t i = 1; i <= spec.n(); ++i) {
      const auto law = component_distribution(spec, i);
      double total = 0.0;
      for (std::uint64_t k = 0; k < 4000; ++k) total += law.point_mass_value(k);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("normalization constants in closed form") {
  const Tilt x = Tilt::from_rational(Rational(1, 3));
  const StructureSpec multiset(StructureClass::multiset, 4, x, {0, 2, 1, 1, 1});
  const StructureSpec selection(StructureClass::selection, 4, x, {0, 2, 1, 1, 1});
  // (1 - x)^2 and (1 + x)^{-2}
  CHECK(component_distribution(multiset, 1).normalization() == Rational(4, 9));
  CHECK(component_distribution(selection, 1).normalization() == Rational(9, 16));
  const auto poisson = component_distribution(StructureSpec::set_partitions(4, Tilt::from_rational(1)), 1);
  CHECK(poisson.normalization().get_d() == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("sample_component frequencies") {
  for (Mode mode : {Mode::exact, Mode::fast}) {
    Rng rng(2024, mode == Mode::exact ? 0 : 1);
    const auto spec = StructureSpec::partitions(10);
    const auto law = component_distribution(spec, 2);
    const int trials = 100000;
    std::uint64_t zeros = 0;
    const ComponentSampler geometric(law, mode);
    for (int t = 0; t < trials; ++t) zeros += geometric.sample(rng) == 0;
    check_proportion(zeros, trials, 1.0 - law.parameter_value());

    for (double lambda_tilt : {1.7455, 30.0}) {
      const auto sets = StructureSpec::set_partitions(40, Tilt::from_double(lambda_tilt));
      const auto poisson = component_distribution(sets, 1);
      const ComponentSampler sampler(poisson, mode);
      double sum = 0.0;
      const int draws = 100000;
      for (int t = 0; t < draws; ++t) sum += static_cast<double>(sampler.sample(rng));
      const double lambda = poisson.parameter_value();
      CHECK(std::abs(sum / draws - lambda) < 4.0 * std::sqrt(lambda / draws));
    }

    const StructureSpec negative(StructureClass::multiset, 4, Tilt::from_rational(Rational(3, 5)), {0, 3, 1, 1, 1});
    const auto nb = component_distribution(negative, 1);
    double sum = 0.0;
    const int draws = 100000;
    const ComponentSampler nb_sampler(nb, mode);
    for (int t = 0; t < draws; ++t) sum += static_cast<double>(nb_sampler.sample(rng));
    const double q = 0.6, mean = 3 * q / (1 - q), variance = 3 * q / ((1 - q) * (1 - q));
    CHECK(std::abs(sum / draws - mean) < 4.0 * std::sqrt(variance / draws));
  }
}

TEST_CASE("free-function draw matches the law") {
  Rng rng(8);
  const auto law = component_distribution(StructureSpec::distinct_partitions(4, half()), 1);
  std::uint64_t ones = 0;
  for (int t = 0; t < 2000; ++t) ones += sample_component(law, rng, Mode::fast);
  check_proportion(ones, 2000, 1.0 / 3.0);
}

TEST_CASE("binomial draws never exceed the multiplicity") {
  const StructureSpec spec(StructureClass::selection, 5, Tilt::from_rational(Rational(9, 10)), {0, 3, 1, 1, 1, 1});
  const auto law = component_distribution(spec, 1);
  for (Mode mode : {Mode::exact, Mode::fast}) {
    Rng rng(5);
    std::map<std::uint64_t, int> seen;
    const ComponentSampler sampler(law, mode);
    for (int t = 0; t < 20000; ++t) ++seen[sampler.sample(rng)];
    CHECK(seen.rbegin()->first <= 3);
    CHECK(seen.size() == 4);
  }
}

TEST_CASE("accept test on a lazy bit stream") {
  Rng rng(99);
  LazyUniform u(rng);
  CHECK(u.less_than(Rational(1)));
  CHECK_FALSE(u.less_than(Rational(0)));
  const Threshold third(Rational(1, 3));
  std::uint64_t hits = 0;
  const int trials = 1000000;
  for (int t = 0; t < trials; ++t) {
    LazyUniform draw(rng);
    hits += draw.less_than(third);
  }
  check_proportion(hits, trials, 1.0 / 3.0);
}

TEST_CASE("lazy comparison resolves thresholds inside one 64-bit cell") {
  // t = (2^64 - 1) / 2^64 + 2^-130: the first word alone cannot decide U < t
  // when it is all ones, so later words must be consulted.
  Rational t = Rational(BigInt(1), BigInt(1)) - Rational(1) / Rational(BigInt(1) << 64);
  t += Rational(1) / Rational(BigInt(1) << 130);
  t.canonicalize();
  Rng rng(3);
  std::uint64_t hits = 0;
  for (int k = 0; k < 1000; ++k) {
    LazyUniform u(rng);
    hits += u.less_than(Threshold(t));
  }
  CHECK(hits == 1000);
}

TEST_CASE("rng streams are deterministic and distinct") {
  Rng a(7, 0), b(7, 0), c(7, 1);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
  Rng r(11);
  for (int k = 0; k < 1000; ++k) {
    const BigInt rank = r.uniform_rank(BigInt(5));
    CHECK(rank >= 1);
    CHECK(rank <= 5);
  }
}

TEST_CASE("stage 1 over the full index set is empty") {
  const auto spec = StructureSpec::partitions(10);
  Rng rng(1);
  for (Mode mode : {Mode::exact, Mode::fast}) {
    const Stage1Draw draw = sample_stage1(spec, full_index_set(10), rng, mode);
    CHECK(draw.counts.empty());
    CHECK(draw.weight == 0);
  }
}

TEST_CASE("stage 1 weight is the weighted sum of its counts") {
  const SparseCounts one_four{{4, 1}};
  std::uint64_t weight = 0;
  for (const auto& [i, z] : one_four) weight += i * z;
  CHECK(weight == 4);

  const StructureSpec specs[] = {StructureSpec::partitions(30), StructureSpec::distinct_partitions(30),
                                 StructureSpec::set_partitions(30)};
  for (const auto& spec : specs) {
    for (auto strategy : {Stage1Strategy::per_index, Stage1Strategy::automatic}) {
      Stage1Sampler sampler(spec, IndexSet{1, 2, 3}, Mode::fast, strategy);
      Rng rng(17);
      for (int t = 0; t < 2000; ++t) {
        const Stage1Draw draw = sampler.sample(rng);
        std::uint64_t total = 0;
        for (const auto& [i, z] : draw.counts) {
          CHECK(i > 3);
          CHECK(z > 0);
          total += spec.weight(i) * z;
        }
        CHECK(total == draw.weight);
      }
    }
  }
}

TEST_CASE("stage 1 strategies agree in law") {
  // Two-sample chi-square on the law of the stage-1 weight m.
  auto weight_law = [](const StructureSpec& spec, Stage1Strategy strategy, Mode mode, std::uint64_t seed) {
    Stage1Sampler sampler(spec, IndexSet{}, mode, strategy);
    Rng rng(seed);
    std::vector<std::uint64_t> cells(spec.n() * 3 + 2, 0);
    for (int t = 0; t < 100000; ++t) {
      const auto m = sampler.sample(rng).weight;
      ++cells[std::min<std::uint64_t>(m, cells.size() - 1)];
    }
    return cells;
  };
  const auto sets = StructureSpec::set_partitions(8);
  const auto reference = weight_law(sets, Stage1Strategy::per_index, Mode::exact, 1);
  const auto process = weight_law(sets, Stage1Strategy::poisson_process, Mode::fast, 2);
  CHECK(chi_square_homogeneity(reference, process).p_value > 1e-3);

  const StructureSpec multiset(StructureClass::multiset, 8, Tilt::from_rational(Rational(3, 4)),
                               {0, 2, 1, 3, 1, 1, 1, 2, 1});
  CHECK(chi_square_homogeneity(weight_law(multiset, Stage1Strategy::per_index, Mode::exact, 3),
                               weight_law(multiset, Stage1Strategy::sparse, Mode::fast, 4))
            .p_value > 1e-3);
  const auto distinct = StructureSpec::distinct_partitions(8);
  CHECK(chi_square_homogeneity(weight_law(distinct, Stage1Strategy::per_index, Mode::exact, 5),
                               weight_law(distinct, Stage1Strategy::sparse, Mode::fast, 6))
            .p_value > 1e-3);
}

TEST_CASE("exact mode requires per-index stage 1") {
  CHECK_THROWS_AS(Stage1Sampler(StructureSpec::set_partitions(5), IndexSet{}, Mode::exact,
                                Stage1Strategy::poisson_process),
                  std::invalid_argument);
  CHECK_THROWS_AS(Stage1Sampler(StructureSpec::set_partitions(5), IndexSet{}, Mode::fast, Stage1Strategy::sparse),
                  std::invalid_argument);
}
