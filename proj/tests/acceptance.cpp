// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pdcsample/bench.hpp"
#include "pdcsample/cli.hpp"
#include "pdcsample/oracle.hpp"
#include "pdcsample/pdc.hpp"
#include "pdcsample/tables.hpp"

using namespace pdcsample;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... values) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, values...);
  return buffer;
}

std::size_t ceil_sqrt(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
}

Verdict table_reproduction() {
  const std::vector<std::vector<int>> printed{
      {1, 1, 1, 1, 1, 1, 1, 1, 1, 1},       {1, 2, 2, 3, 3, 4, 4, 5, 5, 6},
      {1, 2, 3, 4, 5, 7, 8, 10, 12, 14},    {1, 2, 3, 5, 6, 9, 11, 15, 18, 23},
      {1, 2, 3, 5, 7, 10, 13, 18, 23, 30},  {1, 2, 3, 5, 7, 11, 14, 20, 26, 35},
      {1, 2, 3, 5, 7, 11, 15, 21, 28, 38},  {1, 2, 3, 5, 7, 11, 15, 22, 29, 40},
      {1, 2, 3, 5, 7, 11, 15, 22, 30, 41},  {1, 2, 3, 5, 7, 11, 15, 22, 30, 42}};
  const auto start = Clock::now();
  std::ostringstream out, err;
  const int code = run_cli({"table", "--structure", "partitions", "--n", "10", "--k", "10"}, out, err);
  const double elapsed = seconds_since(start);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  int matched = 0;
  for (const auto& row : printed) {
    for (int expected : row) {
      int value = -1;
      in >> value;
      matched += value == expected ? 1 : 0;
    }
  }
  const bool pass = code == kExitOk && matched == 100 && elapsed < 1.0;
  return {pass, fmt("%d/100 entries equal, diagonal ends 30 42, %.3f s", matched, elapsed)};
}

Verdict worked_example() {
  const auto start = Clock::now();
  const auto spec = StructureSpec::partitions(10);
  const auto table = build_completion_table(spec, {1, 2, 3});
  const AcceptanceFunction acceptance(spec, table->counts(), Mode::exact);
  const double row[] = {0.666591, 0.888688, 0.888588, 0.789767, 0.658065,
                        0.614125, 0.467852, 0.389833, 0.311831, 0.242508};
  double worst = 0.0;
  for (std::size_t l = 1; l <= 10; ++l) worst = std::max(worst, std::abs(acceptance.tilted(l) - row[l - 1]));
  const double t6 = acceptance.value(6);
  const double printed_ratio = acceptance.tilted(6) / acceptance.tilted(2);
  const double elapsed = seconds_since(start);
  const bool row_ok = worst <= 1e-5;
  const bool t_ok = std::abs(t6 - 0.691047) <= 1e-5;
  return {row_ok && t_ok && elapsed < 1.0,
          fmt("row max error %.2e; sampler t(6) = %.6f (max at l = %zu, T(0) x^0 = 1); "
              "T(6)x^6 / T(2)x^2 = %.6f; target 0.691047; %.3f s",
              worst, t6, acceptance.argmax(), printed_ratio, elapsed)};
}

Verdict unranking() {
  const CountTable table = build_partition_table(10, 10);
  const auto parts = unrank_partition(table, 10, 10, BigInt(27));
  std::string shown;
  for (auto p : parts) shown += (shown.empty() ? "" : ",") + std::to_string(p);
  return {parts == std::vector<std::size_t>{5, 3, 1, 1}, "rank 27 -> " + shown};
}

struct ExactnessRun {
  std::string label;
  double p_value;
};

Verdict exactness() {
  const auto start = Clock::now();
  const std::size_t samples = 100'000;
  std::vector<ExactnessRun> runs;
  std::uint64_t seed = 1000;
  for (std::size_t n : {5, 6, 8}) {
    const std::vector<std::pair<const char*, StructureSpec>> specs{
        {"partitions", StructureSpec::partitions(n)},
        {"distinct-partitions", StructureSpec::distinct_partitions(n)},
        {"set-partitions", StructureSpec::set_partitions(n)}};
    for (const auto& [name, spec] : specs) {
      const ObjectCensus census = enumerate(spec);
      const bool labeled = spec.cls() == StructureClass::assembly && n <= 6;
      std::vector<SamplerPlan> plans{
          SamplerPlan(spec, Method::hard, std::nullopt, Mode::exact),
          SamplerPlan(spec, Method::dsh, std::nullopt, Mode::exact),
          SamplerPlan(spec, Method::pdc_recursive, IndexPolicy::prefix(ceil_sqrt(n)), Mode::exact),
          SamplerPlan(spec, Method::pdc_recursive, IndexPolicy::window(1.0), Mode::exact)};
      if (spec.cls() == StructureClass::multiset) plans.emplace_back(spec, Method::euler, std::nullopt, Mode::exact);
      for (std::size_t r = 0; r < plans.size(); ++r) {
        const auto records = draw_samples(plans[r], samples, ++seed, 1, labeled);
        ChiSquareResult result;
        if (labeled) {
          std::vector<SetPartition> blocks;
          blocks.reserve(records.size());
          for (const auto& record : records) blocks.push_back(*record.blocks);
          result = chi_square_uniformity(blocks, census);
        } else {
          std::vector<SparseCounts> profiles;
          profiles.reserve(records.size());
          for (const auto& record : records) profiles.push_back(record.counts);
          result = chi_square_uniformity(profiles, census);
        }
        std::string label = std::string(name) + " n=" +
                            std::to_string(n) + " " + std::string(to_string(plans[r].method()));
        if (plans[r].method() == Method::pdc_recursive) label += " I=" + to_string(plans[r].indices());
        runs.push_back({label, result.p_value});
      }
    }
  }
  const double alpha = bonferroni_threshold(runs.size());
  const auto worst = std::min_element(runs.begin(), runs.end(),
                                      [](const auto& a, const auto& b) { return a.p_value < b.p_value; });
  std::size_t failures = 0;
  for (const auto& run : runs) failures += run.p_value > alpha ? 0 : 1;
  const double elapsed = seconds_since(start);
  return {failures == 0 && elapsed < 600.0,
          fmt("%zu tests x %zu samples, threshold p > %.2e, %zu below; smallest p = %.4f (%s); %.1f s", runs.size(),
              samples, alpha, failures, worst->p_value, worst->label.c_str(), elapsed)};
}

Verdict exact_uniformity() {
  std::size_t checked = 0, uniform = 0;
  for (std::size_t n = 1; n <= 6; ++n) {
    for (const Rational& x : {Rational(1, 3), Rational(4, 5)}) {
      const Tilt tilt = Tilt::from_rational(x);
      for (const auto& spec : {StructureSpec::partitions(n, tilt), StructureSpec::distinct_partitions(n, tilt),
                               StructureSpec::set_partitions(n, tilt)}) {
        const ConditionalLaw law = conditional_law(spec);
        bool equal = !law.object_probability.empty();
        for (const auto& p : law.object_probability) equal = equal && p == law.object_probability.front();
        ++checked;
        uniform += equal && law.uniform ? 1 : 0;
      }
    }
  }
  return {uniform == checked, fmt("%zu/%zu (class, n, tilt) laws with identical rational object probabilities",
                                  uniform, checked)};
}

using Reports = std::map<std::string, CostReport>;

const CostReport& cell(const Reports& reports, const std::string& key) { return reports.at(key); }

Verdict hard_scaling(const Reports& reports, double elapsed) {
  bool pass = elapsed < 600.0;
  std::string detail;
  double previous = 0.0;
  for (std::size_t n : {100, 400, 1600}) {
    const CostReport& r = cell(reports, "partitions hard " + std::to_string(n));
    const double ratio = r.mean_attempts / *r.predicted;
    pass = pass && r.samples >= 2000 && std::abs(ratio - 1.0) <= 0.25;
    detail += fmt("n=%zu mean %.1f vs %.1f (%.3f); ", n, r.mean_attempts, *r.predicted, ratio);
    if (previous > 0.0) {
      const double step = r.mean_attempts / previous;
      pass = pass && std::abs(step / std::pow(4.0, 0.75) - 1.0) <= 0.20;
      detail += fmt("step %.3f vs 2.828; ", step);
    }
    previous = r.mean_attempts;
  }
  return {pass, detail + fmt("%.1f s", elapsed)};
}

Verdict dsh_boost(const Reports& reports) {
  const CostReport& dsh = cell(reports, "partitions dsh 400");
  const CostReport& hard = cell(reports, "partitions hard 400");
  const double factor = dsh.mean_attempts / *dsh.predicted;
  const double z = (hard.mean_attempts - dsh.mean_attempts) /
                   std::hypot(hard.stderr_attempts, dsh.stderr_attempts);
  const bool pass = factor >= 0.6 && factor <= 1.7 && z > 1.644854;
  return {pass, fmt("dsh mean %.2f vs %.2f (factor %.3f); hard mean %.1f; one-sided z = %.1f",
                    dsh.mean_attempts, *dsh.predicted, factor, hard.mean_attempts, z)};
}

Verdict flattening(const Reports& reports) {
  std::vector<CostReport> pdc, hard;
  for (std::size_t n : {100, 400, 1600}) {
    pdc.push_back(cell(reports, "partitions pdc-recursive " + std::to_string(n)));
    hard.push_back(cell(reports, "partitions hard " + std::to_string(n)));
  }
  const SlopeFit flat = fit_log_slope(pdc);
  const SlopeFit steep = fit_log_slope(hard);
  const bool contains_zero = flat.lower <= 0.0 && flat.upper >= 0.0;
  const bool pass = flat.one_sided_lower <= 0.0 && std::abs(steep.slope - 0.75) <= 0.13;
  return {pass, fmt("pdc means %.3f %.3f %.3f; slope %.4f, one-sided 95%% lower %.4f, two-sided CI [%.4f, %.4f]%s; "
                    "hard slope %.3f",
                    pdc[0].mean_attempts, pdc[1].mean_attempts, pdc[2].mean_attempts, flat.slope,
                    flat.one_sided_lower, flat.lower, flat.upper, contains_zero ? " contains 0" : " excludes 0",
                    steep.slope)};
}

Verdict distinct_ceiling(const Reports& reports) {
  double largest = 0.0;
  for (std::size_t n : {10, 50, 100, 200, 400, 800, 1600, 3200}) {
    const auto spec = StructureSpec::distinct_partitions(n);
    largest = std::max(largest, boost_factor(spec, {1}, build_distinct_table(n, 1)));
  }
  const CostReport& dsh = cell(reports, "distinct-partitions dsh 400");
  const CostReport& pdc = cell(reports, "distinct-partitions pdc-recursive 400");
  const bool pass = largest <= 2.0 && pdc.mean_attempts <= 0.5 * dsh.mean_attempts;
  return {pass, fmt("largest boost %.4f over n = 10..3200; n=400 pdc %.2f vs dsh %.2f (ratio %.3f)", largest,
                    pdc.mean_attempts, dsh.mean_attempts, pdc.mean_attempts / dsh.mean_attempts)};
}

Verdict recursion_cross_checks() {
  const char* bell[] = {"1", "1", "2", "5", "15", "52", "203", "877", "4140", "21147", "115975", "678570",
                        "4213597", "27644437", "190899322", "1382958545", "10480142147", "82864869804",
                        "682076806159", "5832742205057", "51724158235372"};
  const StructureSpec sets(StructureClass::assembly, 20, Tilt::from_rational(1));
  const CountTable assembly = build_restricted_table(sets, full_index_set(20), 20);
  std::size_t bell_ok = 0;
  for (std::size_t n = 0; n <= 20; ++n) bell_ok += assembly.count(n) == BigInt(bell[n]) ? 1 : 0;

  const auto spec = StructureSpec::partitions(30);
  const CountTable multiset = build_restricted_table(spec, full_index_set(30), 30);
  const auto g = restricted_log_derivative(spec, full_index_set(30), 30);
  std::size_t euler_ok = 0;
  for (std::size_t n = 1; n <= 30; ++n) {
    BigInt sum = 0;
    for (std::size_t m = 0; m < n; ++m) sum += g[n - m] * multiset.count(m);
    const bool sigma_ok = g[n] == BigInt(static_cast<unsigned long>(divisor_sum(n)));
    euler_ok += sigma_ok && sum == BigInt(static_cast<unsigned long>(n)) * multiset.count(n) ? 1 : 0;
  }
  return {bell_ok == 21 && euler_ok == 30,
          fmt("Bell B_0..B_20 %zu/21 equal; n p(n) = sum sigma(n-m) p(m) %zu/30 terms", bell_ok, euler_ok)};
}

Verdict set_partition_tilt(const Reports& reports) {
  std::vector<std::uint64_t> targets;
  for (std::uint64_t n = 1; n <= 2000; ++n) targets.push_back(n);
  for (double v = 2000; v < 1e6; v *= 1.05) targets.push_back(static_cast<std::uint64_t>(v));
  targets.push_back(999'999);
  targets.push_back(1'000'000);
  double worst = 0.0;
  for (auto n : targets) {
    const HighPrec x = to_high_prec(tilt_set_partition(n).exact);
    const HighPrec scaled = abs(x * exp(x) - HighPrec(n)) / HighPrec(n);
    worst = std::max(worst, static_cast<double>(scaled * ldexp(HighPrec(1), 50)));
  }
  const CostReport& hard = cell(reports, "set-partitions hard 200");
  const double ratio = hard.mean_attempts / *hard.predicted;
  const bool pass = worst < 1.0 && std::abs(ratio - 1.0) <= 0.30;
  return {pass, fmt("max |x e^x - n| / (n 2^-50) = %.3g over %zu n <= 1e6; n=200 hard mean %.2f vs %.2f (%.3f)",
                    worst, targets.size(), hard.mean_attempts, *hard.predicted, ratio)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Verdict& verdict) {
    std::printf("[%s] %2d %s: %s\n", verdict.pass ? "PASS" : "FAIL", id, name, verdict.detail.c_str());
    std::fflush(stdout);
    failures += verdict.pass ? 0 : 1;
  };
  auto guarded = [&](int id, const char* name, const std::function<Verdict()>& check) {
    try {
      report(id, name, check());
    } catch (const std::exception& e) {
      report(id, name, {false, std::string("error: ") + e.what()});
    }
  };

  guarded(1, "table reproduction", table_reproduction);
  guarded(2, "worked example", worked_example);
  guarded(3, "unranking walk", unranking);
  guarded(4, "exactness", exactness);
  guarded(5, "exact-rational uniformity", exact_uniformity);

  Reports reports;
  double hard_seconds = 0.0;
  try {
    const std::vector<std::string> grid{
        "partitions hard 100",        "partitions hard 400",
        "partitions hard 1600",       "partitions dsh 400",
        "partitions pdc-recursive 100", "partitions pdc-recursive 400",
        "partitions pdc-recursive 1600", "distinct-partitions dsh 400",
        "distinct-partitions pdc-recursive 400", "set-partitions hard 200"};
    std::vector<BenchCell> cells;
    for (const auto& line : grid) cells.push_back(parse_cell(line));
    BenchOptions options;
    options.samples = 2000;
    options.seed = 2026;
    const auto results = run_benchmark(cells, options);
    for (std::size_t c = 0; c < grid.size(); ++c) {
      reports.emplace(grid[c], results[c]);
      if (c < 3) hard_seconds += (results[c].table_ms + results[c].sample_ms) / 1000.0;
    }
  } catch (const std::exception& e) {
    std::printf("cost grid failed: %s\n", e.what());
  }
  guarded(6, "hard rejection scaling", [&] { return hard_scaling(reports, hard_seconds); });
  guarded(7, "DSH boost on partitions", [&] { return dsh_boost(reports); });
  guarded(8, "PDC-recursive flattening", [&] { return flattening(reports); });
  guarded(9, "distinct-parts DSH ceiling", [&] { return distinct_ceiling(reports); });
  guarded(10, "recursion cross-checks", recursion_cross_checks);
  guarded(11, "set-partition tilt and cost", [&] { return set_partition_tilt(reports); });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
