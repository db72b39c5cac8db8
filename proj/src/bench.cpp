#include "pdcsample/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <boost/math/constants/constants.hpp>

namespace pdcsample {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string format_double(double value) {
  std::ostringstream out;
  out << std::setprecision(6) << value;
  return out.str();
}

}  // namespace

std::string_view to_string(NamedStructure structure) {
  switch (structure) {
    case NamedStructure::partitions: return "partitions";
    case NamedStructure::distinct_partitions: return "distinct-partitions";
    case NamedStructure::set_partitions: return "set-partitions";
  }
  return "unknown";
}

std::optional<NamedStructure> parse_named_structure(std::string_view name) {
  for (auto s : {NamedStructure::partitions, NamedStructure::distinct_partitions, NamedStructure::set_partitions}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

StructureSpec make_structure(NamedStructure structure, std::size_t n) {
  switch (structure) {
    case NamedStructure::partitions: return StructureSpec::partitions(n);
    case NamedStructure::distinct_partitions: return StructureSpec::distinct_partitions(n);
    case NamedStructure::set_partitions: return StructureSpec::set_partitions(n);
  }
  throw std::invalid_argument("make_structure: unknown structure");
}

std::optional<double> predict_cost(NamedStructure structure, Method method, std::size_t n) {
  const double pi = boost::math::constants::pi<double>();
  const double nd = static_cast<double>(n);
  switch (structure) {
    case NamedStructure::partitions: {
      const double hard = std::pow(96.0 * nd * nd * nd, 0.25);
      if (method == Method::hard) return hard;
      if (method == Method::dsh) return hard * pi / std::sqrt(6.0 * nd);
      return std::nullopt;
    }
    case NamedStructure::distinct_partitions: {
      const double hard = std::pow(192.0 * nd * nd * nd, 0.25);
      if (method == Method::hard) return hard;
      if (method == Method::dsh) return hard / (1.0 + tilt_distinct(n).value);
      return std::nullopt;
    }
    case NamedStructure::set_partitions:
      if (method == Method::hard) return std::sqrt(2.0 * pi * nd * (tilt_set_partition(n).value + 1.0));
      return std::nullopt;
  }
  return std::nullopt;
}

BenchCell parse_cell(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string structure, method, policy;
  long long n = 0;
  if (!(in >> structure >> method >> n) || n < 1) {
    throw std::invalid_argument("grid line must be `structure method n [policy]`: " + std::string(line));
  }
  BenchCell cell;
  const auto parsed_structure = parse_named_structure(structure);
  if (!parsed_structure) throw std::invalid_argument("unknown structure: " + structure);
  const auto parsed_method = parse_method(method);
  if (!parsed_method) throw std::invalid_argument("unknown method: " + method);
  cell.structure = *parsed_structure;
  cell.method = *parsed_method;
  cell.n = static_cast<std::size_t>(n);
  if (in >> policy) cell.policy = IndexPolicy::parse(policy);
  std::string extra;
  if (in >> extra) throw std::invalid_argument("trailing text in grid line: " + std::string(line));
  return cell;
}

std::vector<BenchCell> parse_grid(std::istream& in) {
  std::vector<BenchCell> grid;
  std::string line;
  while (std::getline(in, line)) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    grid.push_back(parse_cell(line));
  }
  return grid;
}

CostReport run_cell(const BenchCell& cell, std::size_t index, const BenchOptions& options) {
  CostReport report;
  report.cell = cell;
  report.predicted = predict_cost(cell.structure, cell.method, cell.n);
  const StructureSpec spec = make_structure(cell.structure, cell.n);

  std::optional<SamplerPlan> plan;
  if (cell.method == Method::pdc_recursive) {
    const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(cell.n))));
    const IndexPolicy policy = cell.policy.value_or(IndexPolicy::prefix(root));
    IndexSet indices = choose_index_set(spec, policy);
    const auto start = Clock::now();
    auto table = build_completion_table(spec, indices);
    report.table_ms = elapsed_ms(start);
    plan.emplace(spec, std::move(indices), std::move(table), options.mode);
    report.policy = policy.to_string();
  } else {
    plan.emplace(spec, cell.method, cell.policy, options.mode);
    report.policy = cell.method == Method::dsh ? IndexPolicy::singleton(plan->indices().front()).to_string() : "-";
  }

  auto sampler = plan->instantiate();
  sampler->set_attempt_cap(options.attempt_cap);
  Rng stage1 = Rng::fork(options.seed, 2 * index);
  Rng second = Rng::fork(options.seed, 2 * index + 1);
  const auto start = Clock::now();
  report.attempts.reserve(options.samples);
  try {
    for (std::size_t s = 0; s < options.samples; ++s) report.attempts.push_back(sampler->sample(stage1, second).attempts);
  } catch (const BudgetExhausted&) {
    report.exhausted = true;
  }
  report.sample_ms = elapsed_ms(start);
  report.stage1_component_draws = sampler->stats().stage1_component_draws.load();

  report.samples = report.attempts.size();
  if (report.samples > 0) {
    double sum = 0.0;
    for (auto a : report.attempts) sum += static_cast<double>(a);
    report.mean_attempts = sum / static_cast<double>(report.samples);
    double squares = 0.0;
    for (auto a : report.attempts) {
      const double d = static_cast<double>(a) - report.mean_attempts;
      squares += d * d;
    }
    if (report.samples > 1) {
      const double variance = squares / static_cast<double>(report.samples - 1);
      report.stderr_attempts = std::sqrt(variance / static_cast<double>(report.samples));
    }
  }
  return report;
}

std::vector<CostReport> run_benchmark(const std::vector<BenchCell>& grid, const BenchOptions& options) {
  std::vector<CostReport> reports(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < grid.size(); c = next++) {
      try {
        reports[c] = run_cell(grid[c], c, options);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, grid.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& thread : pool) thread.join();
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
  return reports;
}

std::string to_csv_row(const CostReport& report) {
  std::ostringstream out;
  out << to_string(report.cell.structure) << ',' << to_string(report.cell.method) << ',' << report.cell.n << ','
      << report.policy << ',' << report.samples << ',' << format_double(report.mean_attempts) << ','
      << format_double(report.stderr_attempts) << ',' << (report.predicted ? format_double(*report.predicted) : "")
      << ',' << format_double(report.table_ms) << ',' << format_double(report.sample_ms);
  return out.str();
}

void write_csv(std::ostream& out, const std::vector<CostReport>& reports) {
  out << kCostCsvHeader << '\n';
  for (const auto& report : reports) out << to_csv_row(report) << '\n';
}

SlopeFit fit_log_slope(const std::vector<CostReport>& reports) {
  if (reports.size() < 2) throw std::invalid_argument("fit_log_slope: need at least two points");
  std::vector<double> xs, ys, ws;
  for (const auto& report : reports) {
    if (report.mean_attempts <= 0.0 || report.stderr_attempts <= 0.0) {
      throw std::invalid_argument("fit_log_slope: point without a positive mean and standard error");
    }
    xs.push_back(std::log(static_cast<double>(report.cell.n)));
    ys.push_back(std::log(report.mean_attempts));
    const double se_log = report.stderr_attempts / report.mean_attempts;
    ws.push_back(1.0 / (se_log * se_log));
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t p = 0; p < xs.size(); ++p) {
    sw += ws[p];
    sx += ws[p] * xs[p];
    sy += ws[p] * ys[p];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t p = 0; p < xs.size(); ++p) {
    sxx += ws[p] * (xs[p] - mx) * (xs[p] - mx);
    sxy += ws[p] * (xs[p] - mx) * (ys[p] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.stderr_slope = std::sqrt(1.0 / sxx);
  fit.lower = fit.slope - 1.959964 * fit.stderr_slope;
  fit.upper = fit.slope + 1.959964 * fit.stderr_slope;
  fit.one_sided_lower = fit.slope - 1.644854 * fit.stderr_slope;
  return fit;
}

}  // namespace pdcsample
