#include "pdcsample/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdcsample/bench.hpp"
#include "pdcsample/oracle.hpp"

namespace pdcsample {

namespace {

using json = nlohmann::ordered_json;

bool plain_set_partitions(const StructureSpec& spec) {
  return spec.cls() == StructureClass::assembly && spec.unit_multiplicities() && spec.identity_weights();
}

bool plain_partitions(const StructureSpec& spec, StructureClass cls) {
  return spec.cls() == cls && spec.unit_multiplicities() && spec.identity_weights();
}

std::vector<std::uint64_t> parse_list(const std::string& text, std::size_t n, bool identity_default,
                                      const char* what) {
  if (text.empty()) return {};
  std::vector<std::uint64_t> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out[i] = identity_default ? i : 1;
  std::stringstream in(text);
  std::string item;
  std::size_t i = 1;
  while (std::getline(in, item, ',')) {
    if (i > n) throw std::invalid_argument(std::string(what) + " list is longer than n");
    std::size_t used = 0;
    const unsigned long long value = std::stoull(item, &used);
    if (used != item.size()) throw std::invalid_argument(std::string("bad ") + what + " entry: " + item);
    out[i++] = value;
  }
  return out;
}

IndexSet parse_indices(const std::string& text) {
  IndexSet out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stoull(item));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Mode parse_mode(const std::string& text) {
  if (text == "exact") return Mode::exact;
  if (text == "fast") return Mode::fast;
  throw std::invalid_argument("mode must be exact or fast: " + text);
}

/// --mode, then PDCSAMPLE_MODE, then the command's default.
Mode resolve_mode(const std::string& flag, Mode fallback) {
  if (!flag.empty()) return parse_mode(flag);
  if (const char* env = std::getenv("PDCSAMPLE_MODE"); env != nullptr && *env != '\0') return parse_mode(env);
  return fallback;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

std::string join_parts(const std::vector<std::size_t>& parts, const char* separator) {
  std::string out;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (p > 0) out += separator;
    out += std::to_string(parts[p]);
  }
  return out;
}

std::string blocks_text(const SetPartition& blocks) {
  std::string out;
  for (const auto& block : blocks) out += "{" + join_parts(block, ",") + "}";
  return out;
}

std::string counts_text(const SparseCounts& counts) {
  std::string out;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (c > 0) out += ';';
    out += std::to_string(counts[c].first) + ":" + std::to_string(counts[c].second);
  }
  return out;
}

bool shows_parts(const StructureSpec& spec) {
  return spec.cls() != StructureClass::assembly && spec.unit_multiplicities() && spec.identity_weights();
}

std::string csv_line(const StructureSpec& spec, const SampleRecord& record, std::uint64_t seed) {
  std::string shape;
  if (record.blocks) {
    shape = blocks_text(*record.blocks);
  } else if (shows_parts(spec)) {
    shape = join_parts(counts_to_parts(record.counts), " ");
  }
  return std::to_string(spec.n()) + "," + counts_text(record.counts) + "," + shape + "," +
         std::to_string(record.attempts) + "," + std::to_string(seed);
}

std::string text_line(const StructureSpec& spec, const SampleRecord& record) {
  std::string shape;
  if (record.blocks) {
    shape = blocks_text(*record.blocks);
  } else if (shows_parts(spec)) {
    shape = join_parts(counts_to_parts(record.counts), "+");
  } else {
    shape = counts_text(record.counts);
  }
  return shape + "  (attempts " + std::to_string(record.attempts) + ")";
}

/// Output stream: the named file or `fallback`.
class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file: " + path);
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

struct StructureOptions {
  std::string structure = "partitions";
  std::size_t n = 0;
  std::string tilt;
  std::string multiplicities;
  std::string weights;

  void add_to(CLI::App& command) {
    command.add_option("--structure", structure,
                       "partitions | distinct-partitions | set-partitions | assembly | multiset | selection");
    command.add_option("--n", n, "target weight")->required()->check(CLI::PositiveNumber);
    command.add_option("--tilt", tilt, "tilt x as p/q or a decimal (default: the class optimum)");
    command.add_option("--multiplicities", multiplicities, "m_1,m_2,... for generic classes");
    command.add_option("--weights", weights, "w_1,w_2,... for generic multiset/selection classes");
  }

  StructureSpec build() const { return parse_structure(structure, n, tilt, multiplicities, weights); }
};

struct SampleOptions {
  StructureOptions structure;
  std::string method = "pdc-recursive";
  std::string policy;
  std::size_t count = 1;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string output;
  std::string format = "jsonl";
  std::size_t threads = 1;
  bool ordered = false;
};

struct TableOptions {
  StructureOptions structure;
  std::optional<std::size_t> k;
  std::string indices;
  std::string output;
};

struct BenchOptionsCli {
  std::string grid;
  std::string structure = "partitions";
  std::optional<std::size_t> n;
  std::string method = "hard";
  std::string policy;
  std::size_t samples = 1000;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string output;
  std::size_t threads = 1;
};

struct VerifyOptions {
  StructureOptions structure;
  std::string method;
  std::string policy;
  std::size_t samples = 100000;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string input;
  std::string table_file;
  std::size_t threads = 1;
};

std::optional<IndexPolicy> optional_policy(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return IndexPolicy::parse(text);
}

Method require_method(const std::string& name) {
  const auto method = parse_method(name);
  if (!method) throw std::invalid_argument("unknown method: " + name);
  return *method;
}

int cmd_sample(const SampleOptions& options, std::ostream& out, std::ostream& err) {
  const StructureSpec spec = options.structure.build();
  const Method method = require_method(options.method);
  const Mode mode = resolve_mode(options.mode, Mode::exact);
  const std::uint64_t seed = resolve_seed(options.seed);
  if (options.format != "jsonl" && options.format != "csv" && options.format != "text") {
    throw std::invalid_argument("format must be jsonl, csv or text");
  }
  const SamplerPlan plan(spec, method, optional_policy(options.policy), mode);
  OutputTarget target(options.output, out);
  std::ostream& sink = target.get();
  if (options.format == "csv") sink << "n,counts,shape,attempts,seed\n";
  if (options.format == "text") sink << "# seed " << seed << "\n";

  try {
    run_sampling(plan, options.count, seed, options.threads, options.ordered, plain_set_partitions(spec),
                 [&](std::size_t, std::vector<SampleRecord>& records) {
                   for (const auto& record : records) {
                     if (options.format == "jsonl") {
                       sink << to_jsonl(spec, record, seed) << '\n';
                     } else if (options.format == "csv") {
                       sink << csv_line(spec, record, seed) << '\n';
                     } else {
                       sink << text_line(spec, record) << '\n';
                     }
                   }
                 });
  } catch (const BudgetExhausted& e) {
    err << "error: " << e.what() << " (seed " << seed << ")\n";
    return kExitConfig;
  }
  sink.flush();
  return kExitOk;
}

CountTable table_for(const TableOptions& options) {
  const StructureSpec spec = options.structure.build();
  const std::size_t n = spec.n();
  if (!options.indices.empty() || !plain_partitions(spec, spec.cls())) {
    const IndexSet indices = options.indices.empty() ? full_index_set(n) : parse_indices(options.indices);
    return build_restricted_table(spec, indices, n);
  }
  const std::size_t k = options.k.value_or(n);
  switch (spec.cls()) {
    case StructureClass::multiset: return build_partition_table(n, k);
    case StructureClass::selection: return build_distinct_table(n, k);
    case StructureClass::assembly: return build_bell(n);
  }
  throw std::invalid_argument("unknown structure class");
}

int cmd_table(const TableOptions& options, std::ostream& out) {
  const CountTable table = table_for(options);
  OutputTarget target(options.output, out);
  target.get() << table.dump();
  target.get().flush();
  if (!target.get()) throw std::runtime_error("write failed");
  return kExitOk;
}

int cmd_bench(const BenchOptionsCli& options, std::ostream& out, std::ostream& err) {
  std::vector<BenchCell> grid;
  if (!options.grid.empty()) {
    std::ifstream in(options.grid);
    if (!in) throw std::invalid_argument("cannot open grid file: " + options.grid);
    grid = parse_grid(in);
  } else {
    if (!options.n) throw std::invalid_argument("bench needs --grid or --n");
    std::ostringstream line;
    line << options.structure << ' ' << options.method << ' ' << *options.n << ' ' << options.policy;
    grid.push_back(parse_cell(line.str()));
  }
  BenchOptions run;
  run.samples = options.samples;
  run.seed = resolve_seed(options.seed);
  run.mode = resolve_mode(options.mode, Mode::fast);
  run.threads = options.threads;
  err << "bench seed " << run.seed << "\n";
  const auto reports = run_benchmark(grid, run);
  OutputTarget target(options.output, out);
  write_csv(target.get(), reports);
  for (const auto& report : reports) {
    if (report.exhausted) {
      err << "cell " << to_string(report.cell.structure) << ' ' << to_string(report.cell.method) << ' '
          << report.cell.n << ": attempt budget exhausted after " << report.samples << " samples\n";
    }
  }
  return kExitOk;
}

SparseCounts counts_from_json(const json& object) {
  SparseCounts counts;
  for (const auto& [key, value] : object.items()) {
    counts.emplace_back(static_cast<std::size_t>(std::stoull(key)), value.get<std::uint64_t>());
  }
  std::sort(counts.begin(), counts.end());
  return counts;
}

struct VerifyTally {
  std::size_t exact_failures = 0;
  std::size_t statistical_failures = 0;
};

/// Bounded tables are checked entry by entry against enumeration; 1-D
/// tables column by column against brute-force restricted counts.
bool check_table(const StructureSpec& spec, const CountTable& table, std::ostream& out) {
  const std::size_t n = std::min(table.max_weight(), spec.n());
  bool ok = true;
  if (table.bounded()) {
    const bool distinct = table.kind() == TableKind::distinct_bounded;
    for (std::size_t kappa = 1; kappa <= table.bound(); ++kappa) {
      for (std::size_t j = 0; j <= n; ++j) {
        const BigInt expected = enumerate_partitions(j, kappa, distinct).size();
        if (table.entry(j, kappa) != expected) {
          out << "  entry (" << j << "," << kappa << ") = " << to_string(table.entry(j, kappa)) << ", expected "
              << to_string(expected) << "\n";
          ok = false;
        }
      }
    }
    return ok;
  }
  const IndexSet indices = table.kind() == TableKind::bell ? full_index_set(spec.n()) : table.indices();
  const auto expected = brute_force_counts(spec, indices, n);
  for (std::size_t j = 0; j <= n; ++j) {
    if (table.count(j) != expected[j]) {
      out << "  T(" << j << ") = " << to_string(table.count(j)) << ", expected " << to_string(expected[j]) << "\n";
      ok = false;
    }
  }
  return ok;
}

struct VerifyRun {
  std::string label;
  std::optional<SamplerPlan> plan;
  std::vector<SampleRecord> records;  // --input only
};

int cmd_verify(const VerifyOptions& options, std::ostream& out) {
  const StructureSpec spec = options.structure.build();
  if (spec.n() > kMaxEnumerationWeight) throw std::invalid_argument("verify needs n <= 14 for enumeration");
  const Mode mode = resolve_mode(options.mode, Mode::exact);
  const std::uint64_t seed = resolve_seed(options.seed);
  const ObjectCensus census = enumerate(spec);
  const bool labeled = !census.labeled.empty();
  VerifyTally tally;
  out << "verify " << options.structure.structure << " n=" << spec.n() << " seed=" << seed << " objects="
      << to_string(census.total) << "\n";

  const ConditionalLaw law = conditional_law(spec);
  out << "exact conditional-law-uniform: " << (law.uniform ? "ok" : "MISMATCH") << "\n";
  if (!law.uniform) ++tally.exact_failures;

  std::shared_ptr<const CountTable> file_table;
  if (!options.table_file.empty()) {
    std::ifstream in(options.table_file);
    if (!in) throw std::invalid_argument("cannot open table file: " + options.table_file);
    std::stringstream text;
    text << in.rdbuf();
    file_table = std::make_shared<const CountTable>(CountTable::parse(text.str()));
    const bool ok = check_table(spec, *file_table, out);
    out << "exact table-file " << to_string(file_table->kind()) << ": " << (ok ? "ok" : "MISMATCH") << "\n";
    if (!ok) {
      ++tally.exact_failures;
      file_table.reset();
    }
  }

  std::vector<VerifyRun> runs;
  if (!options.input.empty()) {
    std::ifstream in(options.input);
    if (!in) throw std::invalid_argument("cannot open input file: " + options.input);
    VerifyRun run{"input " + options.input, std::nullopt, {}};
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json sample = json::parse(line);
      SampleRecord record;
      record.counts = counts_from_json(sample.at("counts"));
      record.attempts = sample.value("attempts", std::uint64_t{0});
      if (sample.contains("blocks")) record.blocks = sample.at("blocks").get<SetPartition>();
      run.records.push_back(std::move(record));
    }
    runs.push_back(std::move(run));
  } else {
    std::vector<Method> methods;
    if (!options.method.empty()) {
      methods.push_back(require_method(options.method));
    } else {
      methods = {Method::hard, Method::dsh, Method::pdc_recursive};
      if (plain_partitions(spec, StructureClass::multiset)) methods.push_back(Method::euler);
    }
    for (Method method : methods) {
      if (method == Method::pdc_recursive && file_table) {
        IndexSet indices = file_table->bounded() ? full_index_set(file_table->bound())
                           : file_table->kind() == TableKind::bell ? full_index_set(spec.n())
                                                                   : file_table->indices();
        runs.push_back({"pdc-recursive table-file", SamplerPlan(spec, indices, file_table, mode), {}});
        continue;
      }
      if (method == Method::pdc_recursive && options.policy.empty()) {
        const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(spec.n()))));
        for (const IndexPolicy& policy : {IndexPolicy::prefix(root), IndexPolicy::window(1.0)}) {
          runs.push_back({"pdc-recursive " + policy.to_string(), SamplerPlan(spec, method, policy, mode), {}});
        }
        continue;
      }
      const auto policy = optional_policy(options.policy);
      std::string label(to_string(method));
      if (policy && method != Method::hard && method != Method::euler) label += " " + policy->to_string();
      runs.push_back({label, SamplerPlan(spec, method, method == Method::hard || method == Method::euler
                                                             ? std::nullopt : policy, mode), {}});
    }
  }

  // Each run is tested on profiles, and on labeled objects when available.
  const std::size_t tests = runs.size() * (labeled ? 2 : 1);
  const double alpha = bonferroni_threshold(tests);
  out << "chi-square threshold p > " << alpha << " over " << tests << " tests\n";

  for (std::size_t r = 0; r < runs.size(); ++r) {
    VerifyRun& run = runs[r];
    if (run.plan) {
      try {
        run.records = draw_samples(*run.plan, options.samples, splitmix64(seed + r), options.threads, labeled);
      } catch (const BudgetExhausted& e) {
        out << run.label << ": " << e.what() << "\n";
        ++tally.statistical_failures;
        continue;
      }
    }
    std::vector<SparseCounts> profiles;
    std::vector<SetPartition> objects;
    std::size_t bad = 0;
    for (const auto& record : run.records) {
      if (weighted_sum(spec, record.counts) != spec.n()) {
        ++bad;
        continue;
      }
      profiles.push_back(record.counts);
      if (record.blocks) objects.push_back(*record.blocks);
    }
    try {
      const ChiSquareResult profile_test = chi_square_uniformity(profiles, census);
      const bool pass = profile_test.p_value > alpha;
      out << run.label << " profiles: samples=" << profiles.size() << " chi2=" << std::setprecision(6)
          << profile_test.statistic << " dof=" << profile_test.dof << " p=" << profile_test.p_value
          << (pass ? " ok" : " FAIL") << "\n";
      if (!pass) ++tally.statistical_failures;
      if (labeled && !objects.empty()) {
        const ChiSquareResult object_test = chi_square_uniformity(objects, census);
        const bool object_pass = object_test.p_value > alpha;
        out << run.label << " labeled: chi2=" << object_test.statistic << " dof=" << object_test.dof
            << " p=" << object_test.p_value << (object_pass ? " ok" : " FAIL") << "\n";
        if (!object_pass) ++tally.statistical_failures;
      }
    } catch (const std::logic_error& e) {
      out << run.label << ": " << e.what() << " MISMATCH\n";
      ++tally.exact_failures;
    }
    if (bad > 0) {
      out << run.label << ": " << bad << " samples violate the weight invariant MISMATCH\n";
      ++tally.exact_failures;
    }
  }

  if (tally.exact_failures > 0) return kExitExactMismatch;
  if (tally.statistical_failures > 0) return kExitStatistical;
  out << "all checks passed\n";
  return kExitOk;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string value(text);
  if (value.find('/') != std::string::npos) {
    Rational out;
    if (out.set_str(value, 10) != 0) throw std::invalid_argument("bad rational: " + value);
    if (sgn(out.get_den()) == 0) throw std::invalid_argument("zero denominator: " + value);
    out.canonicalize();
    return out;
  }
  std::size_t used = 0;
  const double parsed = std::stod(value, &used);
  if (used != value.size()) throw std::invalid_argument("bad number: " + value);
  return rational_from_double(parsed);
}

StructureSpec parse_structure(std::string_view name, std::size_t n, const std::string& tilt,
                              const std::string& multiplicities, const std::string& weights) {
  std::optional<Tilt> chosen;
  if (!tilt.empty()) chosen = Tilt::from_rational(parse_rational(tilt));
  if (const auto named = parse_named_structure(name)) {
    if (!multiplicities.empty() || !weights.empty()) {
      throw std::invalid_argument("multiplicities and weights apply to assembly, multiset and selection only");
    }
    StructureSpec spec = make_structure(*named, n);
    return chosen ? spec.with_tilt(*chosen) : spec;
  }
  StructureClass cls;
  Tilt fallback;
  if (name == "assembly") {
    cls = StructureClass::assembly;
    fallback = tilt_set_partition(n);
  } else if (name == "multiset") {
    cls = StructureClass::multiset;
    fallback = tilt_unrestricted(n);
  } else if (name == "selection") {
    cls = StructureClass::selection;
    fallback = tilt_distinct(n);
  } else {
    throw std::invalid_argument("unknown structure: " + std::string(name));
  }
  return StructureSpec(cls, n, chosen.value_or(fallback), parse_list(multiplicities, n, false, "multiplicity"),
                       parse_list(weights, n, true, "weight"));
}

std::string to_jsonl(const StructureSpec& spec, const SampleRecord& record, std::uint64_t seed) {
  json line;
  line["n"] = spec.n();
  json counts = json::object();
  for (const auto& [index, z] : record.counts) counts[std::to_string(index)] = z;
  line["counts"] = std::move(counts);
  if (record.blocks) {
    line["blocks"] = *record.blocks;
  } else if (shows_parts(spec)) {
    line["parts"] = counts_to_parts(record.counts);
  }
  line["attempts"] = record.attempts;
  line["seed"] = seed;
  return line.dump();
}

void run_sampling(const SamplerPlan& plan, std::size_t count, std::uint64_t seed, std::size_t threads,
                  bool ordered, bool realize_blocks,
                  const std::function<void(std::size_t, std::vector<SampleRecord>&)>& on_chunk) {
  const std::size_t chunks = (count + kSampleChunk - 1) / kSampleChunk;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex lock;
  std::map<std::size_t, std::vector<SampleRecord>> pending;
  std::size_t next_emit = 0;

  auto worker = [&] {
    try {
      auto sampler = plan.instantiate();
      auto* pdc = dynamic_cast<PdcRecursiveSampler*>(sampler.get());
      for (std::size_t c = next++; c < chunks && !failed; c = next++) {
        const std::size_t size = std::min(kSampleChunk, count - c * kSampleChunk);
        Rng stage1 = Rng::fork(seed, 2 * c);
        Rng second = Rng::fork(seed, 2 * c + 1);
        std::vector<SampleResult> results;
        if (pdc != nullptr) {
          results = pdc->sample_batch(size, stage1, second);
          pdc->discard_buffer();
        } else {
          results.reserve(size);
          for (std::size_t s = 0; s < size; ++s) results.push_back(sampler->sample(stage1, second));
        }
        std::vector<SampleRecord> records;
        records.reserve(size);
        for (auto& result : results) {
          SampleRecord record{std::move(result.counts), result.attempts, std::nullopt};
          if (realize_blocks) record.blocks = realize_set_partition(record.counts, plan.spec().n(), second);
          records.push_back(std::move(record));
        }
        std::lock_guard guard(lock);
        if (!ordered) {
          on_chunk(c, records);
          continue;
        }
        pending.emplace(c, std::move(records));
        while (!pending.empty() && pending.begin()->first == next_emit) {
          on_chunk(next_emit, pending.begin()->second);
          pending.erase(pending.begin());
          ++next_emit;
        }
      }
    } catch (...) {
      std::lock_guard guard(lock);
      if (!error) error = std::current_exception();
      failed = true;
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, chunks));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& thread : pool) thread.join();
  if (error) std::rethrow_exception(error);
}

std::vector<SampleRecord> draw_samples(const SamplerPlan& plan, std::size_t count, std::uint64_t seed,
                                       std::size_t threads, bool realize_blocks) {
  std::vector<SampleRecord> out(count);
  run_sampling(plan, count, seed, threads, false, realize_blocks,
               [&](std::size_t chunk, std::vector<SampleRecord>& records) {
                 std::move(records.begin(), records.end(), out.begin() + static_cast<std::ptrdiff_t>(chunk * kSampleChunk));
               });
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact uniform sampling of decomposable combinatorial structures", "pdcsample"};
  app.require_subcommand(1);

  SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "draw uniform objects as JSONL, CSV or text");
  sample.structure.add_to(*sample_cmd);
  sample_cmd->add_option("--method", sample.method, "hard | dsh | pdc-recursive | euler");
  sample_cmd->add_option("--policy", sample.policy, "prefix:K | window:ALPHA | singleton:I");
  sample_cmd->add_option("--count", sample.count, "number of objects");
  sample_cmd->add_option("--seed", sample.seed, "root seed (default: random, echoed in the output)");
  sample_cmd->add_option("--mode", sample.mode, "exact | fast (default exact, or $PDCSAMPLE_MODE)");
  sample_cmd->add_option("--output", sample.output, "output file (default stdout)");
  sample_cmd->add_option("--format", sample.format, "jsonl | csv | text");
  sample_cmd->add_option("--threads", sample.threads, "worker threads")->check(CLI::PositiveNumber);
  sample_cmd->add_flag("--ordered", sample.ordered, "emit chunks in draw order");

  TableOptions table;
  auto* table_cmd = app.add_subcommand("table", "dump a count table");
  table.structure.add_to(*table_cmd);
  table_cmd->add_option("--k", table.k, "bound for partition tables (default n)");
  table_cmd->add_option("--indices", table.indices, "comma-separated index set for a restricted table");
  table_cmd->add_option("--output", table.output, "output file (default stdout)");

  BenchOptionsCli bench;
  auto* bench_cmd = app.add_subcommand("bench", "measure mean attempts per sample as CSV");
  bench_cmd->add_option("--grid", bench.grid, "grid file: lines `structure method n [policy]`");
  bench_cmd->add_option("--structure", bench.structure, "single cell: structure");
  bench_cmd->add_option("--n", bench.n, "single cell: n");
  bench_cmd->add_option("--method", bench.method, "single cell: method");
  bench_cmd->add_option("--policy", bench.policy, "single cell: policy");
  bench_cmd->add_option("--samples", bench.samples, "accepted samples per cell");
  bench_cmd->add_option("--seed", bench.seed, "root seed");
  bench_cmd->add_option("--mode", bench.mode, "exact | fast (default fast, or $PDCSAMPLE_MODE)");
  bench_cmd->add_option("--output", bench.output, "CSV file (default stdout)");
  bench_cmd->add_option("--threads", bench.threads, "cells run in parallel")->check(CLI::PositiveNumber);

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "check samplers and tables against enumeration");
  verify.structure.add_to(*verify_cmd);
  verify_cmd->add_option("--method", verify.method, "one method (default: all that apply)");
  verify_cmd->add_option("--policy", verify.policy, "index policy for dsh / pdc-recursive");
  verify_cmd->add_option("--samples", verify.samples, "samples per method");
  verify_cmd->add_option("--seed", verify.seed, "root seed");
  verify_cmd->add_option("--mode", verify.mode, "exact | fast (default exact, or $PDCSAMPLE_MODE)");
  verify_cmd->add_option("--input", verify.input, "JSONL from `sample` to test instead of sampling");
  verify_cmd->add_option("--table-file", verify.table_file, "table dump to check and sample from");
  verify_cmd->add_option("--threads", verify.threads, "worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sample_cmd) return cmd_sample(sample, out, err);
    if (*table_cmd) return cmd_table(table, out);
    if (*bench_cmd) return cmd_bench(bench, out, err);
    if (*verify_cmd) return cmd_verify(verify, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace pdcsample
