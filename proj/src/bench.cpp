#include "credscan/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "credscan/error.h"

namespace credscan {
namespace {

double unbiased_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

std::string fixed(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

Clock steady_clock_seconds() {
  return [] {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  };
}

std::optional<double> TimingStats::per_item_mean_seconds() const {
  if (!items || *items == 0) return std::nullopt;
  return mean_seconds / static_cast<double>(*items);
}

TimingStats timing_from_samples(std::vector<double> samples) {
  if (samples.empty()) throw DomainError("timing needs at least one sample");
  TimingStats s;
  s.repeats = samples.size();
  s.mean_seconds = mean_of(samples);
  s.std_seconds = unbiased_std(samples, s.mean_seconds);
  s.ci95_seconds = 1.96 * s.std_seconds / std::sqrt(static_cast<double>(s.repeats));
  s.single_sample = s.repeats == 1;
  s.samples = std::move(samples);
  return s;
}

TimingStats time_op(const std::function<void()>& op, const TimingOptions& options, const Clock& clock) {
  if (options.repeats == 0) throw DomainError("time_op needs repeats >= 1");
  auto run = [&](std::size_t iteration) {
    try {
      op();
    } catch (const std::exception& e) {
      throw Error("timed operation failed at iteration " + std::to_string(iteration) + ": " + e.what());
    }
  };
  std::size_t iteration = 0;
  for (std::size_t w = 0; w < options.warmup; ++w) run(iteration++);
  std::vector<double> samples;
  samples.reserve(options.repeats);
  for (std::size_t r = 0; r < options.repeats; ++r) {
    const double start = clock();
    run(iteration++);
    samples.push_back(std::max(0.0, clock() - start));
  }
  auto stats = timing_from_samples(std::move(samples));
  stats.items = options.items;
  return stats;
}

nlohmann::json timing_to_json(const TimingStats& s) {
  nlohmann::json j = {{"mean_seconds", s.mean_seconds}, {"std_seconds", s.std_seconds},
                      {"ci95_seconds", s.ci95_seconds}, {"repeats", s.repeats},
                      {"single_sample", s.single_sample}, {"samples", s.samples}};
  if (s.items) {
    j["items"] = *s.items;
    const auto per_item = s.per_item_mean_seconds();
    j["per_item_mean_seconds"] = per_item ? nlohmann::json(*per_item) : nlohmann::json(nullptr);
  }
  return j;
}

MetricValues metric_values(const MetricReport& r) {
  MetricValues v{{"accuracy", r.accuracy}};
  if (r.macro_precision) v["precision"] = *r.macro_precision;
  if (r.macro_recall) v["recall"] = *r.macro_recall;
  if (r.macro_f1) v["f1"] = *r.macro_f1;
  if (r.mcc) v["mcc"] = *r.mcc;
  return v;
}

AggregateStats aggregate_runs(const std::vector<MetricValues>& runs) {
  if (runs.empty()) throw DomainError("aggregate_runs needs at least one run");
  for (const auto& run : runs) {
    if (run.size() != runs.front().size() ||
        !std::equal(run.begin(), run.end(), runs.front().begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw DomainError("aggregate_runs: runs report different metric sets");
    }
  }
  AggregateStats out;
  out.k = runs.size();
  for (const auto& [name, unused] : runs.front()) {
    (void)unused;
    std::vector<double> xs;
    xs.reserve(runs.size());
    for (const auto& run : runs) xs.push_back(run.at(name));
    AggregateEntry e;
    e.mean = mean_of(xs);
    if (xs.size() >= 2) e.std = unbiased_std(xs, e.mean);
    out.metrics.emplace(name, e);
  }
  return out;
}

std::string format_aggregate(const AggregateEntry& e, int precision) {
  std::string s = fixed(e.mean, precision);
  if (e.std) s += " ± " + fixed(*e.std, precision);
  return s;
}

nlohmann::json aggregate_to_json(const AggregateStats& stats) {
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [name, e] : stats.metrics) {
    metrics[name] = {{"mean", e.mean}, {"std", e.std ? nlohmann::json(*e.std) : nlohmann::json(nullptr)}};
  }
  return {{"k", stats.k}, {"metrics", std::move(metrics)}};
}

std::string aggregate_to_text(const AggregateStats& stats) {
  std::ostringstream os;
  os << "runs: " << stats.k << '\n';
  for (const auto& [name, e] : stats.metrics) {
    os << std::left << std::setw(12) << name << format_aggregate(e) << '\n';
  }
  return os.str();
}

void validate(const ComparisonRow& row) {
  for (double v : {row.accuracy, row.precision, row.recall, row.f1}) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("comparison row '" + row.tool_name + "' has a value outside [0, 1]");
  }
  if (row.tool_name.empty()) throw DomainError("comparison row without a tool name");
  if (row.source == RowSource::kImported && row.citation.empty()) {
    throw DomainError("imported comparison row '" + row.tool_name + "' has no citation");
  }
}

ComparisonRow measured_row(const std::string& tool_name, const MetricReport& report) {
  ComparisonRow row;
  row.tool_name = tool_name;
  row.accuracy = report.accuracy;
  row.precision = report.macro_precision.value_or(0.0);
  row.recall = report.macro_recall.value_or(0.0);
  row.f1 = report.macro_f1.value_or(0.0);
  row.source = RowSource::kMeasured;
  return row;
}

std::vector<ComparisonRow> published_rows_from_json(const nlohmann::json& doc) {
  try {
    const std::string citation = doc.at("citation").get<std::string>();
    std::vector<ComparisonRow> rows;
    for (const auto& t : doc.at("tools")) {
      ComparisonRow row;
      row.tool_name = t.at("tool").get<std::string>();
      row.accuracy = t.at("accuracy").get<double>();
      row.precision = t.at("precision").get<double>();
      row.recall = t.at("recall").get<double>();
      row.f1 = t.at("f1").get<double>();
      row.citation = t.value("citation", citation);
      validate(row);
      rows.push_back(std::move(row));
    }
    return rows;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("published results: ") + e.what(), 0);
  }
}

std::vector<ComparisonRow> load_published_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
  return published_rows_from_json(doc);
}

std::vector<ComparisonRow> rank_rows(std::vector<ComparisonRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.f1 != b.f1) return a.f1 > b.f1;
    return a.tool_name < b.tool_name;
  });
  return rows;
}

ComparisonReport comparison_report(const ComparisonRow& measured, const std::vector<ComparisonRow>& imported) {
  std::vector<ComparisonRow> rows;
  rows.reserve(imported.size() + 1);
  rows.push_back(measured);
  rows.back().source = RowSource::kMeasured;
  rows.insert(rows.end(), imported.begin(), imported.end());
  return {rank_rows(std::move(rows))};
}

std::string comparison_to_text(const ComparisonReport& report) {
  std::size_t width = 4;
  for (const auto& r : report.rows) width = std::max(width, r.tool_name.size() + 2);
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "Tool" << std::right << std::setw(10) << "Accuracy"
     << std::setw(11) << "Precision" << std::setw(8) << "Recall" << std::setw(8) << "F1" << "  Source\n";
  for (const auto& r : report.rows) {
    const bool measured = r.source == RowSource::kMeasured;
    os << std::left << std::setw(static_cast<int>(width)) << (measured ? "* " + r.tool_name : r.tool_name)
       << std::right << std::setw(10) << fixed(r.accuracy, 3) << std::setw(11) << fixed(r.precision, 3)
       << std::setw(8) << fixed(r.recall, 3) << std::setw(8) << fixed(r.f1, 3) << "  "
       << (measured ? "measured" : "imported") << '\n';
  }
  bool any_imported = false;
  for (const auto& r : report.rows) any_imported |= r.source == RowSource::kImported;
  if (any_imported) {
    os << "\n* measured by this tool. Imported rows are published figures, not re-measured:\n";
    std::vector<std::string> seen;
    for (const auto& r : report.rows) {
      if (r.source == RowSource::kImported && std::find(seen.begin(), seen.end(), r.citation) == seen.end()) {
        seen.push_back(r.citation);
        os << "  " << r.citation << '\n';
      }
    }
  }
  return os.str();
}

nlohmann::json comparison_to_json(const ComparisonReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  std::size_t rank = 1;
  for (const auto& r : report.rows) {
    nlohmann::json j = {{"rank", rank++},
                        {"tool", r.tool_name},
                        {"accuracy", r.accuracy},
                        {"precision", r.precision},
                        {"recall", r.recall},
                        {"f1", r.f1},
                        {"source", r.source == RowSource::kMeasured ? "measured" : "imported"},
                        {"measured", r.source == RowSource::kMeasured}};
    if (r.source == RowSource::kImported) j["citation"] = r.citation;
    rows.push_back(std::move(j));
  }
  return {{"rows", std::move(rows)}};
}

}  // namespace credscan
