#pragma once

// Timing with uncertainty, aggregation over seeded splits, and the ranked
// comparison against published results of other scanners.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "credscan/metrics.h"

namespace credscan {

// Returns "now" in seconds. Must be monotonic.
using Clock = std::function<double()>;
Clock steady_clock_seconds();

struct TimingStats {
  double mean_seconds = 0.0;
  double std_seconds = 0.0;   // unbiased; 0 when repeats == 1
  double ci95_seconds = 0.0;  // 1.96 * std / sqrt(repeats)
  std::size_t repeats = 0;
  bool single_sample = false;
  std::vector<double> samples;
  // Items processed per measured run, when the caller knows it; gives the
  // per-item reading of a batch timing.
  std::optional<std::size_t> items;

  std::optional<double> per_item_mean_seconds() const;
};

struct TimingOptions {
  std::size_t repeats = 10;
  std::size_t warmup = 1;
  std::optional<std::size_t> items;
};

// Runs `warmup` unmeasured calls, then `repeats` measured ones. An exception
// from the operation is rethrown as Error naming the iteration (warmup
// iterations are numbered first, from 0). Throws DomainError if repeats == 0.
TimingStats time_op(const std::function<void()>& op, const TimingOptions& options = {},
                    const Clock& clock = steady_clock_seconds());

// Mean, unbiased std and ci95 from raw durations.
TimingStats timing_from_samples(std::vector<double> samples);

nlohmann::json timing_to_json(const TimingStats& stats);

using MetricValues = std::map<std::string, double>;

// accuracy, precision, recall, f1 (macro) and mcc; undefined values are left out.
MetricValues metric_values(const MetricReport& report);

struct AggregateEntry {
  double mean = 0.0;
  std::optional<double> std;  // undefined when k == 1
};

struct AggregateStats {
  std::size_t k = 0;
  std::map<std::string, AggregateEntry> metrics;
};

// Throws DomainError on an empty list or when runs disagree on metric names.
AggregateStats aggregate_runs(const std::vector<MetricValues>& runs);

// "0.973 ± 0.012", or just the mean when std is undefined.
std::string format_aggregate(const AggregateEntry& entry, int precision = 3);
nlohmann::json aggregate_to_json(const AggregateStats& stats);
std::string aggregate_to_text(const AggregateStats& stats);

enum class RowSource { kMeasured, kImported };

struct ComparisonRow {
  std::string tool_name;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  RowSource source = RowSource::kImported;
  std::string citation;  // required for imported rows
};

// Throws DomainError for values outside [0, 1] or an imported row without citation.
void validate(const ComparisonRow& row);

ComparisonRow measured_row(const std::string& tool_name, const MetricReport& report);

// Reads {"citation": ..., "tools": [{"tool", "accuracy", "precision", "recall", "f1"}]}.
std::vector<ComparisonRow> load_published_rows(const std::string& path);
std::vector<ComparisonRow> published_rows_from_json(const nlohmann::json& doc);

// Sorted by F1 descending, ties by tool name.
std::vector<ComparisonRow> rank_rows(std::vector<ComparisonRow> rows);

struct ComparisonReport {
  std::vector<ComparisonRow> rows;  // ranked
};

ComparisonReport comparison_report(const ComparisonRow& measured, const std::vector<ComparisonRow>& imported);
std::string comparison_to_text(const ComparisonReport& report);
nlohmann::json comparison_to_json(const ComparisonReport& report);

}  // namespace credscan
