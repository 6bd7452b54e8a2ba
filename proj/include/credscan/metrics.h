#pragma once

// Confusion matrix and the classification metrics derived from it:
// accuracy, per-class precision / recall / F1, macro averages and MCC.
//
// A metric that would be 0/0 is reported as std::nullopt ("undefined"),
// never as NaN or a silent zero.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace credscan {

using MaybeMetric = std::optional<double>;

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t class_count);

  std::size_t class_count() const { return classes_; }
  // counts[actual][predicted]
  std::uint64_t at(std::size_t actual, std::size_t predicted) const { return counts_[actual * classes_ + predicted]; }
  void add(std::size_t actual, std::size_t predicted, std::uint64_t n = 1);
  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(std::size_t actual) const;
  std::uint64_t col_sum(std::size_t predicted) const;

  // One-vs-rest counts for class c.
  std::uint64_t true_positives(std::size_t c) const { return at(c, c); }
  std::uint64_t false_positives(std::size_t c) const { return col_sum(c) - at(c, c); }
  std::uint64_t false_negatives(std::size_t c) const { return row_sum(c) - at(c, c); }
  std::uint64_t true_negatives(std::size_t c) const;

  // Shard reduction; class counts must agree.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
};

// Throws DomainError on a length mismatch or an id >= class_count.
ConfusionMatrix confusion(std::span<const std::size_t> labels, std::span<const std::size_t> predictions,
                          std::size_t class_count);

// trace / total. Throws UndefinedMetricError on an empty matrix.
double accuracy(const ConfusionMatrix& cm);

struct ClassScores {
  MaybeMetric precision;
  MaybeMetric recall;
  MaybeMetric f1;
};

ClassScores precision_recall_f1(const ConfusionMatrix& cm, std::size_t c);

// F1 from precision and recall; undefined if either is, or if P + R = 0.
MaybeMetric f1_score(MaybeMetric precision, MaybeMetric recall);

struct MacroAverage {
  double value = 0.0;
  std::size_t skipped = 0;  // undefined classes left out of the mean
};

// Mean over defined entries. Throws UndefinedMetricError if none is defined.
MacroAverage macro_average(std::span<const MaybeMetric> per_class);

// Binary MCC from the four cells:
//   (TP*TN - FP*FN) / sqrt((TP+FP)(TP+FN)(TN+FP)(TN+FN))
// Undefined when the denominator is zero. Products use 128-bit integers.
MaybeMetric mcc_binary(std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn);

// Multiclass correlation
//   (n*trace - sum_k row_k*col_k) / sqrt((n^2 - sum_k row_k^2)(n^2 - sum_k col_k^2))
// which equals mcc_binary for two classes. Throws UndefinedMetricError on an
// empty matrix; a zero denominator yields nullopt.
MaybeMetric mcc(const ConfusionMatrix& cm);

struct MetricReport {
  std::size_t class_count = 0;
  std::uint64_t samples = 0;
  double accuracy = 0.0;
  std::vector<ClassScores> per_class;
  // Macro means over defined classes; nullopt when no class is defined.
  MaybeMetric macro_precision;
  MaybeMetric macro_recall;
  MaybeMetric macro_f1;
  std::size_t skipped_precision = 0;
  std::size_t skipped_recall = 0;
  std::size_t skipped_f1 = 0;
  // Pooled (micro) averages; for single-label data these equal accuracy.
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  MaybeMetric mcc;
};

// Throws UndefinedMetricError on an empty matrix.
MetricReport build_report(const ConfusionMatrix& cm);

// Class names are used as row labels in the text rendering; pass empty for
// numeric ids.
nlohmann::json report_to_json(const MetricReport& report, const std::vector<std::string>& class_names = {});
std::string report_to_text(const MetricReport& report, const std::vector<std::string>& class_names = {});

}  // namespace credscan
