#include "credscan/metrics.h"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "credscan/error.h"

namespace credscan {
namespace {

using i128 = __int128;

MaybeMetric ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

long double sqrt_i128(i128 x) { return std::sqrt(static_cast<long double>(x)); }

nlohmann::json maybe_json(const MaybeMetric& m) { return m ? nlohmann::json(*m) : nlohmann::json(nullptr); }

std::string fmt(const MaybeMetric& m, int precision = 4) {
  if (!m) return "undef";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << *m;
  return os.str();
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t class_count)
    : classes_(class_count), counts_(class_count * class_count, 0) {
  if (class_count == 0) throw DomainError("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(std::size_t actual, std::size_t predicted, std::uint64_t n) {
  if (actual >= classes_ || predicted >= classes_) throw DomainError("class id out of range for confusion matrix");
  counts_[actual * classes_ + predicted] += n;
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < classes_; ++c) t += at(c, c);
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t actual) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < classes_; ++p) s += at(actual, p);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t a = 0; a < classes_; ++a) s += at(a, predicted);
  return s;
}

std::uint64_t ConfusionMatrix::true_negatives(std::size_t c) const {
  return total() - true_positives(c) - false_positives(c) - false_negatives(c);
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw DomainError("cannot add confusion matrices of different class counts");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix confusion(std::span<const std::size_t> labels, std::span<const std::size_t> predictions,
                          std::size_t class_count) {
  if (labels.size() != predictions.size()) throw DomainError("labels and predictions differ in length");
  ConfusionMatrix cm(class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) cm.add(labels[i], predictions[i]);
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  if (n == 0) throw UndefinedMetricError("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(n);
}

MaybeMetric f1_score(MaybeMetric precision, MaybeMetric recall) {
  if (!precision || !recall) return std::nullopt;
  const double sum = *precision + *recall;
  if (sum == 0.0) return std::nullopt;
  return 2.0 * *precision * *recall / sum;
}

ClassScores precision_recall_f1(const ConfusionMatrix& cm, std::size_t c) {
  if (c >= cm.class_count()) throw DomainError("class id out of range");
  const auto tp = cm.true_positives(c);
  ClassScores s;
  s.precision = ratio(tp, tp + cm.false_positives(c));
  s.recall = ratio(tp, tp + cm.false_negatives(c));
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

MacroAverage macro_average(std::span<const MaybeMetric> per_class) {
  MacroAverage out;
  double sum = 0.0;
  std::size_t defined = 0;
  for (const auto& v : per_class) {
    if (v) {
      sum += *v;
      ++defined;
    } else {
      ++out.skipped;
    }
  }
  if (defined == 0) throw UndefinedMetricError("macro average over no defined values");
  out.value = sum / static_cast<double>(defined);
  return out;
}

MaybeMetric mcc_binary(std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn) {
  const i128 num = static_cast<i128>(tp) * tn - static_cast<i128>(fp) * fn;
  const i128 a = static_cast<i128>(tp) + fp;
  const i128 b = static_cast<i128>(tp) + fn;
  const i128 c = static_cast<i128>(tn) + fp;
  const i128 d = static_cast<i128>(tn) + fn;
  if (a == 0 || b == 0 || c == 0 || d == 0) return std::nullopt;
  const long double den = sqrt_i128(a * b) * sqrt_i128(c * d);
  return static_cast<double>(static_cast<long double>(num) / den);
}

MaybeMetric mcc(const ConfusionMatrix& cm) {
  const i128 n = cm.total();
  if (n == 0) throw UndefinedMetricError("MCC of an empty confusion matrix");
  i128 row_col = 0, row_sq = 0, col_sq = 0;
  for (std::size_t k = 0; k < cm.class_count(); ++k) {
    const i128 r = cm.row_sum(k);
    const i128 c = cm.col_sum(k);
    row_col += r * c;
    row_sq += r * r;
    col_sq += c * c;
  }
  const i128 num = n * static_cast<i128>(cm.trace()) - row_col;
  const i128 den_actual = n * n - row_sq;
  const i128 den_predicted = n * n - col_sq;
  if (den_actual == 0 || den_predicted == 0) return std::nullopt;
  const long double den = sqrt_i128(den_actual) * sqrt_i128(den_predicted);
  return static_cast<double>(static_cast<long double>(num) / den);
}

MetricReport build_report(const ConfusionMatrix& cm) {
  MetricReport r;
  r.class_count = cm.class_count();
  r.samples = cm.total();
  r.accuracy = accuracy(cm);

  std::vector<MaybeMetric> p, rc, f;
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t c = 0; c < cm.class_count(); ++c) {
    const auto s = precision_recall_f1(cm, c);
    r.per_class.push_back(s);
    p.push_back(s.precision);
    rc.push_back(s.recall);
    f.push_back(s.f1);
    tp += cm.true_positives(c);
    fp += cm.false_positives(c);
    fn += cm.false_negatives(c);
  }
  auto macro = [](const std::vector<MaybeMetric>& v, MaybeMetric& value, std::size_t& skipped) {
    try {
      const auto m = macro_average(v);
      value = m.value;
      skipped = m.skipped;
    } catch (const UndefinedMetricError&) {
      value.reset();
      skipped = v.size();
    }
  };
  macro(p, r.macro_precision, r.skipped_precision);
  macro(rc, r.macro_recall, r.skipped_recall);
  macro(f, r.macro_f1, r.skipped_f1);

  r.micro_precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.micro_recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.micro_f1 = f1_score(r.micro_precision, r.micro_recall).value_or(0.0);
  r.mcc = mcc(cm);
  return r;
}

nlohmann::json report_to_json(const MetricReport& r, const std::vector<std::string>& class_names) {
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    nlohmann::json e = {{"class_id", c},
                        {"precision", maybe_json(r.per_class[c].precision)},
                        {"recall", maybe_json(r.per_class[c].recall)},
                        {"f1", maybe_json(r.per_class[c].f1)}};
    if (c < class_names.size()) e["class_name"] = class_names[c];
    per_class.push_back(std::move(e));
  }
  return {{"class_count", r.class_count},
          {"samples", r.samples},
          {"accuracy", r.accuracy},
          {"macro_precision", maybe_json(r.macro_precision)},
          {"macro_recall", maybe_json(r.macro_recall)},
          {"macro_f1", maybe_json(r.macro_f1)},
          {"skipped", {{"precision", r.skipped_precision}, {"recall", r.skipped_recall}, {"f1", r.skipped_f1}}},
          {"micro_precision", r.micro_precision},
          {"micro_recall", r.micro_recall},
          {"micro_f1", r.micro_f1},
          {"mcc", maybe_json(r.mcc)},
          {"per_class", std::move(per_class)}};
}

std::string report_to_text(const MetricReport& r, const std::vector<std::string>& class_names) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "Metric" << std::right << std::setw(10) << "Macro" << std::setw(10) << "Micro"
     << '\n';
  auto row = [&](const char* name, const MaybeMetric& macro, const MaybeMetric& micro) {
    os << std::left << std::setw(12) << name << std::right << std::setw(10) << fmt(macro) << std::setw(10)
       << fmt(micro) << '\n';
  };
  row("Accuracy", r.accuracy, r.accuracy);
  row("F1", r.macro_f1, r.micro_f1);
  row("Precision", r.macro_precision, r.micro_precision);
  row("Recall", r.macro_recall, r.micro_recall);
  row("MCC", r.mcc, r.mcc);
  os << "samples: " << r.samples;
  if (r.skipped_f1 > 0) os << "  (undefined classes skipped in macro F1: " << r.skipped_f1 << ")";
  os << "\n\n";

  std::size_t name_width = 8;
  for (const auto& n : class_names) name_width = std::max(name_width, n.size());
  os << std::left << std::setw(static_cast<int>(name_width)) << "Class" << std::right << std::setw(11) << "Precision"
     << std::setw(10) << "Recall" << std::setw(10) << "F1" << '\n';
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    const std::string name = c < class_names.size() ? class_names[c] : std::to_string(c);
    os << std::left << std::setw(static_cast<int>(name_width)) << name << std::right << std::setw(11)
       << fmt(r.per_class[c].precision) << std::setw(10) << fmt(r.per_class[c].recall) << std::setw(10)
       << fmt(r.per_class[c].f1) << '\n';
  }
  return os.str();
}

}  // namespace credscan
