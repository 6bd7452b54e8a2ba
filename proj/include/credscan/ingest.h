#pragma once

// Labeled dataset loading (JSONL, CSV) and deterministic splitting.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "credscan/taxonomy.h"

namespace credscan {

struct LabeledDataset {
  std::string name;
  std::vector<CredentialRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  // Records per category id; sums to size().
  std::array<std::size_t, kCategoryCount> category_counts() const;

  // Copy holding only records with is_true set.
  LabeledDataset true_only() const;
};

// One JSON object per line:
//   {"text": str, "category": str|int, "is_true": bool,
//    "source_path"?: str, "line_number"?: int, "language_tag"?: str}
// Blank lines are skipped. Errors name the offending 1-based line.
LabeledDataset load_jsonl(const std::string& path);
void save_jsonl(const LabeledDataset& dataset, const std::string& path);

// Maps record fields to CSV header names. Empty optional columns are skipped.
struct CsvColumnMapping {
  std::string text = "text";
  std::string category = "category";
  std::string is_true = "is_true";
  std::string source_path;
  std::string line_number;
  std::string language_tag;
};

// RFC 4180 style: comma separated, double-quoted fields with "" escapes.
// Booleans parse case-insensitively from true/false/1/0/yes/no/t/f.
LabeledDataset load_csv(const std::string& path, const CsvColumnMapping& mapping = {});

struct SplitSpec {
  double train_fraction = 0.8;
  double valid_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 42;
  bool stratified = true;
};

void validate(const SplitSpec& spec);

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset valid;
  LabeledDataset test;
};

// Partition sizes are floor(n * fraction) for valid and test; the remainder
// goes to train. With `stratified` the per-category counts of every
// partition stay within one record of the proportional target. The shuffle
// is Fisher-Yates over std::mt19937_64 seeded with `spec.seed`.
DatasetSplit split_dataset(const LabeledDataset& dataset, const SplitSpec& spec);

}  // namespace credscan
