#include "credscan/ingest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "credscan/error.h"
#include "credscan/random.h"

namespace credscan {
namespace {

// Guards floor() against products such as 0.57 * 100 = 56.999999999999993.
constexpr double kFloorSlack = 1e-9;

std::size_t floor_count(double x) {
  return static_cast<std::size_t>(std::floor(x + kFloorSlack));
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

bool parse_bool(std::string_view raw, std::size_t line) {
  const std::string v = to_lower_ascii(trim(raw));
  if (v == "true" || v == "1" || v == "yes" || v == "t" || v == "y") return true;
  if (v == "false" || v == "0" || v == "no" || v == "f" || v == "n") return false;
  throw ParseError("cannot parse boolean '" + std::string(raw) + "'", line);
}

CredentialRecord record_from_json(const nlohmann::json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError("expected a JSON object", line);
  CredentialRecord rec;
  if (!obj.contains("text") || !obj["text"].is_string()) {
    throw ParseError("missing string field 'text'", line);
  }
  rec.text = trim(obj["text"].get<std::string>());

  if (!obj.contains("category")) throw ParseError("missing field 'category'", line);
  const auto& cat = obj["category"];
  if (cat.is_number_integer()) {
    rec.category = category_from_id(cat.get<int>());
  } else if (cat.is_string()) {
    rec.category = parse_category(cat.get<std::string>());
  } else {
    throw ParseError("field 'category' must be a string or an integer id", line);
  }

  if (!obj.contains("is_true")) throw ParseError("missing field 'is_true'", line);
  const auto& flag = obj["is_true"];
  if (flag.is_boolean()) {
    rec.is_true = flag.get<bool>();
  } else if (flag.is_string()) {
    rec.is_true = parse_bool(flag.get<std::string>(), line);
  } else {
    throw ParseError("field 'is_true' must be a boolean", line);
  }

  if (obj.contains("source_path")) rec.source_path = obj["source_path"].get<std::string>();
  if (obj.contains("line_number")) {
    const auto& ln = obj["line_number"];
    if (!ln.is_number_integer() || ln.get<long long>() < 1) {
      throw ParseError("field 'line_number' must be a positive integer", line);
    }
    rec.line_number = ln.get<std::size_t>();
  }
  if (obj.contains("language_tag")) rec.language_tag = obj["language_tag"].get<std::string>();
  if (rec.text.empty()) throw ParseError("field 'text' is empty", line);
  return rec;
}

std::vector<std::string> split_csv_row(std::istream& in, std::size_t& line_no, bool& ok) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  ok = false;
  std::string line;
  if (!std::getline(in, line)) return fields;
  ++line_no;
  ok = true;
  for (;;) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (in_quotes) {
        if (ch == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          field.push_back(ch);
        }
      } else if (ch == '"') {
        in_quotes = true;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (ch != '\r') {
        field.push_back(ch);
      }
    }
    if (!in_quotes) break;
    // Quoted field spans a newline.
    field.push_back('\n');
    if (!std::getline(in, line)) throw ParseError("unterminated quoted field", line_no);
    ++line_no;
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

std::array<std::size_t, kCategoryCount> LabeledDataset::category_counts() const {
  std::array<std::size_t, kCategoryCount> counts{};
  for (const auto& r : records) ++counts[static_cast<std::size_t>(category_id(r.category))];
  return counts;
}

LabeledDataset LabeledDataset::true_only() const {
  LabeledDataset out{name, {}};
  std::copy_if(records.begin(), records.end(), std::back_inserter(out.records),
               [](const CredentialRecord& r) { return r.is_true; });
  return out;
}

LabeledDataset load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  LabeledDataset ds;
  ds.name = path;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    try {
      ds.records.push_back(record_from_json(obj, line_no));
    } catch (const nlohmann::json::type_error& e) {
      throw ParseError(std::string("wrong field type: ") + e.what(), line_no);
    }
  }
  return ds;
}

void save_jsonl(const LabeledDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset: " + path);
  for (const auto& r : dataset.records) {
    nlohmann::json obj = {{"text", r.text},
                          {"category", category_name(r.category)},
                          {"is_true", r.is_true},
                          {"source_path", r.source_path},
                          {"line_number", r.line_number},
                          {"language_tag", r.language_tag}};
    out << obj.dump() << '\n';
  }
}

LabeledDataset load_csv(const std::string& path, const CsvColumnMapping& mapping) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  std::size_t line_no = 0;
  bool ok = false;
  const auto header = split_csv_row(in, line_no, ok);
  if (!ok) throw ParseError("missing CSV header row", 1);

  auto column = [&](const std::string& name, bool required) -> std::ptrdiff_t {
    if (name.empty()) {
      if (required) throw ParseError("required column mapping is empty", 1);
      return -1;
    }
    const auto it = std::find_if(header.begin(), header.end(),
                                 [&](const std::string& h) { return trim(h) == name; });
    if (it == header.end()) throw ParseError("CSV header lacks mapped column '" + name + "'", 1);
    return it - header.begin();
  };
  const auto text_col = column(mapping.text, true);
  const auto cat_col = column(mapping.category, true);
  const auto true_col = column(mapping.is_true, true);
  const auto path_col = column(mapping.source_path, false);
  const auto line_col = column(mapping.line_number, false);
  const auto lang_col = column(mapping.language_tag, false);

  LabeledDataset ds;
  ds.name = path;
  for (;;) {
    const auto fields = split_csv_row(in, line_no, ok);
    if (!ok) break;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    auto at = [&](std::ptrdiff_t col) { return fields[static_cast<std::size_t>(col)]; };
    CredentialRecord rec;
    rec.text = trim(at(text_col));
    if (rec.text.empty()) throw ParseError("field 'text' is empty", line_no);
    rec.category = parse_category(trim(at(cat_col)));
    rec.is_true = parse_bool(at(true_col), line_no);
    if (path_col >= 0) rec.source_path = at(path_col);
    if (line_col >= 0 && !trim(at(line_col)).empty()) {
      try {
        const long long v = std::stoll(trim(at(line_col)));
        if (v < 1) throw ParseError("line_number must be positive", line_no);
        rec.line_number = static_cast<std::size_t>(v);
      } catch (const std::logic_error&) {
        throw ParseError("line_number is not an integer", line_no);
      }
    }
    if (lang_col >= 0) rec.language_tag = at(lang_col);
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

void validate(const SplitSpec& spec) {
  for (double f : {spec.train_fraction, spec.valid_fraction, spec.test_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) throw DomainError("split fractions must lie in [0, 1]");
  }
  const double sum = spec.train_fraction + spec.valid_fraction + spec.test_fraction;
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("split fractions must sum to 1");
}

namespace {

struct Quota {
  std::size_t valid = 0;
  std::size_t test = 0;
};

// Per-category valid/test quotas that hit the global totals exactly while
// keeping each quota at the floor or ceiling of its proportional target.
// Categories whose train share would otherwise drift by more than one record
// are bumped first.
std::array<Quota, kCategoryCount> stratified_quotas(const std::array<std::size_t, kCategoryCount>& counts,
                                                    std::size_t total_valid, std::size_t total_test,
                                                    const SplitSpec& spec) {
  std::array<Quota, kCategoryCount> quota{};
  std::array<double, kCategoryCount> frac_v{}, frac_t{};
  std::size_t sum_v = 0, sum_t = 0;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    const double tv = static_cast<double>(counts[c]) * spec.valid_fraction;
    const double tt = static_cast<double>(counts[c]) * spec.test_fraction;
    quota[c] = {floor_count(tv), floor_count(tt)};
    frac_v[c] = std::max(0.0, tv - static_cast<double>(quota[c].valid));
    frac_t[c] = std::max(0.0, tt - static_cast<double>(quota[c].test));
    if (frac_v[c] < kFloorSlack) frac_v[c] = 0.0;
    if (frac_t[c] < kFloorSlack) frac_t[c] = 0.0;
    sum_v += quota[c].valid;
    sum_t += quota[c].test;
  }
  std::size_t budget_v = total_valid > sum_v ? total_valid - sum_v : 0;
  std::size_t budget_t = total_test > sum_t ? total_test - sum_t : 0;

  std::array<bool, kCategoryCount> bumped_v{}, bumped_t{};
  auto room = [&](std::size_t c) { return quota[c].valid + quota[c].test < counts[c]; };
  auto bump = [&](std::size_t c, bool valid) {
    if (valid) {
      ++quota[c].valid;
      bumped_v[c] = true;
      --budget_v;
    } else {
      ++quota[c].test;
      bumped_t[c] = true;
      --budget_t;
    }
  };

  std::array<std::size_t, kCategoryCount> order{};
  std::iota(order.begin(), order.end(), 0);

  // Pass 1: categories with frac_v + frac_t > 1 need at least one bump.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac_v[a] + frac_t[a] > frac_v[b] + frac_t[b]; });
  for (std::size_t c : order) {
    if (frac_v[c] + frac_t[c] <= 1.0 || !room(c)) continue;
    const bool prefer_valid = frac_v[c] >= frac_t[c];
    if (prefer_valid && budget_v > 0) {
      bump(c, true);
    } else if (budget_t > 0) {
      bump(c, false);
    } else if (budget_v > 0) {
      bump(c, true);
    }
  }

  auto fill = [&](bool valid, bool strict) {
    auto& budget = valid ? budget_v : budget_t;
    const auto& frac = valid ? frac_v : frac_t;
    const auto& mine = valid ? bumped_v : bumped_t;
    const auto& other = valid ? bumped_t : bumped_v;
    std::array<std::size_t, kCategoryCount> ord{};
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t c : ord) {
      if (budget == 0) return;
      if (mine[c] || !room(c)) continue;
      if (strict && (frac[c] == 0.0 || (other[c] && frac_v[c] + frac_t[c] < 1.0))) continue;
      bump(c, valid);
    }
  };
  fill(true, true);
  fill(false, true);
  fill(true, false);
  fill(false, false);
  return quota;
}

}  // namespace

DatasetSplit split_dataset(const LabeledDataset& dataset, const SplitSpec& spec) {
  validate(spec);
  if (dataset.empty()) throw DomainError("cannot split an empty dataset");
  const std::size_t n = dataset.size();
  const std::size_t total_valid = floor_count(static_cast<double>(n) * spec.valid_fraction);
  const std::size_t total_test = std::min(n - total_valid, floor_count(static_cast<double>(n) * spec.test_fraction));

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(spec.seed);
  shuffle_in_place(std::span<std::size_t>(perm), rng);

  DatasetSplit out;
  out.train.name = dataset.name + ":train";
  out.valid.name = dataset.name + ":valid";
  out.test.name = dataset.name + ":test";

  if (spec.stratified) {
    auto quota = stratified_quotas(dataset.category_counts(), total_valid, total_test, spec);
    for (std::size_t idx : perm) {
      const auto& rec = dataset.records[idx];
      auto& q = quota[static_cast<std::size_t>(category_id(rec.category))];
      if (q.valid > 0) {
        --q.valid;
        out.valid.records.push_back(rec);
      } else if (q.test > 0) {
        --q.test;
        out.test.records.push_back(rec);
      } else {
        out.train.records.push_back(rec);
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& rec = dataset.records[perm[i]];
      if (i < total_valid) {
        out.valid.records.push_back(rec);
      } else if (i < total_valid + total_test) {
        out.test.records.push_back(rec);
      } else {
        out.train.records.push_back(rec);
      }
    }
  }
  return out;
}

}  // namespace credscan
