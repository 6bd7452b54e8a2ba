#include "credscan/scanner.h"

#include <fnmatch.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "credscan/classifier.h"
#include "credscan/embedder.h"
#include "credscan/error.h"

namespace fs = std::filesystem;

namespace credscan {
namespace {

constexpr std::size_t kBinaryProbeBytes = 8192;

bool is_token_delimiter(char ch) {
  switch (ch) {
    case ' ': case '\t': case '\r': case '\n': case '\v': case '\f':
    case '"': case '\'': case '`':
    case '=': case ':': case ',': case ';':
      return true;
    default:
      return false;
  }
}

bool glob_match(const std::string& pattern, const std::string& path) {
  return ::fnmatch(pattern.c_str(), path.c_str(), 0) == 0;
}

std::string trim_line(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\v\f");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\v\f");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

double shannon_entropy(std::string_view s) {
  if (s.empty()) return 0.0;
  std::array<std::size_t, 256> freq{};
  for (unsigned char ch : s) ++freq[ch];
  const double n = static_cast<double>(s.size());
  double h = 0.0;
  for (std::size_t f : freq) {
    if (f == 0) continue;
    const double p = static_cast<double>(f) / n;
    h -= p * std::log2(p);
  }
  return h < 0.0 ? 0.0 : h;  // -0.0 for single-symbol input
}

void validate(const ScanConfig& config) {
  if (config.max_file_bytes == 0) throw DomainError("max_file_bytes must be positive");
  if (!(config.entropy_floor_default >= 0.0)) throw DomainError("entropy floor must be non-negative");
}

std::vector<std::string_view> split_value_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_token_delimiter(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_token_delimiter(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

std::optional<Candidate> inspect_line(std::string_view line, const std::vector<RuleSignature>& rules,
                                      const ScanConfig& config) {
  std::string text = trim_line(line);
  if (text.empty()) return std::nullopt;

  Candidate cand;
  for (std::string_view token : split_value_tokens(text)) {
    const double h = shannon_entropy(token);
    cand.entropy_bits = std::max(cand.entropy_bits, h);
    if (token.size() >= config.min_token_length && h >= config.entropy_floor_default) {
      cand.high_entropy_tokens.emplace_back(token);
    }
    for (const auto& r : rules) {
      if (std::any_of(r.patterns.begin(), r.patterns.end(),
                      [&](const RulePattern& p) { return p.tail_length > 0 && p.find_in(token); })) {
        cand.pattern_tokens.emplace_back(token);
        break;
      }
    }
  }

  const auto rule = match_rules(rules, text);
  if (rule) {
    cand.matched_rule = *rule;
  } else if (!cand.high_entropy_tokens.empty()) {
    cand.matched_rule = CredentialCategory::kOthers;
  } else {
    return std::nullopt;
  }
  cand.record.text = std::move(text);
  cand.record.category = cand.matched_rule;
  cand.record.is_true = false;
  return cand;
}

std::string mask_snippet(std::string_view line, const std::vector<std::string>& tokens) {
  std::string out(line);
  for (const auto& token : tokens) {
    if (token.size() <= 4) continue;
    for (std::size_t pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos + token.size())) {
      for (std::size_t i = pos + 2; i + 2 < pos + token.size(); ++i) out[i] = '*';
    }
  }
  return out;
}

std::string language_tag_for(std::string_view path) {
  const fs::path p{std::string(path)};
  const std::string ext = to_lower_ascii(p.extension().string());
  const std::string stem = to_lower_ascii(p.filename().string());
  static const std::array<std::pair<std::string_view, std::string_view>, 30> kByExt = {{
      {".go", "Go"},         {".yaml", "YAML"},       {".yml", "YAML"},          {".js", "JavaScript"},
      {".mjs", "JavaScript"}, {".py", "Python"},       {".md", "Markdown"},       {".java", "Java"},
      {".rb", "Ruby"},       {".key", "Key"},         {".pem", "Key"},           {".ts", "TypeScript"},
      {".php", "PHP"},       {".json", "JSON"},       {".txt", "Text"},          {".cfg", "Config"},
      {".conf", "Config"},   {".ini", "Config"},      {".adoc", "AsciiDoc"},     {".sh", "Shell"},
      {".hs", "Haskell"},    {".properties", "Java Properties"}, {".rst", "reStructuredText"},
      {".sql", "SQLPL"},     {".m", "Objective-C"},   {".toml", "TOML"},         {".scala", "Scala"},
      {".xml", "XML"},       {".cpp", "C++"},         {".h", "C++"},
  }};
  if (ext.empty()) return stem.rfind('.', 0) == 0 ? "Config" : "No Extension";
  for (const auto& [e, tag] : kByExt) {
    if (ext == e) return std::string(tag);
  }
  return "Other";
}

WalkResult walk_candidates(const ScanConfig& config, const std::vector<RuleSignature>& rules) {
  validate(config);
  std::error_code ec;
  const fs::path root(config.root);
  if (!fs::is_directory(root, ec)) throw IoError("scan root is not a readable directory: " + config.root);

  std::vector<std::pair<std::string, fs::path>> files;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw IoError("cannot read scan root " + config.root + ": " + ec.message());

  WalkResult result;
  for (const fs::recursive_directory_iterator end; it != end; it.increment(ec)) {
    if (ec) {
      ++result.stats.unreadable;
      ec.clear();
      continue;
    }
    std::error_code type_ec;
    if (!it->is_regular_file(type_ec)) continue;
    files.emplace_back(it->path().lexically_relative(root).generic_string(), it->path());
  }
  std::sort(files.begin(), files.end());

  for (const auto& [rel, full] : files) {
    const bool included = config.include_globs.empty() ||
                          std::any_of(config.include_globs.begin(), config.include_globs.end(),
                                      [&](const std::string& g) { return glob_match(g, rel); });
    const bool excluded = std::any_of(config.exclude_globs.begin(), config.exclude_globs.end(),
                                      [&](const std::string& g) { return glob_match(g, rel); });
    if (!included || excluded) {
      ++result.stats.skipped_excluded;
      continue;
    }
    std::error_code size_ec;
    const auto size = fs::file_size(full, size_ec);
    if (size_ec) {
      ++result.stats.unreadable;
      continue;
    }
    if (size > config.max_file_bytes) {
      ++result.stats.skipped_large;
      continue;
    }
    std::ifstream in(full, std::ios::binary);
    if (!in) {
      ++result.stats.unreadable;
      continue;
    }
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
      ++result.stats.unreadable;
      continue;
    }
    if (config.binary_skip &&
        content.find('\0', 0) < std::min<std::size_t>(content.size(), kBinaryProbeBytes)) {
      ++result.stats.skipped_binary;
      continue;
    }
    ++result.stats.files_scanned;

    const std::string language = language_tag_for(rel);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
      const std::size_t nl = content.find('\n', pos);
      const std::size_t stop = nl == std::string::npos ? content.size() : nl;
      ++line_no;
      if (auto cand = inspect_line(std::string_view(content).substr(pos, stop - pos), rules, config)) {
        cand->record.source_path = rel;
        cand->record.line_number = line_no;
        cand->record.language_tag = language;
        result.candidates.push_back(std::move(*cand));
      }
      pos = stop + 1;
    }
  }
  return result;
}

ScanReport scan_and_classify(const ScanConfig& config, const std::vector<RuleSignature>& rules,
                             const MlpClassifier* classifier, const EmbeddingProvider* embedder,
                             std::size_t batch_size) {
  if (classifier && !embedder) throw DomainError("classification requires an embedding provider");
  if (classifier && embedder->dimension() != classifier->input_dim()) {
    throw DomainError("embedder dimension " + std::to_string(embedder->dimension()) +
                      " does not match classifier input_dim " + std::to_string(classifier->input_dim()));
  }
  if (batch_size == 0) throw DomainError("batch_size must be positive");

  WalkResult walk = walk_candidates(config, rules);
  ScanReport report;
  report.summary.walk = walk.stats;
  report.summary.candidates = walk.candidates.size();
  report.findings.reserve(walk.candidates.size());
  for (const auto& cand : walk.candidates) {
    ScanFinding f;
    f.source_path = cand.record.source_path;
    f.line_number = cand.record.line_number;
    if (config.mask_snippets) {
      auto hidden = cand.high_entropy_tokens;
      hidden.insert(hidden.end(), cand.pattern_tokens.begin(), cand.pattern_tokens.end());
      f.snippet = mask_snippet(cand.record.text, hidden);
    } else {
      f.snippet = cand.record.text;
    }
    f.matched_rule = cand.matched_rule;
    f.entropy_bits = cand.entropy_bits;
    report.findings.push_back(std::move(f));
  }
  if (!classifier) return report;

  std::vector<std::string> texts;
  for (std::size_t start = 0; start < walk.candidates.size(); start += batch_size) {
    const std::size_t end = std::min(walk.candidates.size(), start + batch_size);
    texts.clear();
    for (std::size_t i = start; i < end; ++i) texts.push_back(walk.candidates[i].record.text);
    std::vector<EmbeddingVector> vectors;
    try {
      vectors = embed_batch(texts, *embedder, batch_size);
    } catch (const Error&) {
      report.summary.embed_errors += end - start;
      continue;
    }
    for (std::size_t i = start; i < end; ++i) {
      const auto pred = classifier->predict(vectors[i - start]);
      report.findings[i].predicted_category = pred.category;
      report.findings[i].probability = pred.probabilities[pred.class_id];
      ++report.summary.classified;
    }
  }
  return report;
}

nlohmann::json finding_to_json(const ScanFinding& f) {
  nlohmann::json obj = {{"source_path", f.source_path},
                        {"line_number", f.line_number},
                        {"snippet", f.snippet},
                        {"matched_rule", category_name(f.matched_rule)},
                        {"entropy_bits", f.entropy_bits}};
  if (f.predicted_category && f.probability) {
    obj["predicted_category"] = category_name(*f.predicted_category);
    obj["probability"] = *f.probability;
  }
  return obj;
}

ScanFinding finding_from_json(const nlohmann::json& obj) {
  try {
    ScanFinding f;
    f.source_path = obj.at("source_path").get<std::string>();
    f.line_number = obj.at("line_number").get<std::size_t>();
    f.snippet = obj.at("snippet").get<std::string>();
    f.matched_rule = parse_category(obj.at("matched_rule").get<std::string>());
    f.entropy_bits = obj.at("entropy_bits").get<double>();
    const bool has_cat = obj.contains("predicted_category") && !obj["predicted_category"].is_null();
    const bool has_prob = obj.contains("probability") && !obj["probability"].is_null();
    if (has_cat != has_prob) throw ParseError("predicted_category and probability must appear together", 0);
    if (has_cat) {
      f.predicted_category = parse_category(obj["predicted_category"].get<std::string>());
      f.probability = obj["probability"].get<double>();
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed finding: ") + e.what(), 0);
  }
}

std::string findings_to_jsonl(const std::vector<ScanFinding>& findings) {
  std::string out;
  for (const auto& f : findings) {
    out += finding_to_json(f).dump();
    out += '\n';
  }
  return out;
}

std::string findings_to_table(const std::vector<ScanFinding>& findings) {
  std::ostringstream os;
  std::size_t loc_width = 8;
  std::vector<std::string> locs;
  for (const auto& f : findings) {
    locs.push_back(f.source_path + ":" + std::to_string(f.line_number));
    loc_width = std::max(loc_width, locs.back().size());
  }
  os << std::left << std::setw(static_cast<int>(loc_width)) << "LOCATION" << "  " << std::setw(18) << "RULE"
     << "  " << std::setw(7) << "ENTROPY" << "  " << std::setw(24) << "PREDICTED" << "  SNIPPET\n";
  for (std::size_t i = 0; i < findings.size(); ++i) {
    const auto& f = findings[i];
    std::ostringstream pred;
    if (f.predicted_category) {
      pred << category_name(*f.predicted_category) << " (" << std::fixed << std::setprecision(3) << *f.probability
           << ")";
    } else {
      pred << "-";
    }
    std::ostringstream ent;
    ent << std::fixed << std::setprecision(3) << f.entropy_bits;
    os << std::left << std::setw(static_cast<int>(loc_width)) << locs[i] << "  " << std::setw(18)
       << category_name(f.matched_rule) << "  " << std::setw(7) << ent.str() << "  " << std::setw(24) << pred.str()
       << "  " << f.snippet << '\n';
  }
  return os.str();
}

}  // namespace credscan
