#pragma once

// Candidate extraction over a directory tree and classification of the
// resulting findings.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "credscan/taxonomy.h"

namespace credscan {

class EmbeddingProvider;
class MlpClassifier;

// Shannon entropy in bits per character over byte frequencies. 0 for "".
double shannon_entropy(std::string_view s);

struct ScanConfig {
  std::string root;
  // fnmatch(3) patterns against the path relative to root ('/' separated).
  // Empty include list means "everything".
  std::vector<std::string> include_globs;
  std::vector<std::string> exclude_globs;
  std::uint64_t max_file_bytes = 1 << 20;
  bool binary_skip = true;
  double entropy_floor_default = 3.5;
  std::size_t min_token_length = 8;
  bool mask_snippets = true;
};

void validate(const ScanConfig& config);

// One candidate line. `record.category` equals `matched_rule`; `is_true` is
// false because nothing is known about ground truth at scan time.
struct Candidate {
  CredentialRecord record;
  CredentialCategory matched_rule = CredentialCategory::kOthers;
  double entropy_bits = 0.0;
  // Tokens that cleared the entropy floor; the masking policy hides them.
  std::vector<std::string> high_entropy_tokens;
  // Tokens carrying a prefix-pattern match such as "AKIA" + 16. Masked too:
  // a fixed-format key can sit under the entropy floor and is still a secret.
  std::vector<std::string> pattern_tokens;
};

struct WalkStats {
  std::size_t files_scanned = 0;
  std::size_t skipped_binary = 0;
  std::size_t skipped_large = 0;
  std::size_t skipped_excluded = 0;
  std::size_t unreadable = 0;
};

struct WalkResult {
  std::vector<Candidate> candidates;
  WalkStats stats;
};

// Splits on whitespace, quotes, backticks and the delimiters =:,;
std::vector<std::string_view> split_value_tokens(std::string_view line);

// Candidate detection for a single line; nullopt when the line is not a
// candidate. Exposed for testing and for callers that stream their own input.
std::optional<Candidate> inspect_line(std::string_view line, const std::vector<RuleSignature>& rules,
                                      const ScanConfig& config);

// Yields candidates in lexicographic path order, ascending line number.
// Throws IoError if root does not exist or is not a readable directory;
// individual unreadable files are counted in stats.unreadable.
WalkResult walk_candidates(const ScanConfig& config, const std::vector<RuleSignature>& rules);

// Replaces all but the first and last two characters of every token in
// `tokens` (where it occurs in `line`) with '*'.
std::string mask_snippet(std::string_view line, const std::vector<std::string>& tokens);

struct ScanFinding {
  std::string source_path;
  std::size_t line_number = 1;
  std::string snippet;
  CredentialCategory matched_rule = CredentialCategory::kOthers;
  double entropy_bits = 0.0;
  std::optional<CredentialCategory> predicted_category;
  std::optional<double> probability;

  friend bool operator==(const ScanFinding&, const ScanFinding&) = default;
};

struct ScanSummary {
  WalkStats walk;
  std::size_t candidates = 0;
  std::size_t classified = 0;
  std::size_t embed_errors = 0;
};

struct ScanReport {
  std::vector<ScanFinding> findings;
  ScanSummary summary;
};

// Walks, then embeds and classifies every candidate in batches of
// `batch_size`. Passing no classifier yields findings without predictions.
// A failed embedding chunk leaves its findings unclassified and is tallied
// in summary.embed_errors. Throws DomainError when the provider and
// classifier dimensions disagree.
ScanReport scan_and_classify(const ScanConfig& config, const std::vector<RuleSignature>& rules,
                             const MlpClassifier* classifier, const EmbeddingProvider* embedder,
                             std::size_t batch_size = 32);

nlohmann::json finding_to_json(const ScanFinding& finding);
ScanFinding finding_from_json(const nlohmann::json& obj);

std::string findings_to_jsonl(const std::vector<ScanFinding>& findings);
std::string findings_to_table(const std::vector<ScanFinding>& findings);

// Exit contract for CI: 0 clean, 1 findings present.
inline int scan_exit_code(const ScanReport& report) { return report.findings.empty() ? 0 : 1; }

// File-type label derived from the extension ("Go", "YAML", ...).
std::string language_tag_for(std::string_view path);

}  // namespace credscan
