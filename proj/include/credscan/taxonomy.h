#pragma once

// Credential categories, rule signatures, and the record type shared by the
// rest of the pipeline.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace credscan {

// Ids are stable and double as classifier output indices.
enum class CredentialCategory : int {
  kPasswords = 0,
  kGenericSecrets = 1,
  kPrivateKeys = 2,
  kGenericTokens = 3,
  kPredefinedPatterns = 4,
  kAuthKeysTokens = 5,
  kSeedsSaltsNonces = 6,
  kOthers = 7,
};

inline constexpr int kCategoryCount = 8;

inline constexpr std::array<CredentialCategory, kCategoryCount> kAllCategories = {
    CredentialCategory::kPasswords,          CredentialCategory::kGenericSecrets,
    CredentialCategory::kPrivateKeys,        CredentialCategory::kGenericTokens,
    CredentialCategory::kPredefinedPatterns, CredentialCategory::kAuthKeysTokens,
    CredentialCategory::kSeedsSaltsNonces,   CredentialCategory::kOthers,
};

constexpr int category_id(CredentialCategory c) { return static_cast<int>(c); }

// Throws DomainError when id is outside [0, 8).
CredentialCategory category_from_id(int id);

// Canonical name, e.g. "Passwords", "SeedsSaltsNonces".
std::string_view category_name(CredentialCategory c);

// Human label used in tables, e.g. "Seeds, Salts, Nonces".
std::string_view category_label(CredentialCategory c);

// Accepts the canonical name or the display label, case-insensitively and
// ignoring spaces, underscores, commas and hyphens ("generic_secrets",
// "Generic Secrets"). Decimal ids "0".."7" are accepted too.
// Throws DomainError on anything else.
CredentialCategory parse_category(std::string_view text);

// Higher value wins when several signatures hit the same line.
int category_precedence(CredentialCategory c);

struct CredentialRecord {
  std::string text;
  CredentialCategory category = CredentialCategory::kOthers;
  bool is_true = true;
  std::string source_path;
  std::size_t line_number = 1;
  std::string language_tag;
};

// Throws DomainError if the record violates its invariants (blank text,
// line_number of 0).
void validate(const CredentialRecord& record);

// A literal that must appear in the line. With `tail_length > 0` the literal
// is a prefix and must be followed by at least that many ASCII alphanumeric
// (or '-', '_') characters, as in "AKIA" + 16.
struct RulePattern {
  std::string literal;
  std::size_t tail_length = 0;
  bool case_sensitive = false;

  // Position of the first match in `line`, if any.
  std::optional<std::size_t> find_in(std::string_view line) const;

  friend bool operator==(const RulePattern&, const RulePattern&) = default;
};

struct RuleSignature {
  CredentialCategory category = CredentialCategory::kOthers;
  std::vector<std::string> keywords;  // lowercase substrings
  std::vector<RulePattern> patterns;
  std::optional<double> entropy_floor;

  // True if any keyword occurs in `lowered_line` or any pattern matches `line`.
  bool matches(std::string_view line, std::string_view lowered_line) const;

  friend bool operator==(const RuleSignature&, const RuleSignature&) = default;
};

// Throws DomainError on an empty or non-lowercase keyword, or an empty
// pattern literal.
void validate(const RuleSignature& signature);

// The built-in rule table: at least one signature per category.
std::vector<RuleSignature> default_rules();

// Highest-precedence category among the signatures matching `line`.
std::optional<CredentialCategory> match_rules(const std::vector<RuleSignature>& rules,
                                              std::string_view line);

// Rule set as a JSON array of {category, keywords[], patterns[], entropy_floor?}.
// Patterns serialize as a plain string when they are case-insensitive
// literals, otherwise as {"literal", "tail_length", "case_sensitive"}.
nlohmann::json rules_to_json(const std::vector<RuleSignature>& rules);
std::vector<RuleSignature> rules_from_json(const nlohmann::json& doc);

std::vector<RuleSignature> load_rules(const std::string& path);
void save_rules(const std::vector<RuleSignature>& rules, const std::string& path);

std::string to_lower_ascii(std::string_view s);

}  // namespace credscan
