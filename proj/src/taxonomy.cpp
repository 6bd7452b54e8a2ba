#include "credscan/taxonomy.h"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "credscan/error.h"

namespace credscan {
namespace {

struct CategoryInfo {
  std::string_view name;
  std::string_view label;
  int precedence;
};

// Indexed by id. Precedence: most specific format first.
constexpr std::array<CategoryInfo, kCategoryCount> kCategoryInfo = {{
    {"Passwords", "Passwords", 2},
    {"GenericSecrets", "Generic Secrets", 3},
    {"PrivateKeys", "Private Keys", 8},
    {"GenericTokens", "Generic Tokens", 4},
    {"PredefinedPatterns", "Predefined Patterns", 7},
    {"AuthKeysTokens", "Authentication Keys and Tokens", 5},
    {"SeedsSaltsNonces", "Seeds, Salts, Nonces", 6},
    {"Others", "Others", 1},
}};

std::string fold_name(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == ' ' || ch == '_' || ch == ',' || ch == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

bool is_tail_char(char ch) {
  return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_';
}

}  // namespace

CredentialCategory category_from_id(int id) {
  if (id < 0 || id >= kCategoryCount) {
    throw DomainError("category id out of range: " + std::to_string(id));
  }
  return static_cast<CredentialCategory>(id);
}

std::string_view category_name(CredentialCategory c) {
  return kCategoryInfo[static_cast<std::size_t>(category_id(c))].name;
}

std::string_view category_label(CredentialCategory c) {
  return kCategoryInfo[static_cast<std::size_t>(category_id(c))].label;
}

int category_precedence(CredentialCategory c) {
  return kCategoryInfo[static_cast<std::size_t>(category_id(c))].precedence;
}

CredentialCategory parse_category(std::string_view text) {
  if (text.size() == 1 && text[0] >= '0' && text[0] <= '7') {
    return category_from_id(text[0] - '0');
  }
  const std::string key = fold_name(text);
  for (CredentialCategory c : kAllCategories) {
    if (key == fold_name(category_name(c)) || key == fold_name(category_label(c))) {
      return c;
    }
  }
  throw DomainError("unknown credential category: '" + std::string(text) + "'");
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& ch : out) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  return out;
}

void validate(const CredentialRecord& record) {
  const bool blank = std::all_of(record.text.begin(), record.text.end(), [](char ch) {
    return std::isspace(static_cast<unsigned char>(ch));
  });
  if (blank) throw DomainError("credential record has empty text");
  if (record.line_number < 1) throw DomainError("credential record line_number must be >= 1");
}

std::optional<std::size_t> RulePattern::find_in(std::string_view line) const {
  if (literal.empty()) return std::nullopt;
  std::string lowered_line;
  std::string lowered_literal;
  std::string_view hay = line;
  std::string_view needle = literal;
  if (!case_sensitive) {
    lowered_line = to_lower_ascii(line);
    lowered_literal = to_lower_ascii(literal);
    hay = lowered_line;
    needle = lowered_literal;
  }
  for (std::size_t pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + 1)) {
    std::size_t tail = 0;
    std::size_t i = pos + needle.size();
    while (tail < tail_length && i < line.size() && is_tail_char(line[i])) {
      ++tail;
      ++i;
    }
    if (tail >= tail_length) return pos;
  }
  return std::nullopt;
}

bool RuleSignature::matches(std::string_view line, std::string_view lowered_line) const {
  for (const auto& keyword : keywords) {
    if (lowered_line.find(keyword) != std::string_view::npos) return true;
  }
  for (const auto& pattern : patterns) {
    if (pattern.find_in(line)) return true;
  }
  return false;
}

void validate(const RuleSignature& signature) {
  for (const auto& keyword : signature.keywords) {
    if (keyword.empty()) throw DomainError("rule keyword must be non-empty");
    if (keyword != to_lower_ascii(keyword)) {
      throw DomainError("rule keyword must be lowercase: '" + keyword + "'");
    }
  }
  for (const auto& pattern : signature.patterns) {
    if (pattern.literal.empty()) throw DomainError("rule pattern literal must be non-empty");
  }
  if (signature.keywords.empty() && signature.patterns.empty()) {
    throw DomainError("rule signature for " + std::string(category_name(signature.category)) +
                      " has neither keywords nor patterns");
  }
  if (signature.entropy_floor && (*signature.entropy_floor < 0.0 || *signature.entropy_floor > 8.0)) {
    throw DomainError("rule entropy_floor must lie in [0, 8]");
  }
}

std::vector<RuleSignature> default_rules() {
  using C = CredentialCategory;
  std::vector<RuleSignature> rules;

  rules.push_back({C::kPasswords, {"password", "passwd", "passphrase", "pwd"}, {}, 3.5});
  rules.push_back({C::kGenericSecrets, {"secret"}, {}, std::nullopt});

  RuleSignature keys{C::kPrivateKeys, {"private_key", "privatekey"}, {}, std::nullopt};
  for (const char* armor : {"BEGIN RSA PRIVATE KEY", "BEGIN DSA PRIVATE KEY", "BEGIN EC PRIVATE KEY",
                            "BEGIN OPENSSH PRIVATE KEY", "BEGIN PGP PRIVATE KEY",
                            "BEGIN ENCRYPTED PRIVATE KEY", "BEGIN PRIVATE KEY"}) {
    keys.patterns.push_back({armor, 0, false});
  }
  rules.push_back(std::move(keys));

  rules.push_back({C::kGenericTokens, {"token"}, {}, std::nullopt});

  rules.push_back({C::kPredefinedPatterns,
                   {"accesskeyid", "access_key_id", "aws_access_key"},
                   {{"AKIA", 16, false}, {"AIza", 35, false}, {"eyJ", 10, false}},
                   std::nullopt});

  rules.push_back({C::kAuthKeysTokens, {"auth"}, {}, std::nullopt});
  rules.push_back({C::kSeedsSaltsNonces, {"seed", "salt", "nonce"}, {}, std::nullopt});
  rules.push_back({C::kOthers, {"credential", "login"}, {}, std::nullopt});
  return rules;
}

std::optional<CredentialCategory> match_rules(const std::vector<RuleSignature>& rules,
                                              std::string_view line) {
  const std::string lowered = to_lower_ascii(line);
  std::optional<CredentialCategory> best;
  for (const auto& rule : rules) {
    if (best && category_precedence(rule.category) <= category_precedence(*best)) continue;
    if (rule.matches(line, lowered)) best = rule.category;
  }
  return best;
}

nlohmann::json rules_to_json(const std::vector<RuleSignature>& rules) {
  auto doc = nlohmann::json::array();
  for (const auto& rule : rules) {
    nlohmann::json entry;
    entry["category"] = category_name(rule.category);
    entry["keywords"] = rule.keywords;
    auto patterns = nlohmann::json::array();
    for (const auto& p : rule.patterns) {
      if (p.tail_length == 0 && !p.case_sensitive) {
        patterns.push_back(p.literal);
      } else {
        patterns.push_back(
            {{"literal", p.literal}, {"tail_length", p.tail_length}, {"case_sensitive", p.case_sensitive}});
      }
    }
    entry["patterns"] = std::move(patterns);
    if (rule.entropy_floor) entry["entropy_floor"] = *rule.entropy_floor;
    doc.push_back(std::move(entry));
  }
  return doc;
}

std::vector<RuleSignature> rules_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw ParseError("rule set must be a JSON array", 0);
  std::vector<RuleSignature> rules;
  for (const auto& entry : doc) {
    try {
      RuleSignature rule;
      const auto& category = entry.at("category");
      rule.category = category.is_number_integer() ? category_from_id(category.get<int>())
                                                   : parse_category(category.get<std::string>());
      if (entry.contains("keywords")) rule.keywords = entry.at("keywords").get<std::vector<std::string>>();
      if (entry.contains("patterns")) {
        for (const auto& p : entry.at("patterns")) {
          if (p.is_string()) {
            rule.patterns.push_back({p.get<std::string>(), 0, false});
          } else {
            rule.patterns.push_back({p.at("literal").get<std::string>(), p.value("tail_length", std::size_t{0}),
                                     p.value("case_sensitive", false)});
          }
        }
      }
      if (entry.contains("entropy_floor") && !entry.at("entropy_floor").is_null()) {
        rule.entropy_floor = entry.at("entropy_floor").get<double>();
      }
      validate(rule);
      rules.push_back(std::move(rule));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed rule signature: ") + e.what(), 0);
    }
  }
  return rules;
}

std::vector<RuleSignature> load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rules file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("rules file is not valid JSON: ") + e.what(), 0);
  }
  return rules_from_json(doc);
}

void save_rules(const std::vector<RuleSignature>& rules, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write rules file: " + path);
  out << rules_to_json(rules).dump(2) << '\n';
}

}  // namespace credscan
