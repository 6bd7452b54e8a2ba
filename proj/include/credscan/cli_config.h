#pragma once

// Effective configuration for the command-line tool. Sources are layered
// defaults < config file < environment < flags.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "json.hpp"
#include "credscan/embedder.h"

namespace credscan {

enum class OutputFormat { kText, kJson, kJsonl };

std::string_view output_format_name(OutputFormat f);
// Throws DomainError for anything but text/json/jsonl.
OutputFormat parse_output_format(std::string_view name);

struct CliConfig {
  ProviderSpec provider;
  std::optional<std::string> rules_path;
  std::optional<std::string> model_checkpoint;
  std::optional<std::string> cache_path;
  OutputFormat output_format = OutputFormat::kText;
  std::uint64_t seed = 42;
  bool masking = true;
};

// Values given on the command line; unset means "not given".
struct CliOverrides {
  std::optional<std::string> provider;
  std::optional<std::string> endpoint;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> rules_path;
  std::optional<std::string> model_checkpoint;
  std::optional<std::string> cache_path;
  bool no_mask = false;
};

inline constexpr const char* kProviderEnvVar = "CREDSCAN_PROVIDER";
inline constexpr const char* kSeedEnvVar = "CREDSCAN_SEED";
inline constexpr const char* kOutputEnvVar = "CREDSCAN_OUTPUT";

// Returns the variable's value, or nullopt when unset.
using EnvLookup = std::function<std::optional<std::string>(const char*)>;
EnvLookup process_env();

// Config file keys (all optional): provider, endpoint, model_name, dimension,
// batch_size, seed, output, mask, rules, model, cache.
// Throws ParseError on unknown keys or wrong types, DomainError on bad values.
void apply_config_json(CliConfig& config, const nlohmann::json& doc);

CliConfig resolve_config(const std::optional<std::string>& config_file, const CliOverrides& flags,
                         const EnvLookup& env = process_env());

nlohmann::json config_to_json(const CliConfig& config);

}  // namespace credscan
