#include "credscan/cli_config.h"

#include <cstdlib>
#include <fstream>

#include "credscan/error.h"

namespace credscan {
namespace {

std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-') {
    throw DomainError(source + ": seed must be a non-negative integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

std::string_view output_format_name(OutputFormat f) {
  switch (f) {
    case OutputFormat::kText: return "text";
    case OutputFormat::kJson: return "json";
    case OutputFormat::kJsonl: return "jsonl";
  }
  return "text";
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "text") return OutputFormat::kText;
  if (name == "json") return OutputFormat::kJson;
  if (name == "jsonl") return OutputFormat::kJsonl;
  throw DomainError("output format must be text, json or jsonl, got '" + std::string(name) + "'");
}

EnvLookup process_env() {
  return [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
}

void apply_config_json(CliConfig& c, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("config file must hold a JSON object", 0);
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "provider") {
        c.provider.kind = parse_provider_kind(value.get<std::string>());
      } else if (key == "endpoint") {
        c.provider.endpoint_url = value.get<std::string>();
      } else if (key == "model_name") {
        c.provider.model_name = value.get<std::string>();
      } else if (key == "dimension") {
        c.provider.dimension = value.get<std::size_t>();
      } else if (key == "batch_size") {
        c.provider.batch_size = value.get<std::size_t>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "output") {
        c.output_format = parse_output_format(value.get<std::string>());
      } else if (key == "mask") {
        c.masking = value.get<bool>();
      } else if (key == "rules") {
        c.rules_path = value.get<std::string>();
      } else if (key == "model") {
        c.model_checkpoint = value.get<std::string>();
      } else if (key == "cache") {
        c.cache_path = value.get<std::string>();
      } else {
        throw ParseError("unknown config key '" + key + "'", 0);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config file: ") + e.what(), 0);
  }
}

CliConfig resolve_config(const std::optional<std::string>& config_file, const CliOverrides& flags,
                         const EnvLookup& env) {
  CliConfig c;
  if (config_file) {
    std::ifstream in(*config_file);
    if (!in) throw IoError("cannot open config file " + *config_file);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(*config_file + ": " + e.what(), 0);
    }
    apply_config_json(c, doc);
  }

  if (auto v = env(kProviderEnvVar)) c.provider.kind = parse_provider_kind(*v);
  if (auto v = env(kEndpointEnvVar)) c.provider.endpoint_url = *v;
  if (auto v = env(kSeedEnvVar)) c.seed = parse_seed(*v, kSeedEnvVar);
  if (auto v = env(kOutputEnvVar)) c.output_format = parse_output_format(*v);

  if (flags.provider) c.provider.kind = parse_provider_kind(*flags.provider);
  if (flags.endpoint) c.provider.endpoint_url = *flags.endpoint;
  if (flags.output) c.output_format = parse_output_format(*flags.output);
  if (flags.seed) c.seed = *flags.seed;
  if (flags.rules_path) c.rules_path = flags.rules_path;
  if (flags.model_checkpoint) c.model_checkpoint = flags.model_checkpoint;
  if (flags.cache_path) c.cache_path = flags.cache_path;
  if (flags.no_mask) c.masking = false;

  if (c.provider.kind == ProviderKind::kRemote && c.provider.model_name == "hashed-ngram") {
    c.provider.model_name = "gpt2";
  }
  validate(c.provider);
  return c;
}

nlohmann::json config_to_json(const CliConfig& c) {
  auto opt = [](const std::optional<std::string>& s) { return s ? nlohmann::json(*s) : nlohmann::json(nullptr); };
  return {{"provider", std::string(provider_kind_name(c.provider.kind))},
          {"model_name", c.provider.model_name},
          {"dimension", c.provider.dimension},
          {"batch_size", c.provider.batch_size},
          {"endpoint", opt(c.provider.endpoint_url)},
          {"rules", opt(c.rules_path)},
          {"model", opt(c.model_checkpoint)},
          {"cache", opt(c.cache_path)},
          {"output", std::string(output_format_name(c.output_format))},
          {"seed", c.seed},
          {"mask", c.masking}};
}

}  // namespace credscan
