#include <map>

#include "doctest.h"
#include "support.h"
#include "credscan/cli_config.h"
#include "credscan/error.h"

using namespace credscan;

namespace {

EnvLookup fake_env(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const char* name) -> std::optional<std::string> {
    const auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

}  // namespace

TEST_CASE("defaults") {
  const auto c = resolve_config(std::nullopt, CliOverrides{}, fake_env({}));
  CHECK(c.provider.kind == ProviderKind::kFallback);
  CHECK(c.seed == 42);
  CHECK(c.masking);
  CHECK(c.output_format == OutputFormat::kText);
  CHECK_FALSE(c.model_checkpoint.has_value());
}

TEST_CASE("precedence: file < env < flags") {
  testing::TempDir dir;
  const auto file = dir.write("c.json", R"({"seed": 1, "output": "json", "mask": false, "rules": "r.json"})");

  auto c = resolve_config(file, CliOverrides{}, fake_env({}));
  CHECK(c.seed == 1);
  CHECK(c.output_format == OutputFormat::kJson);
  CHECK_FALSE(c.masking);
  CHECK(c.rules_path == "r.json");

  c = resolve_config(file, CliOverrides{}, fake_env({{kSeedEnvVar, "2"}, {kOutputEnvVar, "jsonl"}}));
  CHECK(c.seed == 2);
  CHECK(c.output_format == OutputFormat::kJsonl);

  CliOverrides flags;
  flags.seed = 3;
  flags.output = "text";
  c = resolve_config(file, flags, fake_env({{kSeedEnvVar, "2"}, {kOutputEnvVar, "jsonl"}}));
  CHECK(c.seed == 3);
  CHECK(c.output_format == OutputFormat::kText);
}

TEST_CASE("remote provider resolution") {
  auto c = resolve_config(std::nullopt, CliOverrides{},
                          fake_env({{kProviderEnvVar, "remote"}, {kEndpointEnvVar, "http://127.0.0.1:9"}}));
  CHECK(c.provider.kind == ProviderKind::kRemote);
  CHECK(c.provider.model_name == "gpt2");
  CHECK(c.provider.endpoint_url == "http://127.0.0.1:9");
  // Remote without an endpoint is rejected.
  CHECK_THROWS_AS(resolve_config(std::nullopt, CliOverrides{}, fake_env({{kProviderEnvVar, "remote"}})), DomainError);
  CliOverrides back;
  back.provider = "fallback";
  CHECK(resolve_config(std::nullopt, back, fake_env({{kProviderEnvVar, "remote"}})).provider.kind ==
        ProviderKind::kFallback);
}

TEST_CASE("bad configuration") {
  testing::TempDir dir;
  CHECK_THROWS_AS(resolve_config(dir.file("none.json"), CliOverrides{}, fake_env({})), IoError);
  CHECK_THROWS_AS(resolve_config(dir.write("a.json", R"({"colour": 1})"), CliOverrides{}, fake_env({})), ParseError);
  CHECK_THROWS_AS(resolve_config(dir.write("b.json", R"({"seed": "x"})"), CliOverrides{}, fake_env({})), ParseError);
  CHECK_THROWS_AS(resolve_config(dir.write("c.json", "[1]"), CliOverrides{}, fake_env({})), ParseError);
  CHECK_THROWS_AS(resolve_config(dir.write("d.json", "{"), CliOverrides{}, fake_env({})), ParseError);
  CHECK_THROWS_AS(resolve_config(std::nullopt, CliOverrides{}, fake_env({{kSeedEnvVar, "-4"}})), DomainError);
  CHECK_THROWS_AS(resolve_config(std::nullopt, CliOverrides{}, fake_env({{kSeedEnvVar, "12abc"}})), DomainError);
  CHECK_THROWS_AS(resolve_config(std::nullopt, CliOverrides{}, fake_env({{kOutputEnvVar, "xml"}})), DomainError);
  CHECK_THROWS_AS(parse_output_format("yaml"), DomainError);
}

TEST_CASE("config json") {
  CliOverrides flags;
  flags.no_mask = true;
  flags.model_checkpoint = "m.bin";
  const auto j = config_to_json(resolve_config(std::nullopt, flags, fake_env({})));
  CHECK(j.at("mask") == false);
  CHECK(j.at("model") == "m.bin");
  CHECK(j.at("cache").is_null());
  CHECK(j.at("provider") == "fallback");
  CHECK(output_format_name(OutputFormat::kJsonl) == "jsonl");
}
