#pragma once

// Credential embeddings behind a uniform provider contract.
//
// Two providers ship: a client for the HTTP embedding sidecar (transformer
// hidden states, mean-pooled server side) and an offline hashed character
// n-gram projection that keeps the pipeline runnable without model weights.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace credscan {

inline constexpr std::size_t kDefaultEmbeddingDim = 768;

// Fixed-length real vector. All entries finite.
struct EmbeddingVector {
  std::vector<double> values;

  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> v) : values(std::move(v)) {}

  std::size_t dimension() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  std::span<const double> view() const { return values; }
  bool all_finite() const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

// Component-wise mean. Throws DomainError on an empty list or mixed dimensions.
EmbeddingVector mean_pool(std::span<const EmbeddingVector> token_vectors);

double l2_norm(std::span<const double> v);
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// 64-bit FNV-1a. The fallback embedder's bucket hash; also used for cache keys.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Hashed character n-grams (n = 1, 2, 3 over raw bytes). Each n-gram hashes
// with fnv1a64; bucket = hash % dimension, sign = bit 63 (set means -1).
// The accumulated vector is L2-normalized. Throws DomainError on empty text.
EmbeddingVector fallback_embed(std::string_view text, std::size_t dimension = kDefaultEmbeddingDim);

enum class ProviderKind { kFallback, kRemote };

struct ProviderSpec {
  ProviderKind kind = ProviderKind::kFallback;
  std::string model_name = "hashed-ngram";
  std::size_t dimension = kDefaultEmbeddingDim;
  std::size_t batch_size = 32;
  std::optional<std::string> endpoint_url;
};

// Throws DomainError: zero dimension/batch size, or remote without endpoint.
void validate(const ProviderSpec& spec);

std::string_view provider_kind_name(ProviderKind kind);
ProviderKind parse_provider_kind(std::string_view name);

// Environment variable consulted for the sidecar endpoint.
inline constexpr const char* kEndpointEnvVar = "CREDSCAN_EMBED_ENDPOINT";

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dimension() const = 0;
  // "<kind>/<model>"; part of the cache key.
  virtual std::string identity() const = 0;
  // One request's worth of texts. `chunk_index` is reported in errors.
  // Implementations must be safe to call concurrently.
  virtual std::vector<EmbeddingVector> embed_chunk(std::span<const std::string> texts,
                                                   std::size_t chunk_index) const = 0;
};

class FallbackEmbedder final : public EmbeddingProvider {
 public:
  explicit FallbackEmbedder(std::size_t dimension = kDefaultEmbeddingDim);

  std::size_t dimension() const override { return dimension_; }
  std::string identity() const override { return "fallback/hashed-ngram"; }
  std::vector<EmbeddingVector> embed_chunk(std::span<const std::string> texts,
                                           std::size_t chunk_index) const override;

 private:
  std::size_t dimension_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{100};
  std::chrono::seconds timeout{30};
  // Injected so tests do not sleep. Defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

// Client half of the sidecar protocol:
//   POST /embed {"model", "texts"} -> {"model", "dim", "vectors"}
// Transport failures and non-2xx statuses retry with exponential backoff
// (base, 2*base, ...) and then throw TransportError. A response with the
// wrong vector count or dimension throws ProtocolError without retrying.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(ProviderSpec spec, RetryPolicy retry = {});

  std::size_t dimension() const override { return spec_.dimension; }
  std::string identity() const override { return "remote/" + spec_.model_name; }
  std::vector<EmbeddingVector> embed_chunk(std::span<const std::string> texts,
                                           std::size_t chunk_index) const override;

  // GET /health; returns the served model names. Throws TransportError.
  std::vector<std::string> health() const;

 private:
  ProviderSpec spec_;
  RetryPolicy retry_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec, RetryPolicy retry = {});

// Append-only on-disk cache keyed by (provider identity, text).
//
// File layout, all integers little-endian:
//   magic "CSEMBC01"
//   repeated records: u64 key, u32 dim, dim x f64
// A truncated trailing record (interrupted write) is ignored on load.
class EmbeddingCache {
 public:
  // Opens or creates `path`; loads existing records.
  explicit EmbeddingCache(std::string path);

  static std::uint64_t key_for(std::string_view provider_identity, std::string_view text);

  std::optional<EmbeddingVector> lookup(std::uint64_t key) const;
  void insert(std::uint64_t key, const EmbeddingVector& v);
  std::size_t size() const;

 private:
  std::string path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, EmbeddingVector> entries_;
};

// Embeds `texts` in order, `batch_size` per provider call. Cached vectors
// skip the provider. Throws DomainError on an empty text, TransportError
// (carrying the chunk index) or ProtocolError from the provider, and
// ProtocolError if a vector is non-finite or of the wrong dimension.
std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const EmbeddingProvider& provider,
                                         std::size_t batch_size = 32, EmbeddingCache* cache = nullptr);

}  // namespace credscan
