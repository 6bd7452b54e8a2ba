#include "credscan/embedder.h"

#include <array>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "credscan/error.h"

namespace credscan {
namespace {

constexpr std::array<char, 8> kCacheMagic = {'C', 'S', 'E', 'M', 'B', 'C', '0', '1'};

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <typename T>
bool get_le(std::istream& in, T& value) {
  std::array<unsigned char, sizeof(T)> buf{};
  if (!in.read(reinterpret_cast<char*>(buf.data()), sizeof(T))) return false;
  value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
  return true;
}

struct Endpoint {
  std::string scheme_host_port;
  std::string base_path;
};

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  Endpoint ep;
  if (path_start == std::string::npos) {
    ep.scheme_host_port = url;
  } else {
    ep.scheme_host_port = url.substr(0, path_start);
    ep.base_path = url.substr(path_start);
    while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
  }
  return ep;
}

void default_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

}  // namespace

bool EmbeddingVector::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

EmbeddingVector mean_pool(std::span<const EmbeddingVector> token_vectors) {
  if (token_vectors.empty()) throw DomainError("mean_pool needs at least one vector");
  const std::size_t dim = token_vectors.front().dimension();
  std::vector<double> sum(dim, 0.0);
  for (const auto& v : token_vectors) {
    if (v.dimension() != dim) throw DomainError("mean_pool dimension mismatch");
    for (std::size_t i = 0; i < dim; ++i) sum[i] += v[i];
  }
  const double n = static_cast<double>(token_vectors.size());
  for (double& x : sum) x /= n;
  return EmbeddingVector(std::move(sum));
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) throw DomainError("cosine_similarity dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) dot += a[i] * b[i];
  const double denom = l2_norm(a.view()) * l2_norm(b.view());
  if (denom == 0.0) throw DomainError("cosine_similarity of a zero vector");
  return dot / denom;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EmbeddingVector fallback_embed(std::string_view text, std::size_t dimension) {
  if (text.empty()) throw DomainError("cannot embed empty text");
  if (dimension == 0) throw DomainError("embedding dimension must be positive");
  std::vector<double> acc(dimension, 0.0);
  for (std::size_t n = 1; n <= 3; ++n) {
    if (text.size() < n) break;
    for (std::size_t i = 0; i + n <= text.size(); ++i) {
      const std::uint64_t h = fnv1a64(text.substr(i, n));
      const double sign = (h >> 63) ? -1.0 : 1.0;
      acc[h % dimension] += sign;
    }
  }
  double norm = l2_norm(acc);
  if (norm == 0.0) {
    // Every bucket cancelled; only possible for an even n-gram count.
    acc[fnv1a64(text) % dimension] = 1.0;
    norm = 1.0;
  }
  for (double& x : acc) x /= norm;
  return EmbeddingVector(std::move(acc));
}

std::string_view provider_kind_name(ProviderKind kind) {
  return kind == ProviderKind::kRemote ? "remote" : "fallback";
}

ProviderKind parse_provider_kind(std::string_view name) {
  if (name == "remote") return ProviderKind::kRemote;
  if (name == "fallback") return ProviderKind::kFallback;
  throw DomainError("unknown provider kind: '" + std::string(name) + "'");
}

void validate(const ProviderSpec& spec) {
  if (spec.dimension == 0) throw DomainError("provider dimension must be positive");
  if (spec.batch_size == 0) throw DomainError("provider batch_size must be positive");
  if (spec.kind == ProviderKind::kRemote && (!spec.endpoint_url || spec.endpoint_url->empty())) {
    throw DomainError("remote provider requires an endpoint URL");
  }
}

FallbackEmbedder::FallbackEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw DomainError("embedding dimension must be positive");
}

std::vector<EmbeddingVector> FallbackEmbedder::embed_chunk(std::span<const std::string> texts,
                                                           std::size_t /*chunk_index*/) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(fallback_embed(t, dimension_));
  return out;
}

RemoteEmbedder::RemoteEmbedder(ProviderSpec spec, RetryPolicy retry)
    : spec_(std::move(spec)), retry_(std::move(retry)) {
  spec_.kind = ProviderKind::kRemote;
  validate(spec_);
  if (retry_.attempts < 1) throw DomainError("retry attempts must be >= 1");
  if (!retry_.sleep) retry_.sleep = default_sleep;
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_chunk(std::span<const std::string> texts,
                                                         std::size_t chunk_index) const {
  if (texts.empty()) return {};
  const Endpoint ep = parse_endpoint(*spec_.endpoint_url);
  const nlohmann::json request = {{"model", spec_.model_name},
                                  {"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  const std::string body = request.dump();

  std::string last_error;
  for (int attempt = 0; attempt < retry_.attempts; ++attempt) {
    if (attempt > 0) retry_.sleep(retry_.base_delay * (1 << (attempt - 1)));
    httplib::Client client(ep.scheme_host_port);
    client.set_connection_timeout(retry_.timeout);
    client.set_read_timeout(retry_.timeout);
    client.set_write_timeout(retry_.timeout);
    auto res = client.Post(ep.base_path + "/embed", body, "application/json");
    if (!res) {
      last_error = "sidecar unreachable: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "sidecar returned HTTP " + std::to_string(res->status);
      if (res->status >= 500) continue;
      break;  // 4xx: the request itself is wrong; retrying cannot help
    }

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ProtocolError(std::string("sidecar reply is not JSON: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("vectors") || !reply["vectors"].is_array()) {
      throw ProtocolError("sidecar reply lacks a 'vectors' array");
    }
    if (reply.contains("dim") && reply["dim"].is_number_integer() &&
        reply["dim"].get<std::size_t>() != spec_.dimension) {
      throw ProtocolError("sidecar dimension " + std::to_string(reply["dim"].get<std::size_t>()) +
                          " does not match expected " + std::to_string(spec_.dimension));
    }
    const auto& vectors = reply["vectors"];
    if (vectors.size() != texts.size()) {
      throw ProtocolError("sidecar returned " + std::to_string(vectors.size()) + " vectors for " +
                          std::to_string(texts.size()) + " texts");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
      if (!v.is_array() || v.size() != spec_.dimension) {
        throw ProtocolError("sidecar vector has dimension " + std::to_string(v.size()) + ", expected " +
                            std::to_string(spec_.dimension));
      }
      try {
        out.emplace_back(v.get<std::vector<double>>());
      } catch (const nlohmann::json::exception&) {
        throw ProtocolError("sidecar vector holds non-numeric entries");
      }
    }
    return out;
  }
  throw TransportError(last_error + " (chunk " + std::to_string(chunk_index) + ", " +
                           std::to_string(retry_.attempts) + " attempts)",
                       chunk_index);
}

std::vector<std::string> RemoteEmbedder::health() const {
  const Endpoint ep = parse_endpoint(*spec_.endpoint_url);
  httplib::Client client(ep.scheme_host_port);
  client.set_connection_timeout(retry_.timeout);
  client.set_read_timeout(retry_.timeout);
  auto res = client.Get(ep.base_path + "/health");
  if (!res) throw TransportError("sidecar unreachable: " + httplib::to_string(res.error()), 0);
  if (res->status != 200) throw TransportError("sidecar health returned HTTP " + std::to_string(res->status), 0);
  try {
    const auto reply = nlohmann::json::parse(res->body);
    return reply.at("models").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed health reply: ") + e.what());
  }
}

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec, RetryPolicy retry) {
  validate(spec);
  if (spec.kind == ProviderKind::kRemote) return std::make_unique<RemoteEmbedder>(spec, std::move(retry));
  return std::make_unique<FallbackEmbedder>(spec.dimension);
}

EmbeddingCache::EmbeddingCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;  // created lazily on first insert
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size())) {
    if (in.gcount() == 0) return;
    throw IoError("embedding cache header is truncated: " + path_);
  }
  if (magic != kCacheMagic) throw IoError("not an embedding cache file: " + path_);
  for (;;) {
    std::uint64_t key = 0;
    std::uint32_t dim = 0;
    if (!get_le(in, key) || !get_le(in, dim)) break;
    std::vector<double> values(dim);
    bool complete = true;
    for (auto& x : values) {
      std::uint64_t bits = 0;
      if (!get_le(in, bits)) {
        complete = false;
        break;
      }
      std::memcpy(&x, &bits, sizeof x);
    }
    if (!complete) break;
    entries_[key] = EmbeddingVector(std::move(values));
  }
}

std::uint64_t EmbeddingCache::key_for(std::string_view provider_identity, std::string_view text) {
  return fnv1a64(text, fnv1a64(std::string(provider_identity) + '\0'));
}

std::optional<EmbeddingVector> EmbeddingCache::lookup(std::uint64_t key) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::insert(std::uint64_t key, const EmbeddingVector& v) {
  std::lock_guard lock(mutex_);
  if (entries_.count(key)) return;
  const bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot write embedding cache: " + path_);
  std::string rec;
  if (fresh) rec.append(kCacheMagic.data(), kCacheMagic.size());
  put_le(rec, key);
  put_le(rec, static_cast<std::uint32_t>(v.dimension()));
  for (double x : v.values) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x, sizeof x);
    put_le(rec, bits);
  }
  out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
  entries_[key] = v;
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const EmbeddingProvider& provider,
                                         std::size_t batch_size, EmbeddingCache* cache) {
  if (batch_size == 0) throw DomainError("batch_size must be positive");
  for (const auto& t : texts) {
    if (t.empty()) throw DomainError("cannot embed empty text");
  }
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::size_t> pending;
  pending.reserve(texts.size());
  const std::string identity = cache ? provider.identity() : std::string();
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (cache) {
      if (auto hit = cache->lookup(EmbeddingCache::key_for(identity, texts[i]));
          hit && hit->dimension() == provider.dimension()) {
        out[i] = std::move(*hit);
        continue;
      }
    }
    pending.push_back(i);
  }

  std::vector<std::string> chunk;
  for (std::size_t start = 0, chunk_index = 0; start < pending.size(); start += batch_size, ++chunk_index) {
    const std::size_t end = std::min(pending.size(), start + batch_size);
    chunk.clear();
    for (std::size_t k = start; k < end; ++k) chunk.push_back(texts[pending[k]]);
    auto vectors = provider.embed_chunk(chunk, chunk_index);
    if (vectors.size() != chunk.size()) {
      throw ProtocolError("provider returned " + std::to_string(vectors.size()) + " vectors for " +
                          std::to_string(chunk.size()) + " texts");
    }
    for (std::size_t k = start; k < end; ++k) {
      auto& v = vectors[k - start];
      if (v.dimension() != provider.dimension()) throw ProtocolError("provider returned a vector of wrong dimension");
      if (!v.all_finite()) throw ProtocolError("provider returned a non-finite vector");
      if (cache) cache->insert(EmbeddingCache::key_for(identity, texts[pending[k]]), v);
      out[pending[k]] = std::move(v);
    }
  }
  return out;
}

}  // namespace credscan
