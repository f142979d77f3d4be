#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file remote_embedder.hpp
 * @brief HTTP client for an external sentence-embedding service.
 *
 * Wire format (one POST per batch):
 *
 *   request   {"texts": ["...", ...]}
 *   response  {"embeddings": [[...], ...], "dim": 384}
 *
 * A non-200 status or malformed JSON is a transport error (retryable). A
 * `dim` that differs from the configured dimension, or a vector of the wrong
 * length, is a dimension-mismatch error. A null or non-numeric entry is a
 * per-item service error carrying the batch index. Vectors are re-normalized
 * locally.
 *
 * The endpoint can be overridden with SEMDIV_EMBED_ENDPOINT.
 */

#include "embed.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace semdiv {

inline constexpr const char* kEmbedEndpointEnv = "SEMDIV_EMBED_ENDPOINT";

/// Endpoint from the environment when set, else the configured one.
inline std::optional<std::string> resolve_endpoint(const EmbedderConfig& config) {
  if (const char* env = std::getenv(kEmbedEndpointEnv); env != nullptr && *env != '\0') {
    return std::string(env);
  }
  return config.endpoint;
}

namespace detail {

struct ParsedUrl {
  std::string origin;  ///< scheme://host[:port]
  std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw EmbedError(EmbedError::Kind::transport, "endpoint is not an absolute URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(std::string endpoint, std::size_t dim, int timeout_seconds = 30)
      : endpoint_(std::move(endpoint)), dim_(dim), timeout_seconds_(timeout_seconds) {
    if (dim_ == 0) throw std::invalid_argument("RemoteEmbedder: dimension must be positive");
  }

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override {
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (detail::trim_view(texts[i]).empty()) {
        throw EmbedError(EmbedError::Kind::empty_text, "cannot embed empty text", i);
      }
    }
    if (texts.empty()) return {};

    nlohmann::json request;
    request["texts"] = std::vector<std::string>(texts.begin(), texts.end());

    const auto url = detail::split_url(endpoint_);
    httplib::Client client(url.origin);
    client.set_connection_timeout(timeout_seconds_, 0);
    client.set_read_timeout(timeout_seconds_, 0);
    auto res = client.Post(url.path, request.dump(), "application/json");
    if (!res) {
      throw EmbedError(EmbedError::Kind::transport,
                       "embedding service unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw EmbedError(EmbedError::Kind::transport,
                       "embedding service returned HTTP " + std::to_string(res->status));
    }

    nlohmann::json body;
    try {
      body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw EmbedError(EmbedError::Kind::transport, std::string("malformed service response: ") + e.what());
    }
    if (!body.is_object() || !body.contains("embeddings") || !body["embeddings"].is_array()) {
      throw EmbedError(EmbedError::Kind::transport, "service response lacks an embeddings array");
    }
    const auto& rows = body["embeddings"];
    if (rows.size() != texts.size()) {
      throw EmbedError(EmbedError::Kind::transport, "service returned " + std::to_string(rows.size()) +
                                                        " embeddings for " + std::to_string(texts.size()) +
                                                        " texts");
    }
    if (body.contains("dim")) {
      if (!body["dim"].is_number_integer()) {
        throw EmbedError(EmbedError::Kind::transport, "service response has a non-integer dim");
      }
      if (body["dim"].get<std::size_t>() != dim_) {
        throw EmbedError(EmbedError::Kind::dimension_mismatch,
                         "service dim " + body["dim"].dump() + " != configured " + std::to_string(dim_));
      }
    }

    std::vector<EmbeddingVector> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = rows[i];
      if (!row.is_array()) {
        throw EmbedError(EmbedError::Kind::service_item, "service failed to embed item " + std::to_string(i), i);
      }
      if (row.size() != dim_) {
        throw EmbedError(EmbedError::Kind::dimension_mismatch,
                         "item " + std::to_string(i) + " has dimension " + std::to_string(row.size()), i);
      }
      std::vector<double> values;
      values.reserve(dim_);
      for (const auto& x : row) {
        if (!x.is_number()) {
          throw EmbedError(EmbedError::Kind::service_item, "non-numeric entry in item " + std::to_string(i), i);
        }
        values.push_back(x.get<double>());
      }
      try {
        out.push_back(EmbeddingVector(std::move(values)).normalized());
      } catch (const std::invalid_argument& e) {
        throw EmbedError(EmbedError::Kind::service_item,
                         "item " + std::to_string(i) + ": " + e.what(), i);
      }
    }
    return out;
  }

  std::size_t dimension() const override { return dim_; }
  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  std::string endpoint_;
  std::size_t dim_;
  int timeout_seconds_;
};

/// Builds the configured embedder behind an in-memory memo.
inline std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  EmbedderConfig resolved = config;
  if (resolved.kind == EmbedderConfig::Kind::remote_service) resolved.endpoint = resolve_endpoint(config);
  resolved.validate();
  std::unique_ptr<Embedder> inner;
  if (resolved.kind == EmbedderConfig::Kind::reference_hash) {
    inner = std::make_unique<HashEmbedder>(resolved.dimension, resolved.ngram);
  } else {
    inner = std::make_unique<RemoteEmbedder>(*resolved.endpoint, resolved.dimension);
  }
  return std::make_unique<CachingEmbedder>(std::move(inner));
}

/// One-shot embedding of a single text under `config`.
inline EmbeddingVector embed(const std::string& text, const EmbedderConfig& config) {
  return make_embedder(config)->embed(text);
}

/// Batch embedding through the remote service named by `config`.
inline std::vector<EmbeddingVector> remote_embed(std::span<const std::string> texts,
                                                 const EmbedderConfig& config) {
  const auto endpoint = resolve_endpoint(config);
  if (!endpoint || endpoint->empty()) throw std::invalid_argument("remote_embed: no endpoint configured");
  RemoteEmbedder client(*endpoint, config.dimension);
  return client.embed_batch(texts);
}

}  // namespace semdiv
