#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file embed.hpp
 * @brief Frozen sentence-embedding abstraction and cosine geometry.
 *
 * All diversity quantities are defined relative to whichever Embedder is
 * configured. The reference embedder hashes character n-grams into a signed
 * bag-of-features vector; it is deterministic and needs no model files. A
 * remote embedder speaking a small JSON protocol lives in remote_embedder.hpp.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace semdiv {

class EmbedError : public std::runtime_error {
 public:
  enum class Kind { empty_text, transport, dimension_mismatch, service_item };

  EmbedError(Kind kind, const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), kind_(kind), index_(index) {}

  Kind kind() const noexcept { return kind_; }
  /// Batch position of the failing item, for per-item service errors.
  std::optional<std::size_t> index() const noexcept { return index_; }
  bool retryable() const noexcept { return kind_ == Kind::transport; }

 private:
  Kind kind_;
  std::optional<std::size_t> index_;
};

/// Finite, nonzero real vector. Embedders hand these out unit-normalized.
class EmbeddingVector {
 public:
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("embedding must have positive dimension");
    double sq = 0.0;
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("embedding has a non-finite entry");
      sq += v * v;
    }
    if (!(sq > 0.0)) throw std::invalid_argument("embedding is the zero vector");
    norm_ = std::sqrt(sq);
  }

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const noexcept { return norm_; }

  EmbeddingVector normalized() const {
    std::vector<double> out(values_);
    for (double& v : out) v /= norm_;
    return EmbeddingVector(std::move(out));
  }

  EmbeddingVector scaled(double c) const {
    std::vector<double> out(values_);
    for (double& v : out) v *= c;
    return EmbeddingVector(std::move(out));
  }

  friend bool operator==(const EmbeddingVector& a, const EmbeddingVector& b) {
    return a.values_ == b.values_;
  }

 private:
  std::vector<double> values_;
  double norm_ = 0.0;
};

/// κ(u, v) = <u, v> / (|u| |v|), clamped to [-1, 1].
inline double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) throw std::invalid_argument("cosine: dimension mismatch");
  if (u == v) return 1.0;
  double dot = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) dot += u[i] * v[i];
  return std::clamp(dot / (u.norm() * v.norm()), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Reference hash embedder
// ---------------------------------------------------------------------------

struct NgramRange {
  std::size_t min_n = 3;
  std::size_t max_n = 5;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::string_view trim_view(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline void add_feature(std::vector<double>& acc, std::string_view gram) {
  const std::uint64_t h = splitmix64(fnv1a64(gram));
  const std::size_t bucket = static_cast<std::size_t>(h % acc.size());
  acc[bucket] += ((h >> 63) != 0U) ? -1.0 : 1.0;
}

}  // namespace detail

/// Signed feature hashing of character n-grams, L2-normalized. Texts shorter
/// than the smallest n contribute the whole text as a single feature.
inline EmbeddingVector hash_embed(std::string_view text, std::size_t dim, NgramRange ngram = {}) {
  if (dim < 8) throw std::invalid_argument("hash_embed: dimension must be >= 8");
  if (ngram.min_n == 0 || ngram.min_n > ngram.max_n) {
    throw std::invalid_argument("hash_embed: invalid n-gram range");
  }
  const std::string_view t = detail::trim_view(text);
  if (t.empty()) throw EmbedError(EmbedError::Kind::empty_text, "cannot embed empty text");

  std::vector<double> acc(dim, 0.0);
  if (t.size() < ngram.min_n) {
    detail::add_feature(acc, t);
  } else {
    for (std::size_t n = ngram.min_n; n <= ngram.max_n && n <= t.size(); ++n) {
      for (std::size_t i = 0; i + n <= t.size(); ++i) detail::add_feature(acc, t.substr(i, n));
    }
  }
  if (std::all_of(acc.begin(), acc.end(), [](double v) { return v == 0.0; })) {
    // Every feature cancelled against another; fall back to the whole text.
    detail::add_feature(acc, t);
  }
  return EmbeddingVector(std::move(acc)).normalized();
}

// ---------------------------------------------------------------------------
// Embedder interface
// ---------------------------------------------------------------------------

class Embedder {
 public:
  virtual ~Embedder() = default;

  /// Order-preserving batch embedding; every returned vector has unit norm.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) = 0;
  virtual std::size_t dimension() const = 0;

  EmbeddingVector embed(const std::string& text) {
    auto out = embed_batch(std::span<const std::string>(&text, 1));
    return std::move(out.front());
  }
};

class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dim = 256, NgramRange ngram = {}) : dim_(dim), ngram_(ngram) {
    if (dim_ < 8) throw std::invalid_argument("HashEmbedder: dimension must be >= 8");
  }

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hash_embed(t, dim_, ngram_));
    return out;
  }

  std::size_t dimension() const override { return dim_; }

 private:
  std::size_t dim_;
  NgramRange ngram_;
};

/// In-memory memo in front of another embedder, keyed by text.
class CachingEmbedder final : public Embedder {
 public:
  explicit CachingEmbedder(std::unique_ptr<Embedder> inner) : inner_(std::move(inner)) {}

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override {
    std::vector<std::string> missing;
    for (const auto& t : texts) {
      if (!cache_.contains(t) &&
          std::find(missing.begin(), missing.end(), t) == missing.end()) {
        missing.push_back(t);
      }
    }
    if (!missing.empty()) {
      auto fresh = inner_->embed_batch(missing);
      for (std::size_t i = 0; i < missing.size(); ++i) cache_.emplace(missing[i], std::move(fresh[i]));
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(cache_.at(t));
    return out;
  }

  std::size_t dimension() const override { return inner_->dimension(); }
  std::size_t cache_size() const noexcept { return cache_.size(); }

 private:
  std::unique_ptr<Embedder> inner_;
  std::unordered_map<std::string, EmbeddingVector> cache_;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct EmbedderConfig {
  enum class Kind { reference_hash, remote_service };

  Kind kind = Kind::reference_hash;
  std::size_t dimension = 256;
  std::optional<std::string> endpoint;
  NgramRange ngram{};

  void validate() const {
    if (dimension == 0) throw std::invalid_argument("embedder dimension must be positive");
    if (kind == Kind::reference_hash && dimension < 8) {
      throw std::invalid_argument("reference-hash embedder requires dimension >= 8");
    }
    if (kind == Kind::remote_service && (!endpoint || endpoint->empty())) {
      throw std::invalid_argument("remote-service embedder requires an endpoint");
    }
    if (ngram.min_n == 0 || ngram.min_n > ngram.max_n) {
      throw std::invalid_argument("invalid n-gram range");
    }
  }
};

}  // namespace semdiv
