#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace minsum {

// Fixed-dimension real vector with finite entries.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;

  // Validates finiteness and non-emptiness; does not normalize.
  explicit EmbeddingVector(std::vector<double> values);

  // Validates, then L2-normalizes. Throws NumericError on a zero vector.
  static EmbeddingVector unit(std::vector<double> values);

  int dim() const { return static_cast<int>(values_.size()); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  double norm() const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

// Cosine similarity, clamped to [-1, 1]. Symmetric by construction.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Arithmetic mean of the vectors, L2-normalized. Throws ContractError on an
// empty list or mixed dimensions, NumericError when the mean is zero.
EmbeddingVector mean_vector(std::span<const EmbeddingVector> vs);

enum class BackendKind { baseline_ngram, precomputed, adapted };

std::string_view backend_kind_name(BackendKind k);

// Deterministic text-to-vector function. All backends emit unit-norm vectors.
//
// embed_keyed() exists because the precomputed backend resolves vectors by
// record id rather than by content: callers embedding an utterance pass its
// id as the key, while free text (topics) is keyed by itself via embed().
class EmbeddingBackend {
 public:
  EmbeddingBackend(std::string name, int dim, BackendKind kind);
  virtual ~EmbeddingBackend() = default;

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  BackendKind kind() const { return kind_; }

  EmbeddingVector embed(std::string_view text) const { return embed_keyed(text, text); }
  virtual EmbeddingVector embed_keyed(std::string_view key, std::string_view text) const = 0;

 private:
  std::string name_;
  int dim_;
  BackendKind kind_;
};

// Hashed character n-gram (n in {2,3}) term-frequency embedder.
//
// Code points are filtered to drop whitespace and punctuation, every bigram
// and trigram of the remainder is hashed (FNV-1a) into one of dim buckets,
// and the bucket counts are L2-normalized. Stateless: a text's vector does
// not depend on any other text.
class NgramBackend final : public EmbeddingBackend {
 public:
  explicit NgramBackend(int dim = 256);

  EmbeddingVector embed_keyed(std::string_view key, std::string_view text) const override;
};

// Vectors loaded from a line-delimited {id, v} file. Lets an external
// encoder supply embeddings offline.
class PrecomputedBackend final : public EmbeddingBackend {
 public:
  PrecomputedBackend(std::string name, std::map<std::string, EmbeddingVector, std::less<>> vectors);

  static PrecomputedBackend load(const std::string& path);

  EmbeddingVector embed_keyed(std::string_view key, std::string_view text) const override;

  std::size_t size() const { return vectors_.size(); }

 private:
  std::map<std::string, EmbeddingVector, std::less<>> vectors_;
};

}  // namespace minsum
