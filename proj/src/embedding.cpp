#include "minsum/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "minsum/errors.hpp"
#include "minsum/rng.hpp"
#include "minsum/utf8.hpp"

namespace minsum {

namespace {

void require_finite(const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("embedding vector has a non-finite entry");
  }
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ContractError("embedding vector must have positive dimension");
  require_finite(values_);
}

EmbeddingVector EmbeddingVector::unit(std::vector<double> values) {
  EmbeddingVector v(std::move(values));
  const double n = v.norm();
  if (n == 0.0) throw NumericError("cannot normalize the zero vector");
  for (double& x : v.values_) x /= n;
  return v;
}

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (double x : values_) s += x * x;
  return std::sqrt(s);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw ContractError("cosine: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ContractError("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

EmbeddingVector mean_vector(std::span<const EmbeddingVector> vs) {
  if (vs.empty()) throw ContractError("mean_vector: empty list");
  const int dim = vs.front().dim();
  std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
  for (const auto& v : vs) {
    if (v.dim() != dim) throw ContractError("mean_vector: dimension mismatch");
    for (int i = 0; i < dim; ++i) acc[static_cast<std::size_t>(i)] += v[static_cast<std::size_t>(i)];
  }
  const double inv = 1.0 / static_cast<double>(vs.size());
  for (double& x : acc) x *= inv;
  double n = 0.0;
  for (double x : acc) n += x * x;
  if (n == 0.0) throw NumericError("mean_vector: mean is the zero vector");
  return EmbeddingVector::unit(std::move(acc));
}

std::string_view backend_kind_name(BackendKind k) {
  switch (k) {
    case BackendKind::baseline_ngram:
      return "baseline-ngram";
    case BackendKind::precomputed:
      return "precomputed";
    case BackendKind::adapted:
      return "adapted";
  }
  return "unknown";
}

EmbeddingBackend::EmbeddingBackend(std::string name, int dim, BackendKind kind)
    : name_(std::move(name)), dim_(dim), kind_(kind) {
  if (dim_ <= 0) throw ContractError("backend dimension must be positive");
}

NgramBackend::NgramBackend(int dim)
    : EmbeddingBackend("ngram-" + std::to_string(dim), dim, BackendKind::baseline_ngram) {}

EmbeddingVector NgramBackend::embed_keyed(std::string_view /*key*/, std::string_view text) const {
  if (text.empty()) throw ContractError("cannot embed empty text");

  std::vector<char32_t> cps;
  for (char32_t c : utf8_decode(text)) {
    if (!is_space_cp(c) && !is_punct_cp(c)) cps.push_back(c);
  }
  if (cps.size() < 2) {
    throw NumericError("degenerate input: text yields no character n-grams");
  }

  std::vector<double> buckets(static_cast<std::size_t>(dim()), 0.0);
  const auto add_ngrams = [&](std::size_t n) {
    if (cps.size() < n) return;
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      char bytes[12];
      for (std::size_t k = 0; k < n; ++k) {
        const auto cp = static_cast<std::uint32_t>(cps[i + k]);
        bytes[4 * k + 0] = static_cast<char>(cp & 0xFF);
        bytes[4 * k + 1] = static_cast<char>((cp >> 8) & 0xFF);
        bytes[4 * k + 2] = static_cast<char>((cp >> 16) & 0xFF);
        bytes[4 * k + 3] = static_cast<char>((cp >> 24) & 0xFF);
      }
      const std::uint64_t h = fnv1a64(std::string_view(bytes, 4 * n));
      buckets[h % static_cast<std::uint64_t>(dim())] += 1.0;
    }
  };
  add_ngrams(2);
  add_ngrams(3);

  return EmbeddingVector::unit(std::move(buckets));
}

PrecomputedBackend::PrecomputedBackend(std::string name,
                                       std::map<std::string, EmbeddingVector, std::less<>> vectors)
    : EmbeddingBackend(std::move(name),
                       vectors.empty() ? 1 : vectors.begin()->second.dim(),
                       BackendKind::precomputed),
      vectors_(std::move(vectors)) {
  if (vectors_.empty()) throw DataError("precomputed backend: no vectors");
  for (const auto& [id, v] : vectors_) {
    if (v.dim() != dim()) {
      throw DataError("precomputed backend: vector for id '" + id + "' has dimension " +
                      std::to_string(v.dim()) + ", expected " + std::to_string(dim()));
    }
  }
}

PrecomputedBackend PrecomputedBackend::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vector file: " + path);
  std::map<std::string, EmbeddingVector, std::less<>> vectors;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("vector file parse error at line " + std::to_string(lineno) + ": " + e.what());
    }
    if (lineno == 1 && rec.is_object() && rec.contains("meta")) continue;
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("v") || !rec["v"].is_array()) {
      throw DataError("vector file line " + std::to_string(lineno) + ": expected {id, v} record");
    }
    std::vector<double> values;
    values.reserve(rec["v"].size());
    for (const auto& x : rec["v"]) {
      if (!x.is_number()) {
        throw DataError("vector file line " + std::to_string(lineno) + ": non-numeric entry");
      }
      values.push_back(x.get<double>());
    }
    std::string id = rec["id"].get<std::string>();
    EmbeddingVector v;
    try {
      v = EmbeddingVector::unit(std::move(values));
    } catch (const Error& e) {
      throw DataError("vector file line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!vectors.emplace(std::move(id), std::move(v)).second) {
      throw DataError("vector file line " + std::to_string(lineno) + ": duplicate id");
    }
  }
  return PrecomputedBackend("file:" + path, std::move(vectors));
}

EmbeddingVector PrecomputedBackend::embed_keyed(std::string_view key,
                                                std::string_view /*text*/) const {
  if (key.empty()) throw ContractError("cannot embed empty text");
  const auto it = vectors_.find(key);
  if (it == vectors_.end()) {
    throw DataError("precomputed backend '" + name() + "': no vector for id '" + std::string(key) +
                    "'");
  }
  return it->second;
}

}  // namespace minsum
