#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "minsum/corpus.hpp"
#include "minsum/embedding.hpp"
#include "minsum/triplets.hpp"

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
  return std::string(MINSUM_FIXTURE_DIR) + "/" + name;
}

inline minsum::Utterance utt(std::string id, std::int64_t seq, std::string date,
                             std::string meeting, std::string speaker, std::string text) {
  return minsum::Utterance{std::move(id), seq, std::move(date), std::move(meeting),
                           std::move(speaker), std::move(text)};
}

// Backend over hand-planted vectors, keyed by id (or by the text itself for
// free text). Vectors are L2-normalized on construction.
inline minsum::PrecomputedBackend planted_backend(
    const std::vector<std::pair<std::string, std::vector<double>>>& entries) {
  std::map<std::string, minsum::EmbeddingVector, std::less<>> vectors;
  for (const auto& [id, values] : entries) {
    vectors.emplace(id, minsum::EmbeddingVector::unit(values));
  }
  return minsum::PrecomputedBackend("planted", std::move(vectors));
}

// Separable triplet fixture. Every text is a class-specific letter token
// followed by a long repeated-digit noise token. The target and positive
// share the class token but carry different noise; the negative carries a
// different class token but the target's noise. In the raw n-gram space the
// shared noise dominates, so cos(target, negative) > cos(target, positive)
// and the identity adapter scores near zero accuracy; a linear map that
// suppresses the noise buckets separates the classes.
inline std::vector<minsum::Triplet> separable_triplets(std::size_t n) {
  static const std::vector<std::string> kSignal = {"abcdef", "ghijkl", "mnopqr", "stuvwx",
                                                   "fedcba", "lkjihg", "rqponm", "xwvuts"};
  const auto noise_token = [](std::size_t d) { return std::string(12, static_cast<char>('0' + d)); };

  std::vector<minsum::Triplet> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % kSignal.size();
    const std::size_t c2 = (c + 1 + (i / kSignal.size()) % (kSignal.size() - 1)) % kSignal.size();
    const std::size_t a = i % 10;
    const std::size_t b = (a + 1 + (i / 10) % 9) % 10;

    const std::string tag = std::to_string(i);
    minsum::Triplet t;
    t.target = utt("sep-" + tag + "-t", 0, "d1", "m1", "s", kSignal[c] + noise_token(a));
    t.positive = utt("sep-" + tag + "-p", 1, "d1", "m1", "s", kSignal[c] + noise_token(b));
    t.negative = utt("sep-" + tag + "-n", 0, "d2", "m2", "s", kSignal[c2] + noise_token(a));
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace testsupport
