#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "minsum/corpus.hpp"
#include "minsum/embedding.hpp"

namespace minsum {

// (target, positive, negative) utterance triple. target and positive are
// same-speaker neighbours (positive.seq == target.seq + 1 within one
// (date, meeting)); the negative comes from a different (date, meeting).
// pos_sim / neg_sim are the cosines in the backend used for building.
struct Triplet {
  Utterance target;
  Utterance positive;
  Utterance negative;
  double pos_sim = 0.0;
  double neg_sim = 0.0;
};

struct TripletSplit {
  std::vector<Triplet> train;
  std::vector<Triplet> dev;
  std::vector<Triplet> test;
  std::uint64_t seed = 0;
};

struct BuildReport {
  std::size_t emitted = 0;
  std::size_t skipped = 0;  // targets whose negative search exhausted max_attempts
  double pos_threshold = 0.0;
  double neg_threshold = 0.0;
  std::uint64_t seed = 0;
  int max_attempts = 0;
  std::string backend;
  std::vector<std::string> skipped_targets;

  nlohmann::json to_json() const;
};

struct BuildResult {
  std::vector<Triplet> triplets;
  BuildReport report;
};

// Emits one triplet per adjacent same-speaker pair whose cosine reaches
// pos_threshold. The negative is drawn uniformly from utterances of other
// (date, meeting) pairs, re-drawing until its cosine with the target drops
// to neg_threshold or max_attempts is exhausted (then the target is skipped
// and counted). The per-target RNG stream is derived from (seed, target id),
// so results do not depend on processing order.
BuildResult build_triplets(const Corpus& corpus, const EmbeddingBackend& backend,
                           double pos_threshold = 0.5, double neg_threshold = 0.9,
                           std::uint64_t seed = 0, int max_attempts = 100);

// Seeded shuffle, then a contiguous 80/10/10 cut. dev and test each take
// round(n/10) triplets; the remainder stays in train.
TripletSplit split_triplets(std::vector<Triplet> triplets, std::uint64_t seed);

// Line-delimited {target_id, positive_id, negative_id, pos_sim, neg_sim}
// records, optionally preceded by a {"meta": ...} line.
void save_triplets(const std::string& path, const std::vector<Triplet>& triplets,
                   const nlohmann::json& meta = nlohmann::json());

// Resolves ids against the corpus. Unknown id -> DataError.
std::vector<Triplet> load_triplets(const std::string& path, const Corpus& corpus);

}  // namespace minsum
