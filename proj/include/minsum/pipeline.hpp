#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "minsum/corpus.hpp"
#include "minsum/embedding.hpp"
#include "minsum/metrics.hpp"
#include "minsum/summarizer.hpp"
#include "minsum/trainer.hpp"
#include "minsum/triplets.hpp"

namespace minsum {

struct BackendSpec {
  std::string kind = "ngram";  // "ngram" | "file"
  int dim = 256;               // ngram bucket count
  std::string path;            // vector file for kind == "file"
};

struct TripletBuildConfig {
  double pos_threshold = 0.5;
  double neg_threshold = 0.9;
  std::uint64_t seed = 1;
  int max_attempts = 100;
};

// Declarative configuration for all pipeline stages. The config file is the
// source of truth; CLI flags override individual values.
struct PipelineConfig {
  std::string minutes;
  std::string tasks;
  std::string out_dir = "out";
  std::vector<std::string> noise = kDefaultNoise;
  BackendSpec backend;
  TripletBuildConfig triplets;
  std::uint64_t split_seed = 2;
  TrainConfig train;
  MmrConfig mmr;
  QueryScope query_scope = QueryScope::pool;
  RougeUnit rouge_unit = RougeUnit::character_unigram;
  bool diff_strict = false;  // count only strictly positive diffs as correct
};

// Strict parse: unknown keys anywhere are rejected with the offending key
// named. Values are validated (lambda range, positive dims, ...).
PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);

// Canonical JSON form (all fields, sorted keys) used for hashing.
nlohmann::json config_to_json(const PipelineConfig& cfg);

// 16-hex-digit FNV-1a hash of the canonical config.
std::string config_hash(const PipelineConfig& cfg);

std::unique_ptr<EmbeddingBackend> make_backend(const BackendSpec& spec);

// Canonical artifact locations under out_dir.
struct ArtifactPaths {
  std::string corpus;
  std::string triplets;
  std::string triplet_report;
  std::string model;
  std::string train_report;
  std::string diff_report;
  std::string summaries;
  std::string rouge_report;
};

ArtifactPaths artifact_paths(const std::string& out_dir);

// Stage entry points. Empty string arguments fall back to the canonical
// paths; an empty model path means the unadapted base backend.
void stage_ingest(const PipelineConfig& cfg, const std::string& minutes_path,
                  const std::string& out_corpus);

BuildReport stage_build_triplets(const PipelineConfig& cfg, const std::string& corpus_path,
                                 const std::string& out_triplets, const std::string& out_report);

TrainReport stage_train(const PipelineConfig& cfg, const std::string& corpus_path,
                        const std::string& triplets_path, const std::string& out_model,
                        const std::string& out_report);

DiffReport stage_eval_embed(const PipelineConfig& cfg, const std::string& corpus_path,
                            const std::string& triplets_path, const std::string& model_path,
                            const std::string& split, const std::string& out_report);

void stage_summarize(const PipelineConfig& cfg, const std::string& corpus_path,
                     const std::string& tasks_path, const std::string& model_path,
                     const std::string& out_summaries);

nlohmann::json stage_rouge(const PipelineConfig& cfg, const std::string& candidates_path,
                           const std::string& references_path, const std::string& out_report);

// All stages in order: ingest, build-triplets, train, eval-embed (test
// split, trained model), summarize (trained model), rouge.
void run_pipeline(const PipelineConfig& cfg);

}  // namespace minsum
