// minsum: meeting-minutes summarization pipeline.
//
// Subcommands: ingest, build-triplets, train, eval-embed, summarize, rouge,
// pipeline. A JSON config file supplies defaults; flags override it.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "minsum/errors.hpp"
#include "minsum/pipeline.hpp"

namespace {

using minsum::PipelineConfig;

struct CommonFlags {
  std::string config_path;
  std::string backend_kind;
  int backend_dim = 0;
  std::string vectors_path;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON configuration file");
  cmd->add_option("--backend", flags.backend_kind, "Embedding backend: ngram or file");
  cmd->add_option("--dim", flags.backend_dim, "Bucket count for the ngram backend");
  cmd->add_option("--vectors", flags.vectors_path, "Vector file for the file backend");
}

PipelineConfig build_config(const CommonFlags& flags) {
  PipelineConfig cfg;
  if (!flags.config_path.empty()) cfg = minsum::load_config(flags.config_path);
  if (!flags.backend_kind.empty()) cfg.backend.kind = flags.backend_kind;
  if (flags.backend_dim > 0) cfg.backend.dim = flags.backend_dim;
  if (!flags.vectors_path.empty()) {
    cfg.backend.kind = "file";
    cfg.backend.path = flags.vectors_path;
  }
  if (cfg.backend.kind != "ngram" && cfg.backend.kind != "file") {
    throw minsum::ConfigError("backend kind must be 'ngram' or 'file'");
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meeting-minutes summarization pipeline"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load, clean, and index the minutes");
  CommonFlags ingest_flags;
  std::string ingest_minutes, ingest_out;
  std::vector<std::string> ingest_noise;
  add_common(ingest, ingest_flags);
  ingest->add_option("--minutes", ingest_minutes, "Raw minutes file (JSONL)");
  ingest->add_option("--noise", ingest_noise, "Noise literal to remove (repeatable)");
  ingest->add_option("--out", ingest_out, "Output corpus path");

  // build-triplets
  auto* build = app.add_subcommand("build-triplets", "Build training triplets from the corpus");
  CommonFlags build_flags;
  std::string build_corpus, build_out, build_report;
  double build_pos = -1.0, build_neg = -1.0;
  std::int64_t build_seed = -1;
  int build_attempts = 0;
  add_common(build, build_flags);
  build->add_option("--corpus", build_corpus, "Corpus path (default: <out_dir>/corpus.jsonl)");
  build->add_option("--pos-th", build_pos, "Positive cosine threshold");
  build->add_option("--neg-th", build_neg, "Negative cosine threshold");
  build->add_option("--seed", build_seed, "Negative-sampling seed");
  build->add_option("--max-attempts", build_attempts, "Negative draws per target");
  build->add_option("--out", build_out, "Output triplet path");
  build->add_option("--report", build_report, "Output build-report path");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the embedding adapter");
  CommonFlags train_flags;
  std::string train_corpus, train_triplets, train_out, train_report;
  double train_lr = 0.0, train_margin = -1.0, train_warmup = -1.0;
  int train_epochs = -1, train_batch = 0;
  std::int64_t train_seed = -1, train_split_seed = -1;
  add_common(train_cmd, train_flags);
  train_cmd->add_option("--corpus", train_corpus, "Corpus path");
  train_cmd->add_option("--triplets", train_triplets, "Triplet path");
  train_cmd->add_option("--epochs", train_epochs, "Training epochs");
  train_cmd->add_option("--batch", train_batch, "Batch size");
  train_cmd->add_option("--lr", train_lr, "Learning rate");
  train_cmd->add_option("--margin", train_margin, "Triplet-loss margin");
  train_cmd->add_option("--warmup", train_warmup, "Warm-up fraction of the first epoch");
  train_cmd->add_option("--seed", train_seed, "Training seed");
  train_cmd->add_option("--split-seed", train_split_seed, "80/10/10 split seed");
  train_cmd->add_option("--out", train_out, "Output model path");
  train_cmd->add_option("--report", train_report, "Output train-report path");

  // eval-embed
  auto* eval_cmd = app.add_subcommand("eval-embed", "Evaluate diff/accuracy over triplets");
  CommonFlags eval_flags;
  std::string eval_corpus, eval_triplets, eval_model, eval_split = "none", eval_out;
  std::int64_t eval_split_seed = -1;
  bool eval_strict = false;
  add_common(eval_cmd, eval_flags);
  eval_cmd->add_option("--corpus", eval_corpus, "Corpus path");
  eval_cmd->add_option("--triplets", eval_triplets, "Triplet path");
  eval_cmd->add_option("--model", eval_model, "Adapter model path (optional)");
  eval_cmd->add_option("--split", eval_split, "Evaluate on: none, train, dev, or test");
  eval_cmd->add_option("--split-seed", eval_split_seed, "80/10/10 split seed");
  eval_cmd->add_flag("--strict-ties", eval_strict, "Count only strictly positive diffs as correct");
  eval_cmd->add_option("--out", eval_out, "Output diff-report path");

  // summarize
  auto* sum_cmd = app.add_subcommand("summarize", "Produce summaries for the task records");
  CommonFlags sum_flags;
  std::string sum_corpus, sum_tasks, sum_model, sum_out, sum_scope;
  double sum_lambda = -1.0, sum_k = -10.0, sum_m = -10.0, sum_s = -10.0;
  int sum_cpk = 0;
  add_common(sum_cmd, sum_flags);
  sum_cmd->add_option("--corpus", sum_corpus, "Corpus path");
  sum_cmd->add_option("--tasks", sum_tasks, "Task file path");
  sum_cmd->add_option("--model", sum_model, "Adapter model path (optional)");
  sum_cmd->add_option("--lambda", sum_lambda, "Relevance/redundancy balance");
  sum_cmd->add_option("--k", sum_k, "Query-pair weight");
  sum_cmd->add_option("--m", sum_m, "Main-topic weight");
  sum_cmd->add_option("--s", sum_s, "Subtopic weight");
  sum_cmd->add_option("--chars-per-key", sum_cpk, "Characters per extracted utterance");
  sum_cmd->add_option("--query-scope", sum_scope, "Query average: pool or meeting");
  sum_cmd->add_option("--out", sum_out, "Output summaries path");

  // rouge
  auto* rouge_cmd = app.add_subcommand("rouge", "Score summaries against references");
  CommonFlags rouge_flags;
  std::string rouge_cands, rouge_refs, rouge_unit, rouge_out;
  add_common(rouge_cmd, rouge_flags);
  rouge_cmd->add_option("--candidates", rouge_cands, "Summaries file (JSONL)");
  rouge_cmd->add_option("--references", rouge_refs, "Task file with reference summaries");
  rouge_cmd->add_option("--unit", rouge_unit, "Counting unit: char or token");
  rouge_cmd->add_option("--out", rouge_out, "Output rouge-report path");

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run every stage in order");
  CommonFlags pipe_flags;
  std::string pipe_minutes, pipe_tasks, pipe_out_dir;
  add_common(pipe_cmd, pipe_flags);
  pipe_cmd->add_option("--minutes", pipe_minutes, "Raw minutes file (JSONL)");
  pipe_cmd->add_option("--tasks", pipe_tasks, "Task file path");
  pipe_cmd->add_option("--out-dir", pipe_out_dir, "Artifact directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      PipelineConfig cfg = build_config(ingest_flags);
      if (!ingest_noise.empty()) cfg.noise = ingest_noise;
      minsum::stage_ingest(cfg, ingest_minutes, ingest_out);
    } else if (build->parsed()) {
      PipelineConfig cfg = build_config(build_flags);
      if (build_pos >= 0.0) cfg.triplets.pos_threshold = build_pos;
      if (build_neg >= 0.0) cfg.triplets.neg_threshold = build_neg;
      if (build_seed >= 0) cfg.triplets.seed = static_cast<std::uint64_t>(build_seed);
      if (build_attempts > 0) cfg.triplets.max_attempts = build_attempts;
      const auto report = minsum::stage_build_triplets(cfg, build_corpus, build_out, build_report);
      std::cout << "emitted " << report.emitted << " triplets, skipped " << report.skipped << "\n";
    } else if (train_cmd->parsed()) {
      PipelineConfig cfg = build_config(train_flags);
      if (train_epochs >= 0) cfg.train.epochs = train_epochs;
      if (train_batch > 0) cfg.train.batch_size = train_batch;
      if (train_lr > 0.0) cfg.train.learning_rate = train_lr;
      if (train_margin >= 0.0) cfg.train.margin = train_margin;
      if (train_warmup >= 0.0) cfg.train.warmup_fraction = train_warmup;
      if (train_seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(train_seed);
      if (train_split_seed >= 0) cfg.split_seed = static_cast<std::uint64_t>(train_split_seed);
      const auto report =
          minsum::stage_train(cfg, train_corpus, train_triplets, train_out, train_report);
      std::cout << "best epoch " << report.best_epoch << ", dev accuracy "
                << report.best_dev_accuracy << "\n";
    } else if (eval_cmd->parsed()) {
      PipelineConfig cfg = build_config(eval_flags);
      if (eval_split_seed >= 0) cfg.split_seed = static_cast<std::uint64_t>(eval_split_seed);
      if (eval_strict) cfg.diff_strict = true;
      const auto report =
          minsum::stage_eval_embed(cfg, eval_corpus, eval_triplets, eval_model, eval_split, eval_out);
      std::cout << "n " << report.n << ", mean diff " << report.mean_diff << ", accuracy "
                << report.accuracy << "\n";
    } else if (sum_cmd->parsed()) {
      PipelineConfig cfg = build_config(sum_flags);
      if (sum_lambda >= 0.0) cfg.mmr.lambda = sum_lambda;
      if (sum_k > -10.0) cfg.mmr.k = sum_k;
      if (sum_m > -10.0) cfg.mmr.m = sum_m;
      if (sum_s > -10.0) cfg.mmr.s = sum_s;
      if (sum_cpk > 0) cfg.mmr.chars_per_key = sum_cpk;
      if (!sum_scope.empty()) cfg.query_scope = minsum::parse_query_scope(sum_scope);
      minsum::stage_summarize(cfg, sum_corpus, sum_tasks, sum_model, sum_out);
    } else if (rouge_cmd->parsed()) {
      PipelineConfig cfg = build_config(rouge_flags);
      if (!rouge_unit.empty()) cfg.rouge_unit = minsum::parse_rouge_unit(rouge_unit);
      const auto report = minsum::stage_rouge(cfg, rouge_cands, rouge_refs, rouge_out);
      std::cout << "pairs " << report["pairs_scored"] << ", mean recall " << report["mean_recall"]
                << "\n";
    } else if (pipe_cmd->parsed()) {
      PipelineConfig cfg = build_config(pipe_flags);
      if (!pipe_minutes.empty()) cfg.minutes = pipe_minutes;
      if (!pipe_tasks.empty()) cfg.tasks = pipe_tasks;
      if (!pipe_out_dir.empty()) cfg.out_dir = pipe_out_dir;
      minsum::run_pipeline(cfg);
    }
  } catch (const minsum::ConfigError& e) {
    std::cerr << "minsum: config error: " << e.what() << "\n";
    return 2;
  } catch (const minsum::DataError& e) {
    std::cerr << "minsum: data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "minsum: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
