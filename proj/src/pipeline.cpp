#include "minsum/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include "minsum/errors.hpp"
#include "minsum/rng.hpp"
#include "minsum/utf8.hpp"

namespace minsum {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown config key '" + key + "' in " + context);
    }
  }
}

template <typename T>
T get_value(const json& obj, const char* key, T fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + std::string(key) + "' in " + context + " has a bad type");
  }
}

BackendSpec parse_backend(const json& j) {
  BackendSpec spec;
  if (j.is_null()) return spec;
  if (!j.is_object()) throw ConfigError("'backend' must be an object");
  check_keys(j, {"kind", "dim", "path"}, "backend");
  spec.kind = get_value<std::string>(j, "kind", spec.kind, "backend");
  spec.dim = get_value<int>(j, "dim", spec.dim, "backend");
  spec.path = get_value<std::string>(j, "path", spec.path, "backend");
  if (spec.kind != "ngram" && spec.kind != "file") {
    throw ConfigError("backend kind must be 'ngram' or 'file', got '" + spec.kind + "'");
  }
  if (spec.kind == "ngram" && spec.dim <= 0) throw ConfigError("backend dim must be positive");
  if (spec.kind == "file" && spec.path.empty()) {
    throw ConfigError("backend kind 'file' requires 'path'");
  }
  return spec;
}

TripletBuildConfig parse_triplet_cfg(const json& j) {
  TripletBuildConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw ConfigError("'triplets' must be an object");
  check_keys(j, {"pos_threshold", "neg_threshold", "seed", "max_attempts"}, "triplets");
  cfg.pos_threshold = get_value<double>(j, "pos_threshold", cfg.pos_threshold, "triplets");
  cfg.neg_threshold = get_value<double>(j, "neg_threshold", cfg.neg_threshold, "triplets");
  cfg.seed = get_value<std::uint64_t>(j, "seed", cfg.seed, "triplets");
  cfg.max_attempts = get_value<int>(j, "max_attempts", cfg.max_attempts, "triplets");
  if (cfg.max_attempts <= 0) throw ConfigError("triplets.max_attempts must be positive");
  return cfg;
}

TrainConfig parse_train_cfg(const json& j) {
  TrainConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw ConfigError("'train' must be an object");
  check_keys(j, {"margin", "batch_size", "learning_rate", "epochs", "warmup_fraction", "seed"},
             "train");
  cfg.margin = get_value<double>(j, "margin", cfg.margin, "train");
  cfg.batch_size = get_value<int>(j, "batch_size", cfg.batch_size, "train");
  cfg.learning_rate = get_value<double>(j, "learning_rate", cfg.learning_rate, "train");
  cfg.epochs = get_value<int>(j, "epochs", cfg.epochs, "train");
  cfg.warmup_fraction = get_value<double>(j, "warmup_fraction", cfg.warmup_fraction, "train");
  cfg.seed = get_value<std::uint64_t>(j, "seed", cfg.seed, "train");
  if (cfg.margin < 0.0) throw ConfigError("train.margin must be non-negative");
  if (cfg.batch_size < 1) throw ConfigError("train.batch_size must be positive");
  if (cfg.learning_rate <= 0.0) throw ConfigError("train.learning_rate must be positive");
  if (cfg.epochs < 0) throw ConfigError("train.epochs must be non-negative");
  if (cfg.warmup_fraction < 0.0 || cfg.warmup_fraction > 1.0) {
    throw ConfigError("train.warmup_fraction must be in [0, 1]");
  }
  return cfg;
}

MmrConfig parse_mmr_cfg(const json& j) {
  MmrConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw ConfigError("'mmr' must be an object");
  check_keys(j, {"lambda", "k", "m", "s", "chars_per_key"}, "mmr");
  cfg.lambda = get_value<double>(j, "lambda", cfg.lambda, "mmr");
  cfg.k = get_value<double>(j, "k", cfg.k, "mmr");
  cfg.m = get_value<double>(j, "m", cfg.m, "mmr");
  cfg.s = get_value<double>(j, "s", cfg.s, "mmr");
  cfg.chars_per_key = get_value<int>(j, "chars_per_key", cfg.chars_per_key, "mmr");
  if (cfg.lambda < 0.0 || cfg.lambda > 1.0) throw ConfigError("mmr.lambda must be in [0, 1]");
  if (cfg.chars_per_key < 1) throw ConfigError("mmr.chars_per_key must be positive");
  return cfg;
}

}  // namespace

PipelineConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j,
             {"minutes", "tasks", "out_dir", "noise", "backend", "triplets", "split_seed", "train",
              "mmr", "query_scope", "rouge_unit", "diff_strict"},
             "config");
  PipelineConfig cfg;
  cfg.minutes = get_value<std::string>(j, "minutes", cfg.minutes, "config");
  cfg.tasks = get_value<std::string>(j, "tasks", cfg.tasks, "config");
  cfg.out_dir = get_value<std::string>(j, "out_dir", cfg.out_dir, "config");
  if (j.contains("noise")) {
    if (!j["noise"].is_array()) throw ConfigError("'noise' must be an array of strings");
    cfg.noise.clear();
    for (const auto& item : j["noise"]) {
      if (!item.is_string()) throw ConfigError("'noise' must be an array of strings");
      cfg.noise.push_back(item.get<std::string>());
    }
  }
  cfg.backend = parse_backend(j.value("backend", json()));
  cfg.triplets = parse_triplet_cfg(j.value("triplets", json()));
  cfg.split_seed = get_value<std::uint64_t>(j, "split_seed", cfg.split_seed, "config");
  cfg.train = parse_train_cfg(j.value("train", json()));
  cfg.mmr = parse_mmr_cfg(j.value("mmr", json()));
  cfg.query_scope = parse_query_scope(get_value<std::string>(
      j, "query_scope", std::string(query_scope_name(cfg.query_scope)), "config"));
  cfg.rouge_unit = parse_rouge_unit(
      get_value<std::string>(j, "rouge_unit", std::string(rouge_unit_name(cfg.rouge_unit)), "config"));
  cfg.diff_strict = get_value<bool>(j, "diff_strict", cfg.diff_strict, "config");
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return parse_config(j);
}

json config_to_json(const PipelineConfig& cfg) {
  return json{{"minutes", cfg.minutes},
              {"tasks", cfg.tasks},
              {"out_dir", cfg.out_dir},
              {"noise", cfg.noise},
              {"backend", {{"kind", cfg.backend.kind}, {"dim", cfg.backend.dim}, {"path", cfg.backend.path}}},
              {"triplets",
               {{"pos_threshold", cfg.triplets.pos_threshold},
                {"neg_threshold", cfg.triplets.neg_threshold},
                {"seed", cfg.triplets.seed},
                {"max_attempts", cfg.triplets.max_attempts}}},
              {"split_seed", cfg.split_seed},
              {"train", cfg.train.to_json()},
              {"mmr",
               {{"lambda", cfg.mmr.lambda},
                {"k", cfg.mmr.k},
                {"m", cfg.mmr.m},
                {"s", cfg.mmr.s},
                {"chars_per_key", cfg.mmr.chars_per_key}}},
              {"query_scope", std::string(query_scope_name(cfg.query_scope))},
              {"rouge_unit", std::string(rouge_unit_name(cfg.rouge_unit))},
              {"diff_strict", cfg.diff_strict}};
}

std::string config_hash(const PipelineConfig& cfg) {
  const std::uint64_t h = fnv1a64(config_to_json(cfg).dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::unique_ptr<EmbeddingBackend> make_backend(const BackendSpec& spec) {
  if (spec.kind == "ngram") return std::make_unique<NgramBackend>(spec.dim);
  if (spec.kind == "file") {
    return std::make_unique<PrecomputedBackend>(PrecomputedBackend::load(spec.path));
  }
  throw ConfigError("unknown backend kind '" + spec.kind + "'");
}

ArtifactPaths artifact_paths(const std::string& out_dir) {
  const auto join = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };
  return ArtifactPaths{join("corpus.jsonl"),     join("triplets.jsonl"),
                       join("triplet_report.json"), join("model.json"),
                       join("train_report.json"),   join("diff_report.json"),
                       join("summaries.jsonl"),     join("rouge_report.json")};
}

namespace {

json provenance(const PipelineConfig& cfg, std::uint64_t seed) {
  return json{{"config_hash", config_hash(cfg)}, {"seed", seed}};
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

std::string or_default(const std::string& value, const std::string& fallback) {
  return value.empty() ? fallback : value;
}

void ensure_parent_dir(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

Corpus load_corpus_from(const PipelineConfig& cfg, const std::string& corpus_path) {
  return load_corpus(corpus_path, cfg.noise);
}

// Loads the adapter when a model path is given and checks it against the
// backend dimension.
std::unique_ptr<AdapterModel> maybe_load_model(const std::string& model_path,
                                               const EmbeddingBackend& backend) {
  if (model_path.empty()) return nullptr;
  SavedModel sm = load_model(model_path);
  if (sm.model.in_dim != backend.dim()) {
    throw DataError("model expects input dimension " + std::to_string(sm.model.in_dim) +
                    " but backend '" + backend.name() + "' has dimension " +
                    std::to_string(backend.dim()));
  }
  return std::make_unique<AdapterModel>(std::move(sm.model));
}

}  // namespace

void stage_ingest(const PipelineConfig& cfg, const std::string& minutes_path,
                  const std::string& out_corpus) {
  const ArtifactPaths paths = artifact_paths(cfg.out_dir);
  const std::string in = or_default(minutes_path, cfg.minutes);
  const std::string out = or_default(out_corpus, paths.corpus);
  if (in.empty()) throw ConfigError("ingest: no minutes path configured");
  const Corpus corpus = load_corpus(in, cfg.noise);
  ensure_parent_dir(out);
  save_corpus(out, corpus, provenance(cfg, 0));
}

BuildReport stage_build_triplets(const PipelineConfig& cfg, const std::string& corpus_path,
                                 const std::string& out_triplets, const std::string& out_report) {
  const ArtifactPaths paths = artifact_paths(cfg.out_dir);
  const Corpus corpus = load_corpus_from(cfg, or_default(corpus_path, paths.corpus));
  const auto backend = make_backend(cfg.backend);
  BuildResult result =
      build_triplets(corpus, *backend, cfg.triplets.pos_threshold, cfg.triplets.neg_threshold,
                     cfg.triplets.seed, cfg.triplets.max_attempts);

  const std::string triplet_path = or_default(out_triplets, paths.triplets);
  ensure_parent_dir(triplet_path);
  save_triplets(triplet_path, result.triplets, provenance(cfg, cfg.triplets.seed));

  json report = result.report.to_json();
  report["provenance"] = provenance(cfg, cfg.triplets.seed);
  const std::string report_path = or_default(out_report, paths.triplet_report);
  ensure_parent_dir(report_path);
  write_json(report_path, report);
  return result.report;
}

TrainReport stage_train(const PipelineConfig& cfg, const std::string& corpus_path,
                        const std::string& triplets_path, const std::string& out_model,
                        const std::string& out_report) {
  const ArtifactPaths paths = artifact_paths(cfg.out_dir);
  const Corpus corpus = load_corpus_from(cfg, or_default(corpus_path, paths.corpus));
  const auto backend = make_backend(cfg.backend);
  std::vector<Triplet> triplets = load_triplets(or_default(triplets_path, paths.triplets), corpus);
  const TripletSplit split = split_triplets(std::move(triplets), cfg.split_seed);
  TrainOutcome outcome = train(split, *backend, cfg.train);

  const std::string model_path = or_default(out_model, paths.model);
  ensure_parent_dir(model_path);
  save_model(model_path, outcome.model, backend->name(), cfg.train.to_json(),
             provenance(cfg, cfg.train.seed));

  json report = outcome.report.to_json();
  report["split_seed"] = cfg.split_seed;
  report["split_sizes"] = json{{"train", split.train.size()},
                               {"dev", split.dev.size()},
                               {"test", split.test.size()}};
  report["provenance"] = provenance(cfg, cfg.train.seed);
  const std::string report_path = or_default(out_report, paths.train_report);
  ensure_parent_dir(report_path);
  write_json(report_path, report);
  return outcome.report;
}

DiffReport stage_eval_embed(const PipelineConfig& cfg, const std::string& corpus_path,
                            const std::string& triplets_path, const std::string& model_path,
                            const std::string& split_name, const std::string& out_report) {
  const ArtifactPaths paths = artifact_paths(cfg.out_dir);
  const Corpus corpus = load_corpus_from(cfg, or_default(corpus_path, paths.corpus));
  const auto backend = make_backend(cfg.backend);
  std::vector<Triplet> triplets = load_triplets(or_default(triplets_path, paths.triplets), corpus);

  std::string split = split_name.empty() ? "none" : split_name;
  if (split != "none") {
    TripletSplit s = split_triplets(std::move(triplets), cfg.split_seed);
    if (split == "train") {
      triplets = std::move(s.train);
    } else if (split == "dev") {
      triplets = std::move(s.dev);
    } else if (split == "test") {
      triplets = std::move(s.test);
    } else {
      throw ConfigError("unknown split '" + split + "' (expected none, train, dev, or test)");
    }
    if (triplets.empty()) throw DataError("split '" + split + "' contains no triplets");
  }

  const auto model = maybe_load_model(model_path, *backend);
  const DiffReport report = eval_diff(model.get(), *backend, triplets, !cfg.diff_strict);

  json j{{"n", report.n},
         {"mean_diff", report.mean_diff},
         {"accuracy", report.accuracy},
         {"per_triplet_diff", report.per_triplet_diff},
         {"backend", backend->name()},
         {"model", model_path},
         {"split", split},
         {"count_ties_as_correct", !cfg.diff_strict},
         {"provenance", provenance(cfg, cfg.split_seed)}};
  const std::string report_path = or_default(out_report, paths.diff_report);
  ensure_parent_dir(report_path);
  write_json(report_path, j);
  return report;
}

void stage_summarize(const PipelineConfig& cfg, const std::string& corpus_path,
                     const std::string& tasks_path, const std::string& model_path,
                     const std::string& out_summaries) {
  const ArtifactPaths paths = artifact_paths(cfg.out_dir);
  const Corpus corpus = load_corpus_from(cfg, or_default(corpus_path, paths.corpus));
  const std::string tasks_file = or_default(tasks_path, cfg.tasks);
  if (tasks_file.empty()) throw ConfigError("summarize: no tasks path configured");
  const std::vector<SummaryTask> tasks = load_tasks(tasks_file);
  const auto backend = make_backend(cfg.backend);
  const auto model = maybe_load_model(model_path, *backend);

  const std::string out = or_default(out_summaries, paths.summaries);
  ensure_parent_dir(out);
  std::ofstream file(out, std::ios::binary);
  if (!file) throw DataError("cannot write summaries file: " + out);
  file << json{{"meta", provenance(cfg, 0)}}.dump() << "\n";
  for (const SummaryTask& task : tasks) {
    const SummaryOutput s =
        summarize_task(corpus, task, *backend, model.get(), cfg.mmr, cfg.query_scope);
    json flags = json::array();
    if (s.question.no_candidates) flags.push_back("question_no_candidates");
    if (s.answer.no_candidates) flags.push_back("answer_no_candidates");
    file << json{{"task_id", s.task_id},
                 {"question_summary", s.question.text},
                 {"answer_summary", s.answer.text},
                 {"selected_ids",
                  {{"question", s.question.selected_ids}, {"answer", s.answer.selected_ids}}},
                 {"scores", {{"question", s.question.scores}, {"answer", s.answer.scores}}},
                 {"flags", flags}}
                .dump()
         << "\n";
  }
}

json stage_rouge(const PipelineConfig& cfg, const std::string& candidates_path,
                 const std::string& references_path, const std::string& out_report) {
  const ArtifactPaths paths = artifact_paths(cfg.out_dir);
  const std::string cand_path = or_default(candidates_path, paths.summaries);
  const std::string ref_path = or_default(references_path, cfg.tasks);
  if (ref_path.empty()) throw ConfigError("rouge: no references path configured");

  std::map<std::string, SummaryTask> tasks_by_id;
  for (SummaryTask& t : load_tasks(ref_path)) tasks_by_id.emplace(t.id, std::move(t));

  std::ifstream in(cand_path, std::ios::binary);
  if (!in) throw DataError("cannot open candidates file: " + cand_path);

  json per_task = json::array();
  double recall_sum = 0.0;
  std::size_t pairs_scored = 0;
  std::size_t pairs_skipped = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("candidates parse error at line " + std::to_string(lineno) + ": " + e.what());
    }
    if (rec.is_object() && rec.contains("meta")) continue;
    if (!rec.is_object() || !rec.contains("task_id")) {
      throw DataError("candidates line " + std::to_string(lineno) + ": expected a summary record");
    }
    const std::string task_id = rec["task_id"].get<std::string>();
    const auto it = tasks_by_id.find(task_id);
    if (it == tasks_by_id.end()) {
      throw DataError("candidates line " + std::to_string(lineno) + ": unknown task id '" +
                      task_id + "'");
    }
    json entry{{"id", task_id}};
    const auto score_role = [&](const char* cand_field, const std::optional<std::string>& ref,
                                const char* out_field) {
      if (!ref.has_value() || clean_text(*ref, cfg.noise).empty()) {
        ++pairs_skipped;
        entry[out_field] = nullptr;
        return;
      }
      const std::string candidate = rec.value(cand_field, std::string());
      const RougeReport r = rouge1_recall(candidate, *ref, cfg.rouge_unit, cfg.noise);
      entry[out_field] = r.recall;
      recall_sum += r.recall;
      ++pairs_scored;
    };
    score_role("question_summary", it->second.question_summary, "question_recall");
    score_role("answer_summary", it->second.answer_summary, "answer_recall");
    per_task.push_back(std::move(entry));
  }

  json report{{"unit", std::string(rouge_unit_name(cfg.rouge_unit))},
              {"per_task", per_task},
              {"pairs_scored", pairs_scored},
              {"pairs_skipped", pairs_skipped},
              {"mean_recall", pairs_scored > 0 ? recall_sum / static_cast<double>(pairs_scored) : 0.0},
              {"provenance", provenance(cfg, 0)}};
  const std::string report_path = or_default(out_report, paths.rouge_report);
  ensure_parent_dir(report_path);
  write_json(report_path, report);
  return report;
}

namespace {

template <typename Fn>
void run_stage(const char* name, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError("stage " + std::string(name) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("stage " + std::string(name) + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError("stage " + std::string(name) + ": " + e.what());
  } catch (const ContractError& e) {
    throw ContractError("stage " + std::string(name) + ": " + e.what());
  }
}

}  // namespace

void run_pipeline(const PipelineConfig& cfg) {
  const ArtifactPaths paths = artifact_paths(cfg.out_dir);
  std::filesystem::create_directories(cfg.out_dir);
  run_stage("ingest", [&] { stage_ingest(cfg, "", ""); });
  run_stage("build-triplets", [&] { stage_build_triplets(cfg, "", "", ""); });
  run_stage("train", [&] { stage_train(cfg, "", "", "", ""); });
  run_stage("eval-embed", [&] { stage_eval_embed(cfg, "", "", paths.model, "test", ""); });
  run_stage("summarize", [&] { stage_summarize(cfg, "", "", paths.model, ""); });
  run_stage("rouge", [&] { stage_rouge(cfg, "", "", ""); });
}

}  // namespace minsum
