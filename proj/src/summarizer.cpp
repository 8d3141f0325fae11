#include "minsum/summarizer.hpp"

#include <algorithm>

#include "minsum/errors.hpp"
#include "minsum/utf8.hpp"

namespace minsum {

std::string_view query_scope_name(QueryScope scope) {
  return scope == QueryScope::pool ? "pool" : "meeting";
}

QueryScope parse_query_scope(std::string_view name) {
  if (name == "pool") return QueryScope::pool;
  if (name == "meeting") return QueryScope::meeting;
  throw ConfigError("unknown query scope '" + std::string(name) + "' (expected pool or meeting)");
}

int key_size(int length, int chars_per_key) {
  if (length < 1) throw ContractError("key_size: length must be positive");
  if (chars_per_key < 1) throw ContractError("key_size: chars_per_key must be positive");
  return std::max(1, (length + chars_per_key - 1) / chars_per_key);
}

double mmr_score(const SelectionState& state, std::size_t i, const MmrConfig& cfg) {
  if (i >= state.pool.size()) throw ContractError("mmr_score: candidate index out of range");
  if (std::find(state.selected.begin(), state.selected.end(), i) != state.selected.end()) {
    throw ContractError("mmr_score: candidate already selected");
  }
  const EmbeddingVector& v = state.pool[i].vec;
  const double relevance = cosine(v, state.query);
  double redundancy = 0.0;  // max over the empty set
  for (std::size_t j : state.selected) {
    redundancy = std::max(redundancy, cosine(v, state.pool[j].vec));
  }
  double score = cfg.k * (cfg.lambda * relevance - (1.0 - cfg.lambda) * redundancy);
  if (state.mt_vec) score += cfg.m * cosine(v, *state.mt_vec);
  if (state.st_vec) score += cfg.s * cosine(v, *state.st_vec);
  return score;
}

SelectionState make_selection_state(std::vector<SelectionCandidate> pool,
                                    std::optional<EmbeddingVector> query,
                                    std::optional<EmbeddingVector> mt_vec,
                                    std::optional<EmbeddingVector> st_vec) {
  if (pool.empty()) throw ContractError("selection pool is empty");
  std::sort(pool.begin(), pool.end(), [](const SelectionCandidate& a, const SelectionCandidate& b) {
    return std::tie(a.seq, a.id) < std::tie(b.seq, b.id);
  });
  SelectionState state;
  state.pool = std::move(pool);
  if (query) {
    state.query = std::move(*query);
  } else {
    std::vector<EmbeddingVector> vecs;
    vecs.reserve(state.pool.size());
    for (const auto& c : state.pool) vecs.push_back(c.vec);
    state.query = mean_vector(vecs);
  }
  state.mt_vec = std::move(mt_vec);
  state.st_vec = std::move(st_vec);
  return state;
}

void greedy_select(SelectionState& state, int n, const MmrConfig& cfg) {
  if (n < 1) throw ContractError("greedy_select: n must be positive");
  const std::size_t target = std::min<std::size_t>(static_cast<std::size_t>(n), state.pool.size());
  std::vector<char> used(state.pool.size(), 0);
  for (std::size_t j : state.selected) used[j] = 1;
  while (state.selected.size() < target) {
    std::size_t best = state.pool.size();
    double best_score = 0.0;
    for (std::size_t i = 0; i < state.pool.size(); ++i) {
      if (used[i]) continue;
      const double score = mmr_score(state, i, cfg);
      if (best == state.pool.size() || score > best_score) {  // ties keep the lowest seq
        best = i;
        best_score = score;
      }
    }
    state.selected.push_back(best);
    state.selected_scores.push_back(best_score);
    used[best] = 1;
  }
}

namespace {

EmbeddingVector embed_text(const EmbeddingBackend& backend, const AdapterModel* model,
                           std::string_view text) {
  EmbeddingVector v = backend.embed(text);
  return model != nullptr ? model->apply_unit(v) : v;
}

EmbeddingVector embed_keyed(const EmbeddingBackend& backend, const AdapterModel* model,
                            std::string_view key, std::string_view text) {
  EmbeddingVector v = backend.embed_keyed(key, text);
  return model != nullptr ? model->apply_unit(v) : v;
}

// Main topic segments are separated by the literal "<br>"; each segment is
// embedded separately and the vectors averaged.
std::optional<EmbeddingVector> embed_topic(const EmbeddingBackend& backend,
                                           const AdapterModel* model, std::string_view topic) {
  std::vector<EmbeddingVector> parts;
  std::size_t pos = 0;
  while (pos <= topic.size()) {
    const std::size_t next = topic.find("<br>", pos);
    const std::string_view segment =
        topic.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
    const std::string trimmed = normalize_whitespace(segment);
    if (!trimmed.empty()) parts.push_back(embed_text(backend, model, trimmed));
    if (next == std::string_view::npos) break;
    pos = next + 4;
  }
  if (parts.empty()) return std::nullopt;
  if (parts.size() == 1) return parts.front();
  return mean_vector(parts);
}

}  // namespace

SelectionState select(std::span<const Utterance* const> pool, std::string_view main_topic,
                      std::string_view subtopic, int n, const EmbeddingBackend& backend,
                      const AdapterModel* model, const MmrConfig& cfg) {
  if (pool.empty()) throw ContractError("select: empty candidate pool");
  std::vector<SelectionCandidate> candidates;
  candidates.reserve(pool.size());
  for (const Utterance* u : pool) {
    candidates.push_back(
        SelectionCandidate{u->id, u->seq, u->text, embed_keyed(backend, model, u->id, u->text)});
  }
  SelectionState state =
      make_selection_state(std::move(candidates), std::nullopt, embed_topic(backend, model, main_topic),
                           embed_topic(backend, model, subtopic));
  greedy_select(state, n, cfg);
  return state;
}

namespace {

RoleSummary summarize_role(const Corpus& corpus, const SummaryTask& task, TaskRole role,
                           const EmbeddingBackend& backend, const AdapterModel* model,
                           const MmrConfig& cfg, QueryScope scope) {
  RoleSummary out;
  const std::vector<const Utterance*> pool = candidate_pool(corpus, task, role);
  if (pool.empty()) {
    out.no_candidates = true;
    return out;
  }
  const int budget = role == TaskRole::question ? task.question_length : task.answer_length;
  const int n = key_size(budget, cfg.chars_per_key);

  std::vector<SelectionCandidate> candidates;
  candidates.reserve(pool.size());
  for (const Utterance* u : pool) {
    candidates.push_back(
        SelectionCandidate{u->id, u->seq, u->text, embed_keyed(backend, model, u->id, u->text)});
  }

  std::optional<EmbeddingVector> query;
  if (scope == QueryScope::meeting) {
    const auto [lo, hi] = corpus.meeting_range(MeetingKey{task.date, task.meeting});
    std::vector<EmbeddingVector> vecs;
    vecs.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      const Utterance& u = corpus.utterances()[i];
      vecs.push_back(embed_keyed(backend, model, u.id, u.text));
    }
    query = mean_vector(vecs);
  }

  SelectionState state =
      make_selection_state(std::move(candidates), std::move(query),
                           embed_topic(backend, model, task.main_topic),
                           embed_topic(backend, model, task.subtopic));
  greedy_select(state, n, cfg);

  // Selections in original utterance order, with their selection scores.
  struct Pick {
    std::size_t pool_index;
    double score;
  };
  std::vector<Pick> picks;
  picks.reserve(state.selected.size());
  for (std::size_t k = 0; k < state.selected.size(); ++k) {
    picks.push_back(Pick{state.selected[k], state.selected_scores[k]});
  }
  std::sort(picks.begin(), picks.end(),
            [](const Pick& a, const Pick& b) { return a.pool_index < b.pool_index; });

  const auto joined_length = [&](std::size_t count) {
    std::size_t len = count > 1 ? count - 1 : 0;  // "/" separators
    for (std::size_t k = 0; k < count; ++k) {
      len += codepoint_count(state.pool[picks[k].pool_index].text);
    }
    return len;
  };

  std::size_t keep = picks.size();
  while (keep > 1 && joined_length(keep) > static_cast<std::size_t>(budget)) --keep;
  picks.resize(keep);

  std::string joined;
  for (std::size_t k = 0; k < picks.size(); ++k) {
    if (k > 0) joined += "/";
    joined += state.pool[picks[k].pool_index].text;
    out.selected_ids.push_back(state.pool[picks[k].pool_index].id);
    out.scores.push_back(picks[k].score);
  }
  if (codepoint_count(joined) > static_cast<std::size_t>(budget)) {
    joined = truncate_codepoints(joined, static_cast<std::size_t>(budget));
  }
  out.text = std::move(joined);
  return out;
}

}  // namespace

SummaryOutput summarize_task(const Corpus& corpus, const SummaryTask& task,
                             const EmbeddingBackend& backend, const AdapterModel* model,
                             const MmrConfig& cfg, QueryScope scope) {
  SummaryOutput out;
  out.task_id = task.id;
  out.question = summarize_role(corpus, task, TaskRole::question, backend, model, cfg, scope);
  out.answer = summarize_role(corpus, task, TaskRole::answer, backend, model, cfg, scope);
  return out;
}

}  // namespace minsum
