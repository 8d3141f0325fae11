#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minsum/adapter.hpp"
#include "minsum/corpus.hpp"
#include "minsum/embedding.hpp"

namespace minsum {

struct MmrConfig {
  double lambda = 0.5;  // relevance/redundancy balance inside the k term
  double k = 0.2;       // weight of the query/redundancy pair
  double m = 0.3;       // weight of the main-topic similarity
  double s = 0.5;       // weight of the subtopic similarity
  int chars_per_key = 50;
};

// Whether the query vector averages the candidate pool or the whole meeting.
enum class QueryScope { pool, meeting };

std::string_view query_scope_name(QueryScope scope);
QueryScope parse_query_scope(std::string_view name);

// Number of utterances to extract for a character budget:
// ceil(length / chars_per_key), at least 1.
int key_size(int length, int chars_per_key = 50);

struct SelectionCandidate {
  std::string id;
  std::int64_t seq = 0;
  std::string text;
  EmbeddingVector vec;
};

struct SelectionState {
  std::vector<SelectionCandidate> pool;  // R, in seq order
  std::vector<std::size_t> selected;     // S, in selection order
  std::vector<double> selected_scores;   // score of each selection when chosen
  EmbeddingVector query;                 // Q
  std::optional<EmbeddingVector> mt_vec;
  std::optional<EmbeddingVector> st_vec;
};

// k * (lambda * cos(D_i, Q) - (1 - lambda) * max_{j in S} cos(D_i, D_j))
//   + m * cos(D_i, MT) + s * cos(D_i, ST)
// The redundancy term is 0 while S is empty; absent topic vectors
// contribute 0.
double mmr_score(const SelectionState& state, std::size_t i, const MmrConfig& cfg);

// Builds a state over pre-embedded candidates. Sorts the pool by seq; the
// query defaults to the normalized mean of the pool vectors.
SelectionState make_selection_state(std::vector<SelectionCandidate> pool,
                                    std::optional<EmbeddingVector> query,
                                    std::optional<EmbeddingVector> mt_vec,
                                    std::optional<EmbeddingVector> st_vec);

// Greedy arg-max selection of up to n candidates; ties go to the lowest seq.
void greedy_select(SelectionState& state, int n, const MmrConfig& cfg);

// Embeds the pool and topics (main topic split on the literal "<br>" and
// averaged), then runs greedy selection.
SelectionState select(std::span<const Utterance* const> pool, std::string_view main_topic,
                      std::string_view subtopic, int n, const EmbeddingBackend& backend,
                      const AdapterModel* model, const MmrConfig& cfg);

struct RoleSummary {
  std::string text;
  std::vector<std::string> selected_ids;  // ids composing text, in seq order
  std::vector<double> scores;             // their selection scores
  bool no_candidates = false;
};

struct SummaryOutput {
  std::string task_id;
  RoleSummary question;
  RoleSummary answer;
};

// Selects for both roles, joins the chosen texts in seq order with "/",
// drops whole selections from the end while over budget, and finally
// hard-truncates to the budget (counted in code points).
SummaryOutput summarize_task(const Corpus& corpus, const SummaryTask& task,
                             const EmbeddingBackend& backend, const AdapterModel* model,
                             const MmrConfig& cfg, QueryScope scope = QueryScope::pool);

}  // namespace minsum
