#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "minsum/adapter.hpp"
#include "minsum/embedding.hpp"
#include "minsum/triplets.hpp"

namespace minsum {

struct DiffReport {
  std::vector<double> per_triplet_diff;
  double mean_diff = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;
};

// Per-triplet diff = cos(f(target), f(positive)) - cos(f(target), f(negative))
// in the (optionally adapted) embedding space. By default a diff of exactly
// zero counts as correct; pass count_ties_as_correct = false for the strict
// mode.
DiffReport eval_diff(const AdapterModel* model, const EmbeddingBackend& backend,
                     std::span<const Triplet> triplets, bool count_ties_as_correct = true);

enum class RougeUnit { character_unigram, token_unigram };

std::string_view rouge_unit_name(RougeUnit unit);
RougeUnit parse_rouge_unit(std::string_view name);

struct RougeReport {
  double recall = 0.0;
  std::size_t overlap_count = 0;
  std::size_t reference_count = 0;
  RougeUnit unit = RougeUnit::character_unigram;
};

// Clipped unigram overlap divided by the reference unigram count. Character
// mode counts code points, excluding whitespace; token mode counts
// whitespace-separated tokens. Noise literals are removed from both strings
// before counting. Empty reference (after extraction) -> ContractError;
// empty candidate -> recall 0.
RougeReport rouge1_recall(std::string_view candidate, std::string_view reference, RougeUnit unit,
                          std::span<const std::string> noise = {});

}  // namespace minsum
