#include "minsum/metrics.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "minsum/corpus.hpp"
#include "minsum/errors.hpp"
#include "minsum/utf8.hpp"

namespace minsum {

DiffReport eval_diff(const AdapterModel* model, const EmbeddingBackend& backend,
                     std::span<const Triplet> triplets, bool count_ties_as_correct) {
  if (triplets.empty()) throw ContractError("eval_diff: empty triplet list");

  const auto embed = [&](const Utterance& u) {
    EmbeddingVector v = backend.embed_keyed(u.id, u.text);
    return model != nullptr ? model->apply_unit(v) : v;
  };

  DiffReport report;
  report.n = triplets.size();
  report.per_triplet_diff.reserve(triplets.size());
  double sum = 0.0;
  std::size_t correct = 0;
  for (const Triplet& t : triplets) {
    const EmbeddingVector vt = embed(t.target);
    const double diff = cosine(vt, embed(t.positive)) - cosine(vt, embed(t.negative));
    report.per_triplet_diff.push_back(diff);
    sum += diff;
    if (count_ties_as_correct ? diff >= 0.0 : diff > 0.0) ++correct;
  }
  report.mean_diff = sum / static_cast<double>(report.n);
  report.accuracy = static_cast<double>(correct) / static_cast<double>(report.n);
  return report;
}

std::string_view rouge_unit_name(RougeUnit unit) {
  return unit == RougeUnit::character_unigram ? "char" : "token";
}

RougeUnit parse_rouge_unit(std::string_view name) {
  if (name == "char" || name == "character-unigram") return RougeUnit::character_unigram;
  if (name == "token" || name == "token-unigram") return RougeUnit::token_unigram;
  throw ConfigError("unknown rouge unit '" + std::string(name) + "' (expected char or token)");
}

namespace {

std::unordered_map<char32_t, std::size_t> char_counts(std::string_view s) {
  std::unordered_map<char32_t, std::size_t> counts;
  for (char32_t c : utf8_decode(s)) {
    if (!is_space_cp(c)) ++counts[c];
  }
  return counts;
}

std::map<std::string, std::size_t> token_counts(std::string_view s) {
  std::map<std::string, std::size_t> counts;
  std::vector<char32_t> current;
  const auto flush = [&] {
    if (!current.empty()) {
      ++counts[utf8_encode(current)];
      current.clear();
    }
  };
  for (char32_t c : utf8_decode(s)) {
    if (is_space_cp(c)) {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  return counts;
}

template <typename Map>
RougeReport clipped_recall(const Map& cand, const Map& ref, RougeUnit unit) {
  RougeReport report;
  report.unit = unit;
  for (const auto& [unigram, ref_count] : ref) {
    report.reference_count += ref_count;
    const auto it = cand.find(unigram);
    if (it != cand.end()) report.overlap_count += std::min(ref_count, it->second);
  }
  if (report.reference_count == 0) {
    throw ContractError("rouge1_recall: reference is empty after unit extraction");
  }
  report.recall =
      static_cast<double>(report.overlap_count) / static_cast<double>(report.reference_count);
  return report;
}

}  // namespace

RougeReport rouge1_recall(std::string_view candidate, std::string_view reference, RougeUnit unit,
                          std::span<const std::string> noise) {
  const std::string cand = clean_text(candidate, noise);
  const std::string ref = clean_text(reference, noise);
  if (unit == RougeUnit::character_unigram) {
    return clipped_recall(char_counts(cand), char_counts(ref), unit);
  }
  return clipped_recall(token_counts(cand), token_counts(ref), unit);
}

}  // namespace minsum
