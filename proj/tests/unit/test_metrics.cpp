#include "minsum/metrics.hpp"

#include <cmath>
#include <map>

#include <doctest.h>

#include "minsum/errors.hpp"
#include "minsum/rng.hpp"
#include "minsum/utf8.hpp"
#include "../support/fixtures.hpp"

using namespace minsum;
using testsupport::utt;

namespace {

// Triplet whose planted cosines are (cos(t,p), cos(t,n)).
std::pair<std::vector<Triplet>, PrecomputedBackend> planted_triplets(
    const std::vector<std::pair<double, double>>& cosines) {
  std::vector<std::pair<std::string, std::vector<double>>> entries;
  std::vector<Triplet> triplets;
  for (std::size_t i = 0; i < cosines.size(); ++i) {
    const auto [cp, cn] = cosines[i];
    const std::string tag = std::to_string(i);
    entries.push_back({"t" + tag, {1.0, 0.0}});
    entries.push_back({"p" + tag, {cp, std::sqrt(1.0 - cp * cp)}});
    entries.push_back({"n" + tag, {cn, std::sqrt(1.0 - cn * cn)}});
    Triplet t;
    t.target = utt("t" + tag, 0, "d1", "m1", "s", "対象");
    t.positive = utt("p" + tag, 1, "d1", "m1", "s", "正例");
    t.negative = utt("n" + tag, 0, "d2", "m2", "s", "負例");
    triplets.push_back(std::move(t));
  }
  return {std::move(triplets), testsupport::planted_backend(entries)};
}

// Naive counting oracle for character-unigram recall.
double naive_char_recall(const std::string& candidate, const std::string& reference) {
  const auto count = [](const std::string& s) {
    std::map<char32_t, std::size_t> counts;
    for (char32_t c : utf8_decode(s)) {
      if (!is_space_cp(c)) ++counts[c];
    }
    return counts;
  };
  const auto cand = count(candidate);
  const auto ref = count(reference);
  std::size_t overlap = 0, total = 0;
  for (const auto& [c, n] : ref) {
    total += n;
    const auto it = cand.find(c);
    if (it != cand.end()) overlap += std::min(n, it->second);
  }
  return static_cast<double>(overlap) / static_cast<double>(total);
}

std::string random_text(Rng& rng, std::size_t max_len) {
  static const std::vector<std::string> kAlphabet = {"a", "b", "あ", "い"};
  std::string out;
  const std::size_t len = rng.below(max_len + 1);
  for (std::size_t i = 0; i < len; ++i) out += kAlphabet[rng.below(kAlphabet.size())];
  return out;
}

}  // namespace

TEST_CASE("eval_diff hand-planted cosines") {
  const auto [triplets, backend] =
      planted_triplets({{0.9, 0.1}, {0.5, 0.5}, {0.2, 0.6}});
  const DiffReport report = eval_diff(nullptr, backend, triplets);
  REQUIRE(report.n == 3);
  CHECK(report.per_triplet_diff[0] == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(report.per_triplet_diff[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(report.per_triplet_diff[2] == doctest::Approx(-0.4).epsilon(1e-9));
  CHECK(report.accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(report.mean_diff == doctest::Approx(0.1333).epsilon(1e-3));
  CHECK(report.mean_diff == doctest::Approx(0.4 / 3.0).epsilon(1e-9));
}

TEST_CASE("a tie counts as correct by default and not in strict mode") {
  const auto [triplets, backend] = planted_triplets({{0.5, 0.5}});
  CHECK(eval_diff(nullptr, backend, triplets, true).accuracy == doctest::Approx(1.0));
  CHECK(eval_diff(nullptr, backend, triplets, false).accuracy == doctest::Approx(0.0));
}

TEST_CASE("eval_diff rejects an empty triplet list") {
  NgramBackend backend(16);
  CHECK_THROWS_AS(eval_diff(nullptr, backend, std::span<const Triplet>{}), ContractError);
}

TEST_CASE("eval_diff is invariant under reordering") {
  const auto [triplets, backend] =
      planted_triplets({{0.9, 0.2}, {0.4, 0.6}, {0.7, 0.7}, {0.1, 0.9}});
  auto reversed = triplets;
  std::reverse(reversed.begin(), reversed.end());
  const DiffReport a = eval_diff(nullptr, backend, triplets);
  const DiffReport b = eval_diff(nullptr, backend, reversed);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.mean_diff == doctest::Approx(b.mean_diff).epsilon(1e-15));
}

TEST_CASE("cosine is exactly invariant under power-of-two scaling") {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a(8), b(8);
    for (double& x : a) x = rng.symmetric_real(2.0);
    for (double& x : b) x = rng.symmetric_real(2.0);
    const EmbeddingVector va(a), vb(b);
    for (double& x : a) x *= 2.0;
    for (double& x : b) x *= 0.25;
    const EmbeddingVector sa(a), sb(b);
    CHECK(cosine(va, vb) == cosine(sa, sb));  // bitwise: scaling by 2^k is exact
  }
}

TEST_CASE("rouge identity and hand counts") {
  CHECK(rouge1_recall("都政運営", "都政運営", RougeUnit::character_unigram).recall ==
        doctest::Approx(1.0));
  const RougeReport r = rouge1_recall("都政", "都政運営", RougeUnit::character_unigram);
  CHECK(r.recall == doctest::Approx(0.5));
  CHECK(r.overlap_count == 2);
  CHECK(r.reference_count == 4);
}

TEST_CASE("rouge edge cases") {
  CHECK(rouge1_recall("", "都政", RougeUnit::character_unigram).recall == doctest::Approx(0.0));
  CHECK_THROWS_AS(rouge1_recall("x", "", RougeUnit::character_unigram), ContractError);
  CHECK_THROWS_AS(rouge1_recall("x", "   ", RougeUnit::character_unigram), ContractError);

  // Noise literals are excluded from counting.
  const std::vector<std::string> noise = {"（拍手）"};
  const RougeReport r =
      rouge1_recall("都政（拍手）", "都政", RougeUnit::character_unigram, noise);
  CHECK(r.recall == doctest::Approx(1.0));
  CHECK_THROWS_AS(rouge1_recall("都政", "（拍手）", RougeUnit::character_unigram, noise),
                  ContractError);
}

TEST_CASE("rouge token mode counts whitespace-separated unigrams") {
  const RougeReport r = rouge1_recall("a c d", "a b c", RougeUnit::token_unigram);
  CHECK(r.overlap_count == 2);
  CHECK(r.reference_count == 3);
  CHECK(r.recall == doctest::Approx(2.0 / 3.0));
  // Repeated tokens are clipped.
  CHECK(rouge1_recall("a", "a a a", RougeUnit::token_unigram).recall == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("rouge matches the naive counter on random pairs") {
  Rng rng(31);
  int tested = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string cand = random_text(rng, 8);
    const std::string ref = random_text(rng, 8);
    if (ref.empty()) continue;
    ++tested;
    CHECK(rouge1_recall(cand, ref, RougeUnit::character_unigram).recall ==
          naive_char_recall(cand, ref));  // exact equality
  }
  CHECK(tested > 500);
}

TEST_CASE("extending the candidate never lowers recall") {
  Rng rng(37);
  for (int i = 0; i < 1000; ++i) {
    const std::string cand = random_text(rng, 6);
    std::string ref = random_text(rng, 6);
    if (ref.empty()) ref = "a";
    const std::string extension = random_text(rng, 4);
    const double before = rouge1_recall(cand, ref, RougeUnit::character_unigram).recall;
    const double after = rouge1_recall(cand + extension, ref, RougeUnit::character_unigram).recall;
    CHECK(after >= before);
    CHECK(after >= 0.0);
    CHECK(after <= 1.0);
  }
}
