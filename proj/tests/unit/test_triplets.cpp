#include "minsum/triplets.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include <doctest.h>

#include "minsum/errors.hpp"
#include "../support/fixtures.hpp"

using namespace minsum;
using testsupport::utt;

namespace {

Corpus fixture_corpus() {
  return load_corpus(testsupport::fixture_path("minutes.jsonl"), kDefaultNoise);
}

// Independent enumerator of the (target, positive) pairs: same meeting,
// same speaker, consecutive seq, cosine at or above the threshold.
std::set<std::pair<std::string, std::string>> oracle_pairs(const Corpus& corpus,
                                                           const EmbeddingBackend& backend,
                                                           double pos_threshold) {
  std::set<std::pair<std::string, std::string>> pairs;
  const auto& utts = corpus.utterances();
  for (std::size_t i = 0; i < utts.size(); ++i) {
    for (std::size_t j = 0; j < utts.size(); ++j) {
      const Utterance& a = utts[i];
      const Utterance& b = utts[j];
      if (a.date != b.date || a.meeting != b.meeting) continue;
      if (a.speaker != b.speaker || b.seq != a.seq + 1) continue;
      const double sim = cosine(backend.embed_keyed(a.id, a.text), backend.embed_keyed(b.id, b.text));
      if (sim >= pos_threshold) pairs.insert({a.id, b.id});
    }
  }
  return pairs;
}

}  // namespace

TEST_CASE("build_triplets matches the brute-force enumerator on the fixture") {
  const Corpus corpus = fixture_corpus();
  NgramBackend backend(256);
  const BuildResult result = build_triplets(corpus, backend, 0.5, 0.9, 42, 100);

  const auto expected = oracle_pairs(corpus, backend, 0.5);
  CHECK(result.report.emitted + result.report.skipped == expected.size());

  std::set<std::pair<std::string, std::string>> got;
  for (const Triplet& t : result.triplets) got.insert({t.target.id, t.positive.id});
  CHECK(got == expected);

  // The fixture mixes qualifying and non-qualifying adjacent pairs.
  CHECK(!expected.empty());
  CHECK(expected.size() < 8);  // 8 same-speaker adjacent pairs exist in total
  CHECK(result.report.skipped == 0);
}

TEST_CASE("emitted triplets satisfy every invariant when re-verified") {
  const Corpus corpus = fixture_corpus();
  NgramBackend backend(256);
  const BuildResult result = build_triplets(corpus, backend, 0.5, 0.9, 42, 100);
  REQUIRE(!result.triplets.empty());
  for (const Triplet& t : result.triplets) {
    CHECK(t.target.speaker == t.positive.speaker);
    CHECK(t.target.date == t.positive.date);
    CHECK(t.target.meeting == t.positive.meeting);
    CHECK(t.positive.seq == t.target.seq + 1);
    const bool different_meeting =
        t.negative.date != t.target.date || t.negative.meeting != t.target.meeting;
    CHECK(different_meeting);

    const auto vt = backend.embed_keyed(t.target.id, t.target.text);
    const auto vp = backend.embed_keyed(t.positive.id, t.positive.text);
    const auto vn = backend.embed_keyed(t.negative.id, t.negative.text);
    CHECK(cosine(vt, vp) == doctest::Approx(t.pos_sim).epsilon(1e-12));
    CHECK(cosine(vt, vn) == doctest::Approx(t.neg_sim).epsilon(1e-12));
    CHECK(t.pos_sim >= 0.5);
    CHECK(t.neg_sim <= 0.9);
  }
}

TEST_CASE("build is deterministic for a fixed seed") {
  const Corpus corpus = fixture_corpus();
  NgramBackend backend(256);
  const BuildResult a = build_triplets(corpus, backend, 0.5, 0.9, 7, 100);
  const BuildResult b = build_triplets(corpus, backend, 0.5, 0.9, 7, 100);
  REQUIRE(a.triplets.size() == b.triplets.size());
  for (std::size_t i = 0; i < a.triplets.size(); ++i) {
    CHECK(a.triplets[i].negative.id == b.triplets[i].negative.id);
    CHECK(a.triplets[i].pos_sim == b.triplets[i].pos_sim);
    CHECK(a.triplets[i].neg_sim == b.triplets[i].neg_sim);
  }
}

TEST_CASE("thresholds are inclusive as stated") {
  // Planted vectors: pair cosine exactly 0.5 qualifies, 0.49 does not; a
  // negative at exactly 0.9 qualifies.
  const double s3 = std::sqrt(3.0) / 2.0;
  const auto backend = testsupport::planted_backend({
      {"a0", {1.0, 0.0}},
      {"a1", {0.5, s3}},  // cos(a0, a1) = 0.5
      {"b0", {1.0, 0.0}},
      {"b1", {0.49, std::sqrt(1.0 - 0.49 * 0.49)}},  // cos(b0, b1) = 0.49
      {"n0", {0.9, std::sqrt(1.0 - 0.81)}},          // cos(a0, n0) = 0.9
  });
  std::vector<Utterance> utts = {
      utt("a0", 0, "d1", "m1", "s", "足切り上の組"),
      utt("a1", 1, "d1", "m1", "s", "足切り上の組の続き"),
      utt("b0", 0, "d2", "m1", "s", "足切り下の組"),
      utt("b1", 1, "d2", "m1", "s", "足切り下の組の続き"),
      utt("n0", 0, "d3", "m1", "s", "負例候補"),
  };
  const Corpus corpus = Corpus::from_utterances(utts);
  const BuildResult result = build_triplets(corpus, backend, 0.5, 0.9, 1, 200);

  // Only the (a0, a1) pair qualifies; its negative search accepts any of the
  // other-meeting utterances (all cosines <= 0.9 against a0).
  REQUIRE(result.triplets.size() == 1);
  CHECK(result.triplets[0].target.id == "a0");
  CHECK(result.triplets[0].positive.id == "a1");
  CHECK(result.triplets[0].pos_sim == doctest::Approx(0.5));
}

TEST_CASE("a single-meeting corpus cannot provide negatives") {
  NgramBackend backend(64);
  std::vector<Utterance> utts = {utt("a", 0, "d", "m", "s", "発言その一です"),
                                 utt("b", 1, "d", "m", "s", "発言その二です")};
  const Corpus corpus = Corpus::from_utterances(utts);
  CHECK_THROWS_AS(build_triplets(corpus, backend, 0.5, 0.9, 1, 10), DataError);
}

TEST_CASE("max_attempts exhaustion skips the target and reports it") {
  // Every cross-meeting candidate is identical to the target, so no
  // negative at or below 0.9 exists.
  const auto backend = testsupport::planted_backend({
      {"t", {1.0, 0.0}},
      {"p", {1.0, 0.0}},
      {"x", {1.0, 0.0}},
  });
  std::vector<Utterance> utts = {utt("t", 0, "d1", "m", "s", "同一内容"),
                                 utt("p", 1, "d1", "m", "s", "同一内容"),
                                 utt("x", 0, "d2", "m", "s", "同一内容")};
  const Corpus corpus = Corpus::from_utterances(utts);
  const BuildResult result = build_triplets(corpus, backend, 0.5, 0.9, 1, 25);
  CHECK(result.triplets.empty());
  CHECK(result.report.emitted == 0);
  CHECK(result.report.skipped == 1);
  REQUIRE(result.report.skipped_targets.size() == 1);
  CHECK(result.report.skipped_targets[0] == "t");
}

TEST_CASE("split sizes follow the 80/10/10 rule") {
  std::vector<Triplet> ts = testsupport::separable_triplets(27078);
  const TripletSplit split = split_triplets(std::move(ts), 5);
  CHECK(split.train.size() == 21662);
  CHECK(split.dev.size() == 2708);
  CHECK(split.test.size() == 2708);
}

TEST_CASE("small splits keep the remainder in train") {
  const TripletSplit ten = split_triplets(testsupport::separable_triplets(10), 3);
  CHECK(ten.train.size() == 8);
  CHECK(ten.dev.size() == 1);
  CHECK(ten.test.size() == 1);

  const TripletSplit three = split_triplets(testsupport::separable_triplets(3), 3);
  CHECK(three.train.size() == 3);
  CHECK(three.dev.size() == 0);
  CHECK(three.test.size() == 0);
}

TEST_CASE("splits are disjoint, exhaustive, and seed-deterministic") {
  const auto ts = testsupport::separable_triplets(137);
  const TripletSplit a = split_triplets(ts, 11);
  const TripletSplit b = split_triplets(ts, 11);

  const auto ids = [](const std::vector<Triplet>& v) {
    std::multiset<std::string> out;
    for (const Triplet& t : v) out.insert(t.target.id + "|" + t.positive.id + "|" + t.negative.id);
    return out;
  };
  CHECK(ids(a.train) == ids(b.train));
  CHECK(ids(a.dev) == ids(b.dev));
  CHECK(ids(a.test) == ids(b.test));

  std::multiset<std::string> all = ids(a.train);
  for (const auto& s : ids(a.dev)) all.insert(s);
  for (const auto& s : ids(a.test)) all.insert(s);
  CHECK(all == ids(ts));

  std::set<std::string> unique_train(ids(a.train).begin(), ids(a.train).end());
  for (const auto& s : ids(a.dev)) CHECK(unique_train.find(s) == unique_train.end());
}

TEST_CASE("triplets round-trip through the file format") {
  const Corpus corpus = fixture_corpus();
  NgramBackend backend(256);
  const BuildResult result = build_triplets(corpus, backend, 0.5, 0.9, 42, 100);
  REQUIRE(!result.triplets.empty());

  const std::string path = "triplet_roundtrip_tmp.jsonl";
  save_triplets(path, result.triplets, nlohmann::json{{"seed", 42}});
  const auto reloaded = load_triplets(path, corpus);
  std::remove(path.c_str());

  REQUIRE(reloaded.size() == result.triplets.size());
  for (std::size_t i = 0; i < reloaded.size(); ++i) {
    CHECK(reloaded[i].target == result.triplets[i].target);
    CHECK(reloaded[i].positive == result.triplets[i].positive);
    CHECK(reloaded[i].negative == result.triplets[i].negative);
    CHECK(reloaded[i].pos_sim == result.triplets[i].pos_sim);  // exact round-trip
    CHECK(reloaded[i].neg_sim == result.triplets[i].neg_sim);
  }
}
