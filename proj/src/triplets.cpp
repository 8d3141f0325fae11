#include "minsum/triplets.hpp"

#include <fstream>

#include "minsum/errors.hpp"
#include "minsum/rng.hpp"

namespace minsum {

using nlohmann::json;

json BuildReport::to_json() const {
  return json{{"emitted", emitted},
              {"skipped", skipped},
              {"pos_threshold", pos_threshold},
              {"neg_threshold", neg_threshold},
              {"seed", seed},
              {"max_attempts", max_attempts},
              {"backend", backend},
              {"skipped_targets", skipped_targets}};
}

BuildResult build_triplets(const Corpus& corpus, const EmbeddingBackend& backend,
                           double pos_threshold, double neg_threshold, std::uint64_t seed,
                           int max_attempts) {
  if (max_attempts <= 0) throw ContractError("max_attempts must be positive");
  const auto& utts = corpus.utterances();
  const std::size_t n = utts.size();
  if (n < 2 || corpus.meetings().size() < 2) {
    throw DataError(
        "triplet build requires at least two utterances across two (date, meeting) groups; no "
        "negatives exist otherwise");
  }

  std::vector<EmbeddingVector> vecs;
  vecs.reserve(n);
  for (const Utterance& u : utts) vecs.push_back(backend.embed_keyed(u.id, u.text));

  BuildResult result;
  result.report.pos_threshold = pos_threshold;
  result.report.neg_threshold = neg_threshold;
  result.report.seed = seed;
  result.report.max_attempts = max_attempts;
  result.report.backend = backend.name();

  for (const MeetingKey& key : corpus.meetings()) {
    const auto [lo, hi] = corpus.meeting_range(key);
    const std::size_t group = hi - lo;
    const std::size_t others = n - group;
    for (std::size_t i = lo; i + 1 < hi; ++i) {
      const Utterance& target = utts[i];
      const Utterance& next = utts[i + 1];
      if (next.seq != target.seq + 1 || next.speaker != target.speaker) continue;
      const double pos_sim = cosine(vecs[i], vecs[i + 1]);
      if (pos_sim < pos_threshold) continue;

      Rng rng(derive_seed(seed, target.id));
      bool found = false;
      for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const std::uint64_t r = rng.below(others);
        const std::size_t idx = r < lo ? static_cast<std::size_t>(r)
                                       : static_cast<std::size_t>(r) + group;
        const double neg_sim = cosine(vecs[i], vecs[idx]);
        if (neg_sim <= neg_threshold) {
          result.triplets.push_back(Triplet{target, next, utts[idx], pos_sim, neg_sim});
          found = true;
          break;
        }
      }
      if (found) {
        ++result.report.emitted;
      } else {
        ++result.report.skipped;
        result.report.skipped_targets.push_back(target.id);
      }
    }
  }
  return result;
}

TripletSplit split_triplets(std::vector<Triplet> triplets, std::uint64_t seed) {
  if (triplets.empty()) throw ContractError("split_triplets: empty triplet list");
  Rng rng(seed);
  deterministic_shuffle(triplets, rng);

  const std::size_t n = triplets.size();
  const std::size_t share = (n + 5) / 10;  // round(n/10); remainder goes to train
  const std::size_t n_train = n - 2 * share;

  TripletSplit split;
  split.seed = seed;
  split.train.assign(triplets.begin(), triplets.begin() + n_train);
  split.dev.assign(triplets.begin() + n_train, triplets.begin() + n_train + share);
  split.test.assign(triplets.begin() + n_train + share, triplets.end());
  return split;
}

void save_triplets(const std::string& path, const std::vector<Triplet>& triplets,
                   const nlohmann::json& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write triplet file: " + path);
  if (!meta.is_null()) out << json{{"meta", meta}}.dump() << "\n";
  for (const Triplet& t : triplets) {
    out << json{{"target_id", t.target.id},
                {"positive_id", t.positive.id},
                {"negative_id", t.negative.id},
                {"pos_sim", t.pos_sim},
                {"neg_sim", t.neg_sim}}
               .dump()
        << "\n";
  }
}

std::vector<Triplet> load_triplets(const std::string& path, const Corpus& corpus) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open triplet file: " + path);
  std::vector<Triplet> out;
  std::string line;
  std::size_t lineno = 0;
  const auto resolve = [&](const json& rec, const char* field) -> const Utterance& {
    if (!rec.contains(field) || !rec[field].is_string()) {
      throw DataError("triplet file line " + std::to_string(lineno) + ": missing field '" + field +
                      "'");
    }
    const std::string id = rec[field].get<std::string>();
    const Utterance* u = corpus.by_id(id);
    if (u == nullptr) {
      throw DataError("triplet file line " + std::to_string(lineno) + ": unknown utterance id '" +
                      id + "'");
    }
    return *u;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("triplet file parse error at line " + std::to_string(lineno) + ": " +
                      e.what());
    }
    if (lineno == 1 && rec.is_object() && rec.contains("meta")) continue;
    Triplet t;
    t.target = resolve(rec, "target_id");
    t.positive = resolve(rec, "positive_id");
    t.negative = resolve(rec, "negative_id");
    t.pos_sim = rec.value("pos_sim", 0.0);
    t.neg_sim = rec.value("neg_sim", 0.0);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace minsum
