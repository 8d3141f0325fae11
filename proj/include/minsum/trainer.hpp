#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "minsum/adapter.hpp"
#include "minsum/embedding.hpp"
#include "minsum/triplets.hpp"

namespace minsum {

struct TrainConfig {
  double margin = 1.0;          // triplet-loss margin
  int batch_size = 16;
  double learning_rate = 2e-5;
  int epochs = 3;
  double warmup_fraction = 0.1;  // linear warm-up over this share of the first epoch's steps
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// Normalized pair distances: given Euclidean distances a = |f(t)-f(p)| and
// b = |f(t)-f(n)| in the adapted space, returns
// (e^a / (e^a + e^b), e^b / (e^a + e^b)), which always sum to 1.
std::pair<double, double> distance_softmax(double a, double b);

std::pair<double, double> triplet_distances(const AdapterModel& model,
                                            const EmbeddingBackend& backend, const Triplet& t);

// Margin hinge: max(0, |f(t)-f(p)| - |f(t)-f(n)| + margin) on adapted
// unit embeddings.
double triplet_loss(const AdapterModel& model, const EmbeddingBackend& backend, const Triplet& t,
                    double margin);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d W, row-major out_dim x in_dim
};

// Loss and analytic gradient for one triplet of base embeddings. The
// gradient runs through the post-map normalization.
LossGrad triplet_loss_grad(const AdapterModel& model, const EmbeddingVector& target,
                           const EmbeddingVector& positive, const EmbeddingVector& negative,
                           double margin);

struct TrainReport {
  // Index 0 is the pre-training value; index e is after epoch e.
  std::vector<double> epoch_mean_loss;
  std::vector<double> epoch_dev_accuracy;
  int best_epoch = 0;
  double best_dev_accuracy = 0.0;
  std::size_t steps = 0;

  nlohmann::json to_json() const;
};

struct TrainOutcome {
  AdapterModel model;
  TrainReport report;
};

// Minibatch Adam over the margin triplet loss, starting from identity plus
// seeded small noise, with linear learning-rate warm-up. Returns the epoch
// checkpoint (including the initial state) with the best dev accuracy; if
// the dev split is empty, returns the final model.
TrainOutcome train(const TripletSplit& split, const EmbeddingBackend& backend,
                   const TrainConfig& cfg);

}  // namespace minsum
