#include "minsum/trainer.hpp"

#include <cmath>

#include <doctest.h>

#include "minsum/errors.hpp"
#include "minsum/metrics.hpp"
#include "minsum/rng.hpp"
#include "../support/fixtures.hpp"

using namespace minsum;
using testsupport::utt;

namespace {

Triplet planted_triplet() {
  Triplet t;
  t.target = utt("t", 0, "d1", "m1", "s", "対象");
  t.positive = utt("p", 1, "d1", "m1", "s", "正例");
  t.negative = utt("n", 0, "d2", "m2", "s", "負例");
  return t;
}

EmbeddingVector random_unit(Rng& rng, int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (double& x : v) x = rng.symmetric_real(1.0);
  return EmbeddingVector::unit(std::move(v));
}

AdapterModel random_model(Rng& rng, int dim, double spread) {
  AdapterModel m = AdapterModel::identity(dim);
  for (double& x : m.w) x += rng.symmetric_real(spread);
  return m;
}

}  // namespace

TEST_CASE("normalized distances softmax the euclidean pair") {
  // Unit vectors at planted angles: distance(t, p) = 1, distance(t, n) = 2.
  const double s3 = std::sqrt(3.0) / 2.0;
  const auto backend = testsupport::planted_backend(
      {{"t", {1.0, 0.0}}, {"p", {0.5, s3}}, {"n", {-1.0, 0.0}}});
  const AdapterModel identity = AdapterModel::identity(2);
  const auto [dp, dn] = triplet_distances(identity, backend, planted_triplet());
  CHECK(dp == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + std::exp(2.0))).epsilon(1e-9));
  CHECK(dp == doctest::Approx(0.2689).epsilon(1e-4));
  CHECK(dp + dn == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("identical positive and negative embeddings give 0.5 / 0.5") {
  const auto backend = testsupport::planted_backend(
      {{"t", {1.0, 0.0}}, {"p", {0.0, 1.0}}, {"n", {0.0, 1.0}}});
  const AdapterModel identity = AdapterModel::identity(2);
  const auto [dp, dn] = triplet_distances(identity, backend, planted_triplet());
  CHECK(dp == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dn == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a near positive and a far negative push d+ toward zero") {
  const auto [dp, dn] = distance_softmax(0.0, 10.0);
  CHECK(dp < 1e-4);
  CHECK(dn > 1.0 - 1e-4);
}

TEST_CASE("d+ and d- sum to one on fuzzed inputs") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.unit_real() * 2.0;
    const double b = rng.unit_real() * 2.0;
    const auto [dp, dn] = distance_softmax(a, b);
    CHECK(std::abs(dp + dn - 1.0) <= 1e-12);
  }
}

TEST_CASE("triplet loss hand values") {
  const double s3 = std::sqrt(3.0) / 2.0;
  const AdapterModel identity = AdapterModel::identity(2);

  // Positive at distance 0, negative at distance 2 >= margin: loss 0.
  const auto satisfied = testsupport::planted_backend(
      {{"t", {1.0, 0.0}}, {"p", {1.0, 0.0}}, {"n", {-1.0, 0.0}}});
  CHECK(triplet_loss(identity, satisfied, planted_triplet(), 1.0) == doctest::Approx(0.0));

  // Equidistant positive and negative with margin 1: loss 1.
  const auto equidistant = testsupport::planted_backend(
      {{"t", {1.0, 0.0}}, {"p", {0.0, 1.0}}, {"n", {0.0, -1.0}}});
  CHECK(triplet_loss(identity, equidistant, planted_triplet(), 1.0) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Distances 0.4 and 0.9 with margin 1: loss 0.5. Unit vectors at distance
  // d have cosine 1 - d^2/2.
  const auto at_distance = [&](double d) {
    const double c = 1.0 - d * d / 2.0;
    return std::vector<double>{c, std::sqrt(1.0 - c * c)};
  };
  const auto planted = testsupport::planted_backend(
      {{"t", {1.0, 0.0}}, {"p", at_distance(0.4)}, {"n", at_distance(0.9)}});
  CHECK(triplet_loss(identity, planted, planted_triplet(), 1.0) ==
        doctest::Approx(0.5).epsilon(1e-9));

  CHECK_THROWS_AS(triplet_loss(identity, planted, planted_triplet(), -0.1), ContractError);
  (void)s3;
}

TEST_CASE("analytic gradient matches central finite differences") {
  constexpr int kDim = 8;
  constexpr double kH = 1e-6;
  Rng rng(21);
  int checked = 0;
  while (checked < 10) {
    const auto vt = random_unit(rng, kDim);
    const auto vp = random_unit(rng, kDim);
    const auto vn = random_unit(rng, kDim);
    AdapterModel model = random_model(rng, kDim, 0.2);

    const LossGrad lg = triplet_loss_grad(model, vt, vp, vn, 1.0);
    // Stay away from the hinge kink where the loss is not differentiable.
    const double margin_gap = std::abs(lg.loss);
    if (margin_gap < 1e-3) continue;
    ++checked;

    double max_rel = 0.0;
    for (std::size_t i = 0; i < model.w.size(); ++i) {
      const double saved = model.w[i];
      model.w[i] = saved + kH;
      const double up = triplet_loss_grad(model, vt, vp, vn, 1.0).loss;
      model.w[i] = saved - kH;
      const double down = triplet_loss_grad(model, vt, vp, vn, 1.0).loss;
      model.w[i] = saved;
      const double fd = (up - down) / (2.0 * kH);
      const double rel = std::abs(lg.grad[i] - fd) / std::max(1.0, std::abs(fd));
      max_rel = std::max(max_rel, rel);
    }
    CHECK(max_rel < 1e-4);
  }
}

TEST_CASE("train is deterministic and epochs=0 returns the initial model") {
  const auto triplets = testsupport::separable_triplets(64);
  NgramBackend backend(64);
  const TripletSplit split = split_triplets(triplets, 3);

  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 9;
  const TrainOutcome zero = train(split, backend, cfg);
  const AdapterModel init = AdapterModel::identity_with_noise(64, derive_seed(9, "init"), 1e-3);
  CHECK(zero.model.w == init.w);

  cfg.epochs = 2;
  cfg.learning_rate = 0.01;
  const TrainOutcome a = train(split, backend, cfg);
  const TrainOutcome b = train(split, backend, cfg);
  CHECK(a.model.w == b.model.w);  // bitwise
  CHECK(a.report.epoch_mean_loss == b.report.epoch_mean_loss);
}

TEST_CASE("training on the separable fixture improves dev accuracy and loss") {
  const auto triplets = testsupport::separable_triplets(600);
  NgramBackend backend(128);
  const TripletSplit split = split_triplets(triplets, 4);

  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 0.05;
  cfg.batch_size = 16;
  cfg.seed = 12;

  const AdapterModel identity = AdapterModel::identity(128);
  const double base_acc = eval_diff(&identity, backend, split.dev).accuracy;
  const double base_diff = eval_diff(&identity, backend, split.dev).mean_diff;

  const TrainOutcome outcome = train(split, backend, cfg);
  const double trained_acc = eval_diff(&outcome.model, backend, split.dev).accuracy;
  const double trained_diff = eval_diff(&outcome.model, backend, split.dev).mean_diff;

  CHECK(trained_acc > base_acc);
  CHECK(trained_diff > base_diff);

  // Mean training loss falls from the pre-training value to epoch 3.
  REQUIRE(outcome.report.epoch_mean_loss.size() >= 4);
  CHECK(outcome.report.epoch_mean_loss[3] < outcome.report.epoch_mean_loss[0]);
}

TEST_CASE("non-finite inputs abort training with a diagnostic") {
  auto triplets = testsupport::separable_triplets(32);
  NgramBackend backend(64);
  TripletSplit split;
  split.train = triplets;

  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 1e280;  // drives weights to overflow
  CHECK_THROWS_AS(train(split, backend, cfg), NumericError);
}
