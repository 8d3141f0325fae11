#include "minsum/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "minsum/errors.hpp"
#include "minsum/metrics.hpp"
#include "minsum/rng.hpp"

namespace minsum {

using nlohmann::json;

json TrainConfig::to_json() const {
  return json{{"margin", margin},
              {"batch_size", batch_size},
              {"learning_rate", learning_rate},
              {"epochs", epochs},
              {"warmup_fraction", warmup_fraction},
              {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig cfg;
  cfg.margin = j.value("margin", cfg.margin);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.warmup_fraction = j.value("warmup_fraction", cfg.warmup_fraction);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

json TrainReport::to_json() const {
  return json{{"epoch_mean_loss", epoch_mean_loss},
              {"epoch_dev_accuracy", epoch_dev_accuracy},
              {"best_epoch", best_epoch},
              {"best_dev_accuracy", best_dev_accuracy},
              {"steps", steps}};
}

std::pair<double, double> distance_softmax(double a, double b) {
  const double ea = std::exp(a);
  const double eb = std::exp(b);
  const double sum = ea + eb;
  return {ea / sum, eb / sum};
}

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

struct AdaptedTriple {
  std::vector<double> yt, yp, yn;  // adapted unit embeddings
  double a = 0.0;                  // |yt - yp|
  double b = 0.0;                  // |yt - yn|
};

AdaptedTriple adapt_triple(const AdapterModel& model, const EmbeddingVector& t,
                           const EmbeddingVector& p, const EmbeddingVector& n) {
  AdaptedTriple out;
  out.yt = model.apply_unit(t).values();
  out.yp = model.apply_unit(p).values();
  out.yn = model.apply_unit(n).values();
  out.a = euclidean(out.yt, out.yp);
  out.b = euclidean(out.yt, out.yn);
  return out;
}

}  // namespace

std::pair<double, double> triplet_distances(const AdapterModel& model,
                                            const EmbeddingBackend& backend, const Triplet& t) {
  const auto at = adapt_triple(model, backend.embed_keyed(t.target.id, t.target.text),
                               backend.embed_keyed(t.positive.id, t.positive.text),
                               backend.embed_keyed(t.negative.id, t.negative.text));
  return distance_softmax(at.a, at.b);
}

double triplet_loss(const AdapterModel& model, const EmbeddingBackend& backend, const Triplet& t,
                    double margin) {
  if (margin < 0.0) throw ContractError("triplet loss margin must be non-negative");
  const auto at = adapt_triple(model, backend.embed_keyed(t.target.id, t.target.text),
                               backend.embed_keyed(t.positive.id, t.positive.text),
                               backend.embed_keyed(t.negative.id, t.negative.text));
  return std::max(0.0, at.a - at.b + margin);
}

LossGrad triplet_loss_grad(const AdapterModel& model, const EmbeddingVector& target,
                           const EmbeddingVector& positive, const EmbeddingVector& negative,
                           double margin) {
  if (margin < 0.0) throw ContractError("triplet loss margin must be non-negative");
  const int out_dim = model.out_dim;
  const int in_dim = model.in_dim;

  LossGrad lg;
  lg.grad.assign(static_cast<std::size_t>(out_dim) * in_dim, 0.0);

  // Pre-normalization images and their norms are needed for the chain rule.
  const std::vector<double> xt = model.apply_raw(target);
  const std::vector<double> xp = model.apply_raw(positive);
  const std::vector<double> xn = model.apply_raw(negative);
  const auto unit_of = [&](const std::vector<double>& x, double& norm_out) {
    double s = 0.0;
    for (double v : x) s += v * v;
    norm_out = std::sqrt(s);
    if (norm_out == 0.0) throw NumericError("adapter maps an embedding to the zero vector");
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / norm_out;
    return y;
  };
  double nt = 0.0, np = 0.0, nn = 0.0;
  const std::vector<double> yt = unit_of(xt, nt);
  const std::vector<double> yp = unit_of(xp, np);
  const std::vector<double> yn = unit_of(xn, nn);

  const double a = euclidean(yt, yp);
  const double b = euclidean(yt, yn);
  lg.loss = std::max(0.0, a - b + margin);
  if (lg.loss == 0.0) return lg;  // inactive hinge

  constexpr double kTiny = 1e-12;
  std::vector<double> g_yt(yt.size(), 0.0);
  std::vector<double> g_yp(yt.size(), 0.0);
  std::vector<double> g_yn(yt.size(), 0.0);
  if (a > kTiny) {
    for (std::size_t i = 0; i < yt.size(); ++i) {
      const double d = (yt[i] - yp[i]) / a;
      g_yt[i] += d;
      g_yp[i] -= d;
    }
  }
  if (b > kTiny) {
    for (std::size_t i = 0; i < yt.size(); ++i) {
      const double d = (yt[i] - yn[i]) / b;
      g_yt[i] -= d;
      g_yn[i] += d;
    }
  }

  // Through y = x/|x|:  g_x = (g_y - y (y . g_y)) / |x|; then dx/dW_rc = u_c.
  const auto accumulate = [&](const std::vector<double>& y, double norm,
                              const std::vector<double>& g_y, const EmbeddingVector& u) {
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * g_y[i];
    for (int r = 0; r < out_dim; ++r) {
      const double gx = (g_y[static_cast<std::size_t>(r)] - y[static_cast<std::size_t>(r)] * dot) / norm;
      if (gx == 0.0) continue;
      double* row = lg.grad.data() + static_cast<std::size_t>(r) * in_dim;
      for (int c = 0; c < in_dim; ++c) row[c] += gx * u[static_cast<std::size_t>(c)];
    }
  };
  accumulate(yt, nt, g_yt, target);
  accumulate(yp, np, g_yp, positive);
  accumulate(yn, nn, g_yn, negative);
  return lg;
}

namespace {

struct EncodedTriplet {
  EmbeddingVector target, positive, negative;
};

std::vector<EncodedTriplet> encode_all(const std::vector<Triplet>& ts,
                                       const EmbeddingBackend& backend) {
  std::vector<EncodedTriplet> out;
  out.reserve(ts.size());
  for (const Triplet& t : ts) {
    out.push_back(EncodedTriplet{backend.embed_keyed(t.target.id, t.target.text),
                                 backend.embed_keyed(t.positive.id, t.positive.text),
                                 backend.embed_keyed(t.negative.id, t.negative.text)});
  }
  return out;
}

double mean_loss(const AdapterModel& model, const std::vector<EncodedTriplet>& enc, double margin) {
  double sum = 0.0;
  for (const EncodedTriplet& e : enc) {
    sum += triplet_loss_grad(model, e.target, e.positive, e.negative, margin).loss;
  }
  return sum / static_cast<double>(enc.size());
}

void validate(const TrainConfig& cfg) {
  if (cfg.margin < 0.0) throw ConfigError("train: margin must be non-negative");
  if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be positive");
  if (cfg.learning_rate <= 0.0) throw ConfigError("train: learning_rate must be positive");
  if (cfg.epochs < 0) throw ConfigError("train: epochs must be non-negative");
  if (cfg.warmup_fraction < 0.0 || cfg.warmup_fraction > 1.0) {
    throw ConfigError("train: warmup_fraction must be in [0, 1]");
  }
}

}  // namespace

TrainOutcome train(const TripletSplit& split, const EmbeddingBackend& backend,
                   const TrainConfig& cfg) {
  validate(cfg);
  if (split.train.empty()) throw ContractError("train: empty training split");

  const int dim = backend.dim();
  constexpr double kInitNoise = 1e-3;
  AdapterModel model = AdapterModel::identity_with_noise(dim, derive_seed(cfg.seed, "init"), kInitNoise);

  const std::vector<EncodedTriplet> enc = encode_all(split.train, backend);
  const std::size_t n_train = enc.size();
  const std::size_t n_params = model.w.size();

  const auto dev_accuracy = [&](const AdapterModel& m) {
    return split.dev.empty() ? 0.0 : eval_diff(&m, backend, split.dev).accuracy;
  };

  TrainOutcome out;
  out.report.epoch_mean_loss.push_back(mean_loss(model, enc, cfg.margin));
  out.report.epoch_dev_accuracy.push_back(dev_accuracy(model));

  AdapterModel best = model;
  double best_acc = out.report.epoch_dev_accuracy.front();
  int best_epoch = 0;

  // Adam state.
  std::vector<double> m1(n_params, 0.0);
  std::vector<double> m2(n_params, 0.0);
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  const std::size_t steps_per_epoch =
      (n_train + static_cast<std::size_t>(cfg.batch_size) - 1) / cfg.batch_size;
  const std::size_t warmup_steps =
      cfg.warmup_fraction > 0.0
          ? static_cast<std::size_t>(
                std::ceil(cfg.warmup_fraction * static_cast<double>(steps_per_epoch)))
          : 0;

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(n_params);
  std::size_t step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, "epoch-" + std::to_string(epoch)));
    deterministic_shuffle(order, rng);

    double epoch_loss_sum = 0.0;
    for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
      const std::size_t end = std::min(n_train, start + static_cast<std::size_t>(cfg.batch_size));
      const std::size_t count = end - start;
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const EncodedTriplet& e = enc[order[k]];
        const LossGrad lg = triplet_loss_grad(model, e.target, e.positive, e.negative, cfg.margin);
        batch_loss += lg.loss;
        for (std::size_t i = 0; i < n_params; ++i) grad[i] += lg.grad[i];
      }
      epoch_loss_sum += batch_loss;
      const double inv = 1.0 / static_cast<double>(count);
      batch_loss *= inv;
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(start / cfg.batch_size));
      }

      ++step;
      const double warm =
          (warmup_steps > 0 && step < warmup_steps)
              ? static_cast<double>(step) / static_cast<double>(warmup_steps)
              : 1.0;
      const double lr = cfg.learning_rate * warm;
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t i = 0; i < n_params; ++i) {
        const double g = grad[i] * inv;
        if (!std::isfinite(g)) {
          throw NumericError("non-finite gradient in epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(start / cfg.batch_size));
        }
        m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * g;
        m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * g * g;
        const double mhat = m1[i] / bc1;
        const double vhat = m2[i] / bc2;
        model.w[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
        if (!std::isfinite(model.w[i])) {
          throw NumericError("non-finite weight in epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(start / cfg.batch_size));
        }
      }
    }

    out.report.epoch_mean_loss.push_back(epoch_loss_sum / static_cast<double>(n_train));
    const double acc = dev_accuracy(model);
    out.report.epoch_dev_accuracy.push_back(acc);
    if (acc > best_acc) {
      best_acc = acc;
      best = model;
      best_epoch = epoch;
    }
  }

  out.report.steps = step;
  out.report.best_epoch = split.dev.empty() ? cfg.epochs : best_epoch;
  out.report.best_dev_accuracy = best_acc;
  out.model = split.dev.empty() ? std::move(model) : std::move(best);
  return out;
}

}  // namespace minsum
