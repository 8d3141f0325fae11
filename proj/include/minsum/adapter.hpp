#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "minsum/embedding.hpp"

namespace minsum {

// Linear map applied to frozen base embeddings. The adapted embedding of a
// text is normalize(W * base(text)).
struct AdapterModel {
  int in_dim = 0;
  int out_dim = 0;
  std::vector<double> w;  // row-major, out_dim x in_dim

  static AdapterModel identity(int dim);
  static AdapterModel identity_with_noise(int dim, std::uint64_t seed, double scale);

  double& at(int row, int col) { return w[static_cast<std::size_t>(row) * in_dim + col]; }
  double at(int row, int col) const { return w[static_cast<std::size_t>(row) * in_dim + col]; }

  // W * v, unnormalized.
  std::vector<double> apply_raw(const EmbeddingVector& base) const;

  // normalize(W * v). Throws NumericError if W maps v to zero.
  EmbeddingVector apply_unit(const EmbeddingVector& base) const;
};

// Embedding backend that runs a base backend through an adapter.
class AdaptedBackend final : public EmbeddingBackend {
 public:
  AdaptedBackend(std::shared_ptr<const EmbeddingBackend> base, AdapterModel model);

  EmbeddingVector embed_keyed(std::string_view key, std::string_view text) const override;

  const AdapterModel& model() const { return model_; }

 private:
  std::shared_ptr<const EmbeddingBackend> base_;
  AdapterModel model_;
};

struct SavedModel {
  AdapterModel model;
  std::string backend_name;
  nlohmann::json config;      // training configuration, as written
  nlohmann::json provenance;  // config hash and seed
};

void save_model(const std::string& path, const AdapterModel& model,
                const std::string& backend_name, const nlohmann::json& config,
                const nlohmann::json& provenance);

SavedModel load_model(const std::string& path);

}  // namespace minsum
