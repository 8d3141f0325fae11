#include "minsum/adapter.hpp"

#include <cmath>
#include <fstream>

#include "minsum/errors.hpp"
#include "minsum/rng.hpp"

namespace minsum {

AdapterModel AdapterModel::identity(int dim) {
  if (dim <= 0) throw ContractError("adapter dimension must be positive");
  AdapterModel m;
  m.in_dim = dim;
  m.out_dim = dim;
  m.w.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
  return m;
}

AdapterModel AdapterModel::identity_with_noise(int dim, std::uint64_t seed, double scale) {
  AdapterModel m = identity(dim);
  Rng rng(seed);
  for (double& x : m.w) x += rng.symmetric_real(scale);
  return m;
}

std::vector<double> AdapterModel::apply_raw(const EmbeddingVector& base) const {
  if (base.dim() != in_dim) {
    throw ContractError("adapter expects dimension " + std::to_string(in_dim) + ", got " +
                        std::to_string(base.dim()));
  }
  std::vector<double> out(static_cast<std::size_t>(out_dim), 0.0);
  for (int r = 0; r < out_dim; ++r) {
    double s = 0.0;
    const double* row = w.data() + static_cast<std::size_t>(r) * in_dim;
    for (int c = 0; c < in_dim; ++c) s += row[c] * base[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = s;
  }
  return out;
}

EmbeddingVector AdapterModel::apply_unit(const EmbeddingVector& base) const {
  return EmbeddingVector::unit(apply_raw(base));
}

AdaptedBackend::AdaptedBackend(std::shared_ptr<const EmbeddingBackend> base, AdapterModel model)
    : EmbeddingBackend("adapted:" + base->name(), model.out_dim, BackendKind::adapted),
      base_(std::move(base)),
      model_(std::move(model)) {
  if (base_->dim() != model_.in_dim) {
    throw ContractError("adapter input dimension does not match base backend");
  }
}

EmbeddingVector AdaptedBackend::embed_keyed(std::string_view key, std::string_view text) const {
  return model_.apply_unit(base_->embed_keyed(key, text));
}

void save_model(const std::string& path, const AdapterModel& model,
                const std::string& backend_name, const nlohmann::json& config,
                const nlohmann::json& provenance) {
  nlohmann::json j;
  j["in_dim"] = model.in_dim;
  j["out_dim"] = model.out_dim;
  j["backend"] = backend_name;
  j["config"] = config;
  j["provenance"] = provenance;
  j["w"] = model.w;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  out << j.dump(2) << "\n";
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file parse error: " + std::string(e.what()));
  }
  for (const char* field : {"in_dim", "out_dim", "backend", "w"}) {
    if (!j.contains(field)) throw DataError(std::string("model file missing field '") + field + "'");
  }
  SavedModel sm;
  sm.model.in_dim = j["in_dim"].get<int>();
  sm.model.out_dim = j["out_dim"].get<int>();
  sm.model.w = j["w"].get<std::vector<double>>();
  if (sm.model.in_dim <= 0 || sm.model.out_dim <= 0 ||
      sm.model.w.size() !=
          static_cast<std::size_t>(sm.model.in_dim) * static_cast<std::size_t>(sm.model.out_dim)) {
    throw DataError("model file has inconsistent dimensions");
  }
  for (double x : sm.model.w) {
    if (!std::isfinite(x)) throw DataError("model file contains a non-finite weight");
  }
  sm.backend_name = j["backend"].get<std::string>();
  sm.config = j.value("config", nlohmann::json::object());
  sm.provenance = j.value("provenance", nlohmann::json::object());
  return sm;
}

}  // namespace minsum
