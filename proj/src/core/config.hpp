#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "core/adadelta.hpp"
#include "core/model.hpp"
#include "core/training.hpp"

namespace jumper {

// Complete run configuration. Defaults follow the reference hyperparameters
// (window sizes 1-5 with 200 maps each, dropout 0.5, GRU hidden size 20,
// 300d embeddings, r = 0.05, gamma = 0.9, epsilon = 0.1, M = 5, AdaDelta at
// 0.1 with batches of 50).
struct RunConfig {
  std::uint64_t seed = 0;
  ModelConfig model;
  RewardConfig reward;
  TrainConfig train;
  AdaDelta::Options optimizer;
  ParagraphLimits limits;
  std::size_t vocab_min_count = 1;

  // "schema" in the data block may be a path or an inline schema object.
  std::string schema_path;
  std::optional<SlotSchema> inline_schema;
  std::string embedding_path;  // empty: random initialization
  std::string train_path;
  std::string dev_path;
};

RunConfig default_config();
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j, const std::string& origin);
RunConfig load_config(const std::string& path);

// Resolves the schema (inline wins over the path).
SlotSchema resolve_schema(const RunConfig& cfg);

const char* mode_name(TrainConfig::Mode mode);
TrainConfig::Mode mode_from_name(const std::string& name);

}  // namespace jumper
