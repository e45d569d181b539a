#pragma once

#include <memory>

#include "core/checkpoint.hpp"
#include "core/rationale.hpp"

namespace jumper {

// Ties configuration, vocabulary, model and the file formats together.
// A session created from a config has no model until train() builds the
// vocabulary and parameters; a session loaded from a checkpoint is ready
// for evaluate / predict / explain immediately.
class Session {
public:
  static Session create(RunConfig cfg);
  static Session load(const std::string& checkpoint_path);

  bool has_model() const { return model_ != nullptr; }
  const RunConfig& config() const { return cfg_; }
  RunConfig& config() { return cfg_; }
  const Model& model() const;

  void save(const std::string& checkpoint_path) const;

  // Trains per the config mode; on_epoch (optional) receives one record per
  // epoch. Returns the report as a JSON array of epoch records.
  nlohmann::json train(const std::string& train_path,
                       const std::string& dev_path,
                       const std::function<void(const nlohmann::json&)>& on_epoch);

  // Greedy evaluation; JA/OA appear only when a rationale gold file is given.
  nlohmann::json evaluate(const std::string& data_path,
                          const std::string& rationale_gold_path) const;

  // One record per input line: {"id", "predictions": {slot: {class, jump_step}}}
  nlohmann::json predict(const std::string& data_path) const;

  // Per-step decision distributions, jump steps and word-level rationale
  // for one paragraph. slot_filter empty = all slots.
  nlohmann::json explain(const std::string& text,
                         const std::string& slot_filter) const;

private:
  Session() = default;

  SlotSchema& schema();
  const SlotSchema& schema() const;
  Dataset load_data(const std::string& path) const;

  RunConfig cfg_;
  mutable std::optional<SlotSchema> schema_;
  std::optional<Vocabulary> vocab_;
  std::unique_ptr<Model> model_;
};

}  // namespace jumper
