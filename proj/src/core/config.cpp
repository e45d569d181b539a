#include "core/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace jumper {

using nlohmann::json;

RunConfig default_config() { return RunConfig{}; }

const char* mode_name(TrainConfig::Mode mode) {
  return mode == TrainConfig::Mode::reinforce ? "reinforce" : "xent";
}

TrainConfig::Mode mode_from_name(const std::string& name) {
  if (name == "reinforce") return TrainConfig::Mode::reinforce;
  if (name == "xent" || name == "cross_entropy")
    return TrainConfig::Mode::cross_entropy;
  fail_invalid("unknown training mode \"" + name +
               "\" (expected reinforce or xent)");
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["encoder"] = {{"window_sizes", cfg.model.encoder.window_sizes},
                  {"maps_per_window", cfg.model.encoder.maps_per_window},
                  {"dropout", cfg.model.encoder.dropout_p},
                  {"embed_dim", cfg.model.encoder.embed_dim}};
  j["controller"] = {{"hidden_size", cfg.model.hidden_size},
                     {"decision_sharing", cfg.model.decision_sharing}};
  j["output"] = {{"fallback_non_default", cfg.model.fallback_non_default}};
  j["reward"] = {{"intermediate", cfg.reward.intermediate_r},
                 {"gamma", cfg.reward.gamma},
                 {"epsilon", cfg.reward.epsilon},
                 {"baseline_samples", cfg.reward.baseline_samples},
                 {"truncate_negative", cfg.reward.truncate_negative}};
  j["train"] = {{"batch_size", cfg.train.batch_size},
                {"max_epochs", cfg.train.max_epochs},
                {"patience", cfg.train.patience},
                {"mode", mode_name(cfg.train.mode)}};
  j["optimizer"] = {{"rho", cfg.optimizer.rho},
                    {"eps", cfg.optimizer.eps},
                    {"lr_scale", cfg.optimizer.lr_scale}};
  json data;
  data["schema"] = nullptr;
  if (cfg.inline_schema)
    data["schema"] = json::parse(schema_to_json(*cfg.inline_schema));
  else if (!cfg.schema_path.empty())
    data["schema"] = cfg.schema_path;
  data["embeddings"] =
      cfg.embedding_path.empty() ? json(nullptr) : json(cfg.embedding_path);
  data["train"] = cfg.train_path.empty() ? json(nullptr) : json(cfg.train_path);
  data["dev"] = cfg.dev_path.empty() ? json(nullptr) : json(cfg.dev_path);
  data["min_count"] = cfg.vocab_min_count;
  data["max_sentence_tokens"] = cfg.limits.max_sentence_tokens;
  data["max_sentences"] = cfg.limits.max_sentences;
  j["data"] = data;
  return j;
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& origin, const std::string& section) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      fail_format(origin + ": unknown key \"" + key + "\" in " + section);
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  return j[key].get<T>();
}

std::string get_path(const json& j, const std::string& key) {
  if (!j.contains(key) || j[key].is_null()) return {};
  return j[key].get<std::string>();
}

}  // namespace

RunConfig config_from_json(const json& j, const std::string& origin) {
  if (!j.is_object()) fail_format(origin + ": config must be a JSON object");
  check_keys(j, {"seed", "encoder", "controller", "output", "reward", "train",
                 "optimizer", "data"},
             origin, "config root");
  RunConfig cfg;
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);

  if (j.contains("encoder")) {
    const json& e = j["encoder"];
    check_keys(e, {"window_sizes", "maps_per_window", "dropout", "embed_dim"},
               origin, "encoder");
    cfg.model.encoder.window_sizes = get_or<std::vector<std::size_t>>(
        e, "window_sizes", cfg.model.encoder.window_sizes);
    cfg.model.encoder.maps_per_window = get_or<std::size_t>(
        e, "maps_per_window", cfg.model.encoder.maps_per_window);
    cfg.model.encoder.dropout_p =
        get_or<Real>(e, "dropout", cfg.model.encoder.dropout_p);
    cfg.model.encoder.embed_dim =
        get_or<std::size_t>(e, "embed_dim", cfg.model.encoder.embed_dim);
    if (cfg.model.encoder.window_sizes.empty())
      fail_format(origin + ": encoder.window_sizes must not be empty");
    for (std::size_t h : cfg.model.encoder.window_sizes)
      if (h < 1) fail_format(origin + ": window sizes must be >= 1");
    if (cfg.model.encoder.dropout_p < 0 || cfg.model.encoder.dropout_p >= 1)
      fail_format(origin + ": encoder.dropout must lie in [0, 1)");
  }
  if (j.contains("controller")) {
    const json& c = j["controller"];
    check_keys(c, {"hidden_size", "decision_sharing"}, origin, "controller");
    cfg.model.hidden_size =
        get_or<std::size_t>(c, "hidden_size", cfg.model.hidden_size);
    cfg.model.decision_sharing =
        get_or<bool>(c, "decision_sharing", cfg.model.decision_sharing);
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, {"fallback_non_default"}, origin, "output");
    cfg.model.fallback_non_default =
        get_or<bool>(o, "fallback_non_default", cfg.model.fallback_non_default);
  }
  if (j.contains("reward")) {
    const json& r = j["reward"];
    check_keys(r,
               {"intermediate", "gamma", "epsilon", "baseline_samples",
                "truncate_negative"},
               origin, "reward");
    cfg.reward.intermediate_r =
        get_or<Real>(r, "intermediate", cfg.reward.intermediate_r);
    cfg.reward.gamma = get_or<Real>(r, "gamma", cfg.reward.gamma);
    cfg.reward.epsilon = get_or<Real>(r, "epsilon", cfg.reward.epsilon);
    cfg.reward.baseline_samples = get_or<std::size_t>(
        r, "baseline_samples", cfg.reward.baseline_samples);
    cfg.reward.truncate_negative =
        get_or<bool>(r, "truncate_negative", cfg.reward.truncate_negative);
    if (cfg.reward.gamma < 0 || cfg.reward.gamma > 1)
      fail_format(origin + ": reward.gamma must lie in [0, 1]");
    if (cfg.reward.epsilon < 0 || cfg.reward.epsilon > 1)
      fail_format(origin + ": reward.epsilon must lie in [0, 1]");
    if (cfg.reward.intermediate_r < 0)
      fail_format(origin + ": reward.intermediate must be >= 0");
    if (cfg.reward.baseline_samples < 1)
      fail_format(origin + ": reward.baseline_samples must be >= 1");
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    check_keys(t, {"batch_size", "max_epochs", "patience", "mode"}, origin,
               "train");
    cfg.train.batch_size =
        get_or<std::size_t>(t, "batch_size", cfg.train.batch_size);
    cfg.train.max_epochs =
        get_or<std::size_t>(t, "max_epochs", cfg.train.max_epochs);
    cfg.train.patience = get_or<std::size_t>(t, "patience", cfg.train.patience);
    if (t.contains("mode") && !t["mode"].is_null())
      cfg.train.mode = mode_from_name(t["mode"].get<std::string>());
    if (cfg.train.batch_size < 1)
      fail_format(origin + ": train.batch_size must be >= 1");
  }
  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    check_keys(o, {"rho", "eps", "lr_scale"}, origin, "optimizer");
    cfg.optimizer.rho = get_or<Real>(o, "rho", cfg.optimizer.rho);
    cfg.optimizer.eps = get_or<Real>(o, "eps", cfg.optimizer.eps);
    cfg.optimizer.lr_scale = get_or<Real>(o, "lr_scale", cfg.optimizer.lr_scale);
  }
  if (j.contains("data")) {
    const json& d = j["data"];
    check_keys(d,
               {"schema", "embeddings", "train", "dev", "min_count",
                "max_sentence_tokens", "max_sentences"},
               origin, "data");
    if (d.contains("schema") && !d["schema"].is_null()) {
      if (d["schema"].is_string())
        cfg.schema_path = d["schema"].get<std::string>();
      else
        cfg.inline_schema =
            parse_schema_json(d["schema"].dump(), origin + " (inline schema)");
    }
    cfg.embedding_path = get_path(d, "embeddings");
    cfg.train_path = get_path(d, "train");
    cfg.dev_path = get_path(d, "dev");
    cfg.vocab_min_count =
        get_or<std::size_t>(d, "min_count", cfg.vocab_min_count);
    cfg.limits.max_sentence_tokens = get_or<std::size_t>(
        d, "max_sentence_tokens", cfg.limits.max_sentence_tokens);
    cfg.limits.max_sentences =
        get_or<std::size_t>(d, "max_sentences", cfg.limits.max_sentences);
  }
  cfg.train.seed = cfg.seed;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    fail_format(path + ": invalid JSON: " + e.what());
  }
  return config_from_json(j, path);
}

SlotSchema resolve_schema(const RunConfig& cfg) {
  if (cfg.inline_schema) return *cfg.inline_schema;
  if (cfg.schema_path.empty())
    fail_invalid("config does not specify a schema (data.schema)");
  return load_schema(cfg.schema_path);
}

}  // namespace jumper
