#include "core/session.hpp"

#include <algorithm>

#include "core/metrics.hpp"

namespace jumper {

using nlohmann::json;

Session Session::create(RunConfig cfg) {
  Session s;
  s.cfg_ = std::move(cfg);
  return s;
}

Session Session::load(const std::string& checkpoint_path) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  Session s;
  s.cfg_ = std::move(ckpt.config);
  s.schema_ = std::move(ckpt.schema);
  s.vocab_ = std::move(ckpt.vocab);
  s.model_ = std::make_unique<Model>(*s.schema_, s.cfg_.model,
                                     std::move(ckpt.params));
  return s;
}

const Model& Session::model() const {
  if (!model_) fail_invalid("session has no trained model yet");
  return *model_;
}

SlotSchema& Session::schema() {
  if (!schema_) schema_ = resolve_schema(cfg_);
  return *schema_;
}

const SlotSchema& Session::schema() const {
  if (!schema_) schema_ = resolve_schema(cfg_);
  return *schema_;
}

void Session::save(const std::string& checkpoint_path) const {
  if (!model_ || !vocab_) fail_invalid("cannot save: session has no model");
  save_checkpoint(checkpoint_path, cfg_, *schema_, *vocab_, model_->params());
}

Dataset Session::load_data(const std::string& path) const {
  if (!vocab_) fail_invalid("no vocabulary loaded");
  return load_corpus(path, schema(), *vocab_, cfg_.limits);
}

namespace {

json epoch_to_json(const EpochRecord& r) {
  return json{{"epoch", r.epoch},
              {"train_reward_mean", r.train_reward_mean},
              {"dev_CA", r.dev_ca},
              {"dev_F1", r.dev_f1},
              {"elapsed_s", r.elapsed_s}};
}

}  // namespace

json Session::train(const std::string& train_path, const std::string& dev_path,
                    const std::function<void(const json&)>& on_epoch) {
  SlotSchema& sch = schema();

  Dataset train_data = load_corpus_raw(train_path, sch);
  if (train_data.examples.empty())
    fail_invalid(train_path + ": training corpus is empty");

  if (!model_) {
    vocab_ = build_vocab(train_data, cfg_.vocab_min_count);
    EmbeddingTable table =
        cfg_.embedding_path.empty()
            ? random_embeddings(*vocab_, cfg_.model.encoder.embed_dim, cfg_.seed)
            : load_pretrained_embeddings(cfg_.embedding_path, *vocab_,
                                         cfg_.seed);
    if (table.dim != cfg_.model.encoder.embed_dim)
      cfg_.model.encoder.embed_dim = table.dim;  // pretrained file wins
    model_ = std::make_unique<Model>(sch, cfg_.model, table, cfg_.seed);
  }
  encode_dataset(train_data, *vocab_, cfg_.limits);
  Dataset dev = load_data(dev_path);

  EpochCallback cb;
  if (on_epoch)
    cb = [&](const EpochRecord& r) { on_epoch(epoch_to_json(r)); };

  TrainReport report;
  if (cfg_.train.mode == TrainConfig::Mode::reinforce)
    report = jumper::train(*model_, train_data, dev, cfg_.train, cfg_.reward,
                           cfg_.optimizer, cb);
  else
    report = train_xent(*model_, train_data, dev, cfg_.train, cfg_.optimizer, cb);

  json out = json::array();
  for (const EpochRecord& r : report.epochs) out.push_back(epoch_to_json(r));
  return out;
}

namespace {

std::vector<EvalRecord> to_records(const Dataset& data,
                                   const std::vector<std::vector<Prediction>>& preds,
                                   std::size_t slot_count) {
  std::vector<EvalRecord> records;
  records.reserve(data.size() * slot_count);
  for (std::size_t j = 0; j < data.size(); ++j)
    for (std::size_t i = 0; i < slot_count; ++i) {
      EvalRecord r;
      r.slot = i;
      r.predicted = preds[j][i].class_index;
      r.gold = data.examples[j].gold[i];
      r.predicted_jump = preds[j][i].jump_step;
      r.gold_jump = data.examples[j].gold_jump[i];
      r.sentence_count = data.examples[j].paragraph.sentence_count();
      records.push_back(r);
    }
  return records;
}

}  // namespace

json Session::evaluate(const std::string& data_path,
                       const std::string& rationale_gold_path) const {
  if (!model_) fail_invalid("evaluate requires a trained model");
  Dataset data = load_data(data_path);
  if (data.examples.empty()) fail_invalid(data_path + ": corpus is empty");
  if (!rationale_gold_path.empty())
    attach_rationale_gold(data, schema(), rationale_gold_path);

  auto preds =
      predict_dataset(*model_, data, cfg_.train.mode, worker_count());
  std::vector<EvalRecord> records =
      to_records(data, preds, schema().slot_count());

  json out;
  out["CA"] = classification_accuracy(records);
  ReducedReading rr = reduced_reading(records);
  out["avg_T"] = rr.avg_sentences;
  out["avg_jump"] = rr.avg_jump;
  out["reduced"] = rr.reduced_fraction;
  out["macro_F1"] = macro_f1(records, schema());

  const bool any_gold_jump =
      std::any_of(records.begin(), records.end(),
                  [](const EvalRecord& r) { return r.gold_jump.has_value(); });
  if (any_gold_jump) {
    out["JA"] = jumping_accuracy(records);
    out["OA"] = overall_accuracy(records);
  }

  json per_slot;
  for (std::size_t i = 0; i < schema().slot_count(); ++i) {
    std::vector<EvalRecord> slot_records;
    for (const EvalRecord& r : records)
      if (r.slot == i) slot_records.push_back(r);
    per_slot[schema().slots[i].name] = {
        {"CA", classification_accuracy(slot_records)},
        {"F1", macro_f1(slot_records, schema())}};
  }
  out["per_slot"] = per_slot;
  return out;
}

json Session::predict(const std::string& data_path) const {
  if (!model_) fail_invalid("predict requires a trained model");
  Dataset data = load_data(data_path);
  json lines = json::array();
  if (data.examples.empty()) return lines;
  auto preds =
      predict_dataset(*model_, data, cfg_.train.mode, worker_count());
  for (std::size_t j = 0; j < data.size(); ++j) {
    json slots;
    for (std::size_t i = 0; i < schema().slot_count(); ++i) {
      const Slot& slot = schema().slots[i];
      slots[slot.name] = {{"class", slot.class_name(preds[j][i].class_index)},
                          {"jump_step", preds[j][i].jump_step}};
    }
    lines.push_back({{"id", data.examples[j].id}, {"predictions", slots}});
  }
  return lines;
}

json Session::explain(const std::string& text,
                      const std::string& slot_filter) const {
  if (!model_) fail_invalid("explain requires a trained model");
  if (!slot_filter.empty() && schema().slot_index(slot_filter) < 0)
    fail_invalid("unknown slot \"" + slot_filter + "\" (valid slots: " +
                 schema().slot_names_joined() + ")");

  Paragraph paragraph = make_paragraph(text, *vocab_, cfg_.limits);
  EpisodeTrace trace = model_->forward(paragraph, DecodeMode::greedy, 0,
                                       /*train_mode=*/false, nullptr);
  RationaleConfig rcfg;
  rcfg.top_d = std::min<std::size_t>(rcfg.top_d, model_->feature_dim());

  json out;
  out["sentences"] = paragraph.raw_sentences;
  json slots;
  for (std::size_t i = 0; i < schema().slot_count(); ++i) {
    const Slot& slot = schema().slots[i];
    if (!slot_filter.empty() && slot.name != slot_filter) continue;

    json steps = json::array();
    for (const StepTrace& st : trace.steps) steps.push_back(st.probs[i]);

    json entry;
    entry["steps"] = steps;
    entry["jump_step"] = trace.jump_step[i];
    const bool jumped = trace.jumped(i);
    const int pred =
        model_->final_prediction(trace, i, cfg_.model.fallback_non_default);
    entry["prediction"] = slot.class_name(pred);
    if (!jumped && cfg_.model.fallback_non_default)
      entry["fallback_prediction"] = slot.class_name(pred);

    if (jumped) {
      const std::size_t t = trace.jump_step[i];
      std::vector<std::size_t> dims =
          rationale_dims(*model_, trace, i, t, rcfg);
      WordImportance wi = backtrack_words(*model_, dims,
                                          trace.steps[t - 1].enc, t - 1);
      json words = json::array();
      for (const auto& [pos, weight] : wi.weights) {
        const auto& toks = trace.steps[t - 1].enc.padded_tokens;
        const std::string token =
            pos < toks.size() ? vocab_->token(toks[pos]) : std::string("<pad>");
        words.push_back(
            {{"position", pos}, {"token", token}, {"weight", weight}});
      }
      entry["rationale"] = {{"slot", slot.name},
                            {"jump_step", t},
                            {"dims", dims},
                            {"word_importance", words}};
    }
    slots[slot.name] = entry;
  }
  out["slots"] = slots;
  return out;
}

}  // namespace jumper
