#include "jumper/jumper.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "core/session.hpp"

using jumper::Error;
using jumper::ErrorKind;
using jumper::Session;

struct jumper_model {
  Session session;
};

namespace {

thread_local std::string g_last_error;

jumper_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument:
      return JUMPER_ERROR_INVALID_ARGUMENT;
    case ErrorKind::io:
      return JUMPER_ERROR_IO;
    case ErrorKind::format:
      return JUMPER_ERROR_FORMAT;
    case ErrorKind::runtime:
      return JUMPER_ERROR_RUNTIME;
  }
  return JUMPER_ERROR_RUNTIME;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
jumper_status guarded(Fn&& fn) {
  try {
    fn();
    return JUMPER_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return JUMPER_ERROR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return JUMPER_ERROR_RUNTIME;
  }
}

jumper_status invalid(const char* message) {
  g_last_error = message;
  return JUMPER_ERROR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* jumper_version(void) { return "1.0.0"; }

const char* jumper_last_error(void) { return g_last_error.c_str(); }

void jumper_string_free(char* s) { std::free(s); }

jumper_status jumper_default_config(char** config_json_out) {
  if (!config_json_out) return invalid("config_json_out must not be null");
  return guarded([&] {
    *config_json_out =
        copy_string(jumper::config_to_json(jumper::default_config()).dump(2));
  });
}

jumper_status jumper_model_create(const char* config_json, jumper_model** out) {
  if (!config_json || !out)
    return invalid("config_json and out must not be null");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::format,
                  std::string("invalid config JSON: ") + e.what());
    }
    auto cfg = jumper::config_from_json(j, "config");
    *out = new jumper_model{Session::create(std::move(cfg))};
  });
}

jumper_status jumper_model_load(const char* checkpoint_path,
                                jumper_model** out) {
  if (!checkpoint_path || !out)
    return invalid("checkpoint_path and out must not be null");
  return guarded([&] { *out = new jumper_model{Session::load(checkpoint_path)}; });
}

jumper_status jumper_model_save(const jumper_model* model,
                                const char* checkpoint_path) {
  if (!model || !checkpoint_path)
    return invalid("model and checkpoint_path must not be null");
  return guarded([&] { model->session.save(checkpoint_path); });
}

void jumper_model_free(jumper_model* model) { delete model; }

jumper_status jumper_train(jumper_model* model, const char* train_path,
                           const char* dev_path, jumper_epoch_fn on_epoch,
                           void* user, char** report_jsonl_out) {
  if (!model || !train_path || !dev_path)
    return invalid("model, train_path and dev_path must not be null");
  return guarded([&] {
    std::function<void(const nlohmann::json&)> cb;
    if (on_epoch)
      cb = [on_epoch, user](const nlohmann::json& record) {
        on_epoch(record.dump().c_str(), user);
      };
    nlohmann::json report = model->session.train(train_path, dev_path, cb);
    if (report_jsonl_out) {
      std::string lines;
      for (const auto& record : report) {
        lines += record.dump();
        lines += '\n';
      }
      *report_jsonl_out = copy_string(lines);
    }
  });
}

jumper_status jumper_evaluate(const jumper_model* model, const char* data_path,
                              const char* rationale_gold_path,
                              char** metrics_json_out) {
  if (!model || !data_path || !metrics_json_out)
    return invalid("model, data_path and metrics_json_out must not be null");
  return guarded([&] {
    nlohmann::json metrics = model->session.evaluate(
        data_path, rationale_gold_path ? rationale_gold_path : "");
    *metrics_json_out = copy_string(metrics.dump(2));
  });
}

jumper_status jumper_predict(const jumper_model* model, const char* data_path,
                             char** predictions_jsonl_out) {
  if (!model || !data_path || !predictions_jsonl_out)
    return invalid("model, data_path and predictions_jsonl_out must not be null");
  return guarded([&] {
    nlohmann::json lines = model->session.predict(data_path);
    std::string out;
    for (const auto& record : lines) {
      out += record.dump();
      out += '\n';
    }
    *predictions_jsonl_out = copy_string(out);
  });
}

jumper_status jumper_explain(const jumper_model* model, const char* text,
                             const char* slot, char** explain_json_out) {
  if (!model || !text || !explain_json_out)
    return invalid("model, text and explain_json_out must not be null");
  return guarded([&] {
    nlohmann::json out = model->session.explain(text, slot ? slot : "");
    *explain_json_out = copy_string(out.dump(2));
  });
}

}  // extern "C"
