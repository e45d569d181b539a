/*
 * jumper — sequential-decision text classifier.
 *
 * C interface to the classifier core: a model reads a paragraph sentence by
 * sentence and, per configured slot, may jump exactly once from the default
 * "None" state to a concrete class. The library covers training (REINFORCE
 * with shaped rewards, or a cross-entropy comparator), greedy evaluation,
 * batch prediction, and word-level rationale extraction.
 *
 * Conventions:
 *   - All functions returning jumper_status set a thread-local error
 *     message retrievable via jumper_last_error() on failure.
 *   - Strings returned through char** out-parameters are heap-allocated
 *     and must be released with jumper_string_free().
 *   - Configuration, reports, metrics and explanations are JSON strings;
 *     datasets are JSON-lines files. See jumper_default_config() for the
 *     full configuration tree with its default values.
 */

#ifndef JUMPER_JUMPER_H
#define JUMPER_JUMPER_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define JUMPER_API __declspec(dllexport)
#else
#define JUMPER_API __attribute__((visibility("default")))
#endif

typedef enum jumper_status {
  JUMPER_OK = 0,
  JUMPER_ERROR_INVALID_ARGUMENT = 1,
  JUMPER_ERROR_IO = 2,
  JUMPER_ERROR_FORMAT = 3,
  JUMPER_ERROR_RUNTIME = 4
} jumper_status;

/* Opaque model handle. Not internally synchronized: training requires
 * exclusive access; concurrent read-only use (evaluate/predict/explain)
 * is safe. */
typedef struct jumper_model jumper_model;

JUMPER_API const char* jumper_version(void);

/* Thread-local message for the most recent failure on this thread. */
JUMPER_API const char* jumper_last_error(void);

JUMPER_API void jumper_string_free(char* s);

/* The complete default configuration as a JSON document. */
JUMPER_API jumper_status jumper_default_config(char** config_json_out);

/* Creates an untrained model from a configuration. The config must name a
 * slot schema (data.schema: a path or an inline object); the vocabulary and
 * parameters come into existence on the first jumper_train call. */
JUMPER_API jumper_status jumper_model_create(const char* config_json,
                                             jumper_model** out);

JUMPER_API jumper_status jumper_model_load(const char* checkpoint_path,
                                           jumper_model** out);

JUMPER_API jumper_status jumper_model_save(const jumper_model* model,
                                           const char* checkpoint_path);

JUMPER_API void jumper_model_free(jumper_model* model);

/* Invoked after every epoch with one JSON record:
 * {"epoch", "train_reward_mean", "dev_CA", "dev_F1", "elapsed_s"} */
typedef void (*jumper_epoch_fn)(const char* epoch_json, void* user);

/* Trains on a JSON-lines corpus with early stopping on the dev set; the
 * model keeps the best-dev parameters. report_jsonl_out (optional) receives
 * the per-epoch records, one JSON object per line. */
JUMPER_API jumper_status jumper_train(jumper_model* model,
                                      const char* train_path,
                                      const char* dev_path,
                                      jumper_epoch_fn on_epoch, void* user,
                                      char** report_jsonl_out);

/* Greedy evaluation. metrics_json_out receives
 * {"CA", "avg_T", "avg_jump", "reduced", "macro_F1", "per_slot", ...};
 * "JA" and "OA" appear only when rationale_gold_path (nullable) provides
 * gold jump annotations. */
JUMPER_API jumper_status jumper_evaluate(const jumper_model* model,
                                         const char* data_path,
                                         const char* rationale_gold_path,
                                         char** metrics_json_out);

/* One JSON line per input line, in order:
 * {"id", "predictions": {slot: {"class", "jump_step"}}} */
JUMPER_API jumper_status jumper_predict(const jumper_model* model,
                                        const char* data_path,
                                        char** predictions_jsonl_out);

/* Per-step decision distributions, jump steps, final predictions, and the
 * word-importance rationale for the jump sentence of one paragraph.
 * slot (nullable) restricts the output to a single slot. */
JUMPER_API jumper_status jumper_explain(const jumper_model* model,
                                        const char* text, const char* slot,
                                        char** explain_json_out);

#ifdef __cplusplus
}
#endif

#endif /* JUMPER_JUMPER_H */
