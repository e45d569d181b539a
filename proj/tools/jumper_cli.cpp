// Command-line front end for the jumper shared library. Talks to the core
// exclusively through the C API; stdout carries machine-readable JSON only,
// progress and diagnostics go to stderr.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "jumper/jumper.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

[[noreturn]] void fail(jumper_status status) {
  std::cerr << "error: " << jumper_last_error() << "\n";
  std::exit(status == JUMPER_ERROR_INVALID_ARGUMENT ? kExitUsage : kExitRuntime);
}

void check(jumper_status status) {
  if (status != JUMPER_OK) fail(status);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    std::exit(kExitRuntime);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ModelHandle {
  jumper_model* ptr = nullptr;
  ~ModelHandle() { jumper_model_free(ptr); }
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { jumper_string_free(ptr); }
};

int cmd_train(const std::string& config_path, const std::string& train_path,
              const std::string& dev_path, const std::string& out_path,
              const std::string& mode, const std::uint64_t* seed,
              const std::string& report_path) {
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(read_file(config_path));
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << config_path << ": invalid JSON: " << e.what()
              << "\n";
    return kExitRuntime;
  }
  if (!mode.empty()) config["train"]["mode"] = mode;
  if (seed) config["seed"] = *seed;

  ModelHandle model;
  check(jumper_model_create(config.dump().c_str(), &model.ptr));

  auto on_epoch = [](const char* epoch_json, void*) {
    std::cout << epoch_json << "\n" << std::flush;
    nlohmann::json r = nlohmann::json::parse(epoch_json);
    std::fprintf(stderr, "epoch %3d  reward %.4f  dev CA %.4f  dev F1 %.4f  (%.1fs)\n",
                 r["epoch"].get<int>(), r["train_reward_mean"].get<double>(),
                 r["dev_CA"].get<double>(), r["dev_F1"].get<double>(),
                 r["elapsed_s"].get<double>());
  };

  OwnedString report;
  check(jumper_train(model.ptr, train_path.c_str(), dev_path.c_str(), on_epoch,
                     nullptr, &report.ptr));
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::trunc);
    if (!out) {
      std::cerr << "error: cannot write report to " << report_path << "\n";
      return kExitRuntime;
    }
    out << report.ptr;
  }
  check(jumper_model_save(model.ptr, out_path.c_str()));
  std::cerr << "checkpoint written to " << out_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& gold_path) {
  ModelHandle model;
  check(jumper_model_load(model_path.c_str(), &model.ptr));
  OwnedString metrics;
  check(jumper_evaluate(model.ptr, data_path.c_str(),
                        gold_path.empty() ? nullptr : gold_path.c_str(),
                        &metrics.ptr));
  std::cout << metrics.ptr << "\n";
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
  ModelHandle model;
  check(jumper_model_load(model_path.c_str(), &model.ptr));
  OwnedString predictions;
  check(jumper_predict(model.ptr, data_path.c_str(), &predictions.ptr));
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write predictions to " << out_path << "\n";
    return kExitRuntime;
  }
  out << predictions.ptr;
  if (!out.good()) {
    std::cerr << "error: failed writing " << out_path << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_explain(const std::string& model_path, const std::string& input,
                const std::string& slot) {
  ModelHandle model;
  check(jumper_model_load(model_path.c_str(), &model.ptr));
  std::string text = input;
  if (std::filesystem::exists(input)) text = read_file(input);
  OwnedString explain;
  check(jumper_explain(model.ptr, text.c_str(),
                       slot.empty() ? nullptr : slot.c_str(), &explain.ptr));
  std::cout << explain.ptr << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jumper: sequential-decision text classifier"};
  app.require_subcommand(0, 1);

  bool print_default_config = false;
  app.add_flag("--print-default-config", print_default_config,
               "print the full default configuration tree and exit");

  std::string config_path, train_path, dev_path, out_path, mode, report_path;
  std::uint64_t seed_value = 0;
  auto* train = app.add_subcommand("train", "train a model from a config");
  train->add_option("--config", config_path, "config JSON file")->required();
  train->add_option("--train", train_path, "training corpus (JSON lines)")
      ->required();
  train->add_option("--dev", dev_path, "development corpus (JSON lines)")
      ->required();
  train->add_option("--out", out_path, "checkpoint output path")->required();
  train->add_option("--mode", mode, "override training mode (reinforce|xent)")
      ->check(CLI::IsMember({"reinforce", "xent"}));
  auto* seed_opt = train->add_option("--seed", seed_value, "override the run seed");
  train->add_option("--report", report_path,
                    "also write the epoch report to this file");

  std::string model_path, data_path, gold_path;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
  eval->add_option("--model", model_path, "checkpoint path")->required();
  eval->add_option("--data", data_path, "corpus (JSON lines)")->required();
  eval->add_option("--rationale-gold", gold_path,
                   "gold jump annotations (JSON lines) for JA/OA");

  std::string predict_model, predict_data, predict_out;
  auto* predict = app.add_subcommand("predict", "write per-example predictions");
  predict->add_option("--model", predict_model, "checkpoint path")->required();
  predict->add_option("--data", predict_data, "corpus (JSON lines)")->required();
  predict->add_option("--out", predict_out, "output path (JSON lines)")
      ->required();

  std::string explain_model, explain_input, explain_slot;
  auto* explain = app.add_subcommand(
      "explain", "per-step decision distributions and word rationale");
  explain->add_option("--model", explain_model, "checkpoint path")->required();
  explain->add_option("--input", explain_input, "paragraph text or a file path")
      ->required();
  explain->add_option("--slot", explain_slot, "restrict output to one slot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  if (print_default_config) {
    OwnedString config;
    check(jumper_default_config(&config.ptr));
    std::cout << config.ptr << "\n";
    return kExitOk;
  }

  if (train->parsed())
    return cmd_train(config_path, train_path, dev_path, out_path, mode,
                     seed_opt->count() ? &seed_value : nullptr, report_path);
  if (eval->parsed()) return cmd_eval(model_path, data_path, gold_path);
  if (predict->parsed())
    return cmd_predict(predict_model, predict_data, predict_out);
  if (explain->parsed())
    return cmd_explain(explain_model, explain_input, explain_slot);

  std::cerr << app.help() << "\n";
  return kExitUsage;
}
