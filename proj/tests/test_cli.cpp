// End-to-end checks of the command-line tool: spawns the real binary and
// inspects exit codes, stdout payloads and produced files.

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "support/synthetic.hpp"

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const fs::path dir = fs::temp_directory_path() / "jumper_cli_out";
  fs::create_directories(dir);
  const std::string stdout_path = (dir / "stdout.txt").string();
  const std::string cmd = std::string(JUMPER_CLI_PATH) + " " + args + " >" +
                          stdout_path + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(stdout_path);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

struct CliFixture {
  fs::path dir;
  std::string config_path, schema_path, train_path, dev_path, gold_path;

  CliFixture() {
    dir = fs::temp_directory_path() / "jumper_cli_fixture";
    fs::create_directories(dir);

    synth::Options opt;
    opt.paragraphs = 70;
    opt.seed = 5;
    synth::Corpus corpus = synth::make_corpus(opt);

    schema_path = (dir / "schema.json").string();
    std::ofstream(schema_path) << corpus.schema_json;

    std::vector<std::string> train_lines, dev_lines;
    for (std::size_t i = 0; i < corpus.corpus_lines.size(); ++i)
      (i % 5 == 0 ? dev_lines : train_lines).push_back(corpus.corpus_lines[i]);
    train_path = synth::write_lines((dir / "train.jsonl").string(), train_lines);
    dev_path = synth::write_lines((dir / "dev.jsonl").string(), dev_lines);
    gold_path = synth::write_lines((dir / "gold.jsonl").string(), corpus.gold_lines);

    json cfg;
    cfg["seed"] = 11;
    cfg["encoder"] = {{"window_sizes", {1, 2}},
                      {"maps_per_window", 4},
                      {"dropout", 0.5},
                      {"embed_dim", 8}};
    cfg["controller"] = {{"hidden_size", 6}, {"decision_sharing", false}};
    cfg["train"] = {{"batch_size", 16}, {"max_epochs", 2}, {"patience", 5},
                    {"mode", "reinforce"}};
    cfg["data"] = {{"schema", schema_path}};
    config_path = (dir / "config.json").string();
    std::ofstream(config_path) << cfg.dump(2);
  }

  ~CliFixture() { fs::remove_all(dir); }

  std::string file(const std::string& name) const {
    return (dir / name).string();
  }

  std::string train_args(const std::string& out,
                         const std::string& extra = "") const {
    return "train --config " + config_path + " --train " + train_path +
           " --dev " + dev_path + " --out " + out + " " + extra;
  }
};

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("train --config only").exit_code == 1);
  CHECK(run_cli("nonsense-subcommand").exit_code == 1);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("print-default-config emits valid JSON") {
  RunResult r = run_cli("--print-default-config");
  CHECK(r.exit_code == 0);
  json cfg = json::parse(r.out);
  CHECK(cfg["train"]["batch_size"] == 50);
}

TEST_CASE_FIXTURE(CliFixture, "full train / eval / predict / explain cycle") {
  const std::string ckpt = file("model.ckpt");
  RunResult trained = run_cli(train_args(ckpt));
  REQUIRE(trained.exit_code == 0);
  CHECK(fs::exists(ckpt));
  // stdout carries the epoch records as JSON lines
  std::istringstream lines(trained.out);
  std::string line;
  std::size_t epochs = 0;
  while (std::getline(lines, line)) {
    json r = json::parse(line);
    CHECK(r.contains("dev_CA"));
    ++epochs;
  }
  CHECK(epochs == 2);

  RunResult eval = run_cli("eval --model " + ckpt + " --data " + dev_path);
  REQUIRE(eval.exit_code == 0);
  json metrics = json::parse(eval.out);
  CHECK(metrics.contains("CA"));
  CHECK_FALSE(metrics.contains("JA"));

  RunResult eval_gold = run_cli("eval --model " + ckpt + " --data " + dev_path +
                                " --rationale-gold " + gold_path);
  REQUIRE(eval_gold.exit_code == 0);
  json with_gold = json::parse(eval_gold.out);
  CHECK(with_gold.contains("JA"));
  CHECK(with_gold["OA"].get<double>() ==
        doctest::Approx(with_gold["CA"].get<double>() *
                        with_gold["JA"].get<double>()));

  const std::string pred_path = file("preds.jsonl");
  RunResult pred = run_cli("predict --model " + ckpt + " --data " + dev_path +
                           " --out " + pred_path);
  REQUIRE(pred.exit_code == 0);

  // cross-command consistency: recomputing CA from the prediction file and
  // the gold labels matches eval's CA
  std::map<std::int64_t, std::string> gold_by_id;
  {
    std::ifstream in(dev_path);
    std::string dev_line;
    while (std::getline(in, dev_line)) {
      json j = json::parse(dev_line);
      gold_by_id[j["id"].get<std::int64_t>()] = j["labels"]["label"];
    }
  }
  std::ifstream pin(pred_path);
  std::string pline;
  std::size_t total = 0, correct = 0;
  while (std::getline(pin, pline)) {
    json p = json::parse(pline);
    ++total;
    correct += p["predictions"]["label"]["class"] ==
               gold_by_id.at(p["id"].get<std::int64_t>());
  }
  CHECK(total == gold_by_id.size());
  CHECK(static_cast<double>(correct) / static_cast<double>(total) ==
        doctest::Approx(metrics["CA"].get<double>()).epsilon(1e-12));

  RunResult explain = run_cli("explain --model " + ckpt +
                              " --input \"the crew saw a zebra. more filler text.\"");
  REQUIRE(explain.exit_code == 0);
  json e = json::parse(explain.out);
  CHECK(e["slots"].contains("label"));

  RunResult bad_slot = run_cli("explain --model " + ckpt +
                               " --input \"text.\" --slot missing");
  CHECK(bad_slot.exit_code == 1);
}

TEST_CASE_FIXTURE(CliFixture, "same seed twice gives byte-identical checkpoints") {
  const std::string a = file("a.ckpt");
  const std::string b = file("b.ckpt");
  REQUIRE(run_cli(train_args(a, "--seed 31")).exit_code == 0);
  REQUIRE(run_cli(train_args(b, "--seed 31")).exit_code == 0);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string bytes = slurp(a);
  CHECK(!bytes.empty());
  CHECK(bytes == slurp(b));

  const std::string c = file("c.ckpt");
  REQUIRE(run_cli(train_args(c, "--seed 32")).exit_code == 0);
  CHECK(bytes != slurp(c));
}

TEST_CASE_FIXTURE(CliFixture, "runtime failures exit with code 2") {
  // config naming a schema file that does not exist
  json cfg = json::parse(std::ifstream(config_path), nullptr, true);
  cfg["data"]["schema"] = file("missing_schema.json");
  const std::string broken = file("broken_config.json");
  std::ofstream(broken) << cfg.dump();
  RunResult r = run_cli("train --config " + broken + " --train " + train_path +
                        " --dev " + dev_path + " --out " + file("x.ckpt"));
  CHECK(r.exit_code == 2);

  CHECK(run_cli("eval --model /nonexistent.ckpt --data " + dev_path).exit_code ==
        2);
}

TEST_CASE_FIXTURE(CliFixture, "predict on an empty corpus writes an empty file") {
  const std::string ckpt = file("empty_model.ckpt");
  REQUIRE(run_cli(train_args(ckpt)).exit_code == 0);
  const std::string empty_in = file("empty.jsonl");
  std::ofstream(empty_in).close();
  const std::string out_path = file("empty_out.jsonl");
  RunResult r = run_cli("predict --model " + ckpt + " --data " + empty_in +
                        " --out " + out_path);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out_path));
  CHECK(fs::file_size(out_path) == 0);

  // unwritable output path
  RunResult bad = run_cli("predict --model " + ckpt + " --data " + empty_in +
                          " --out /nonexistent_dir/preds.jsonl");
  CHECK(bad.exit_code == 2);
}
