#include "support/synthetic.hpp"

#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace synth {

namespace {

const std::vector<std::string> kClasses = {"alpha", "beta", "gamma"};
const std::vector<std::string> kTriggers = {"zebra", "quartz", "marble"};

const std::vector<std::string> kFiller = {
    "the",  "report", "notes", "case",  "day",   "work",  "file",  "item",
    "plan", "team",   "visit", "memo",  "desk",  "phone", "order", "week",
    "note", "room",   "door",  "list",  "page",  "form",  "call",  "shift",
    "crew", "task",   "site",  "line",  "unit",  "draft"};

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

std::string filler_sentence(std::mt19937_64& rng, const Options& opt) {
  const std::size_t words = pick(rng, opt.min_words, opt.max_words);
  std::string s;
  for (std::size_t w = 0; w < words; ++w) {
    if (w) s += ' ';
    s += kFiller[rng() % kFiller.size()];
  }
  return s + " .";
}

std::string trigger_sentence(std::mt19937_64& rng, const Options& opt,
                             const std::string& trigger) {
  const std::size_t words = pick(rng, opt.min_words, opt.max_words);
  const std::size_t slot = rng() % words;
  std::string s;
  for (std::size_t w = 0; w < words; ++w) {
    if (w) s += ' ';
    s += w == slot ? trigger : kFiller[rng() % kFiller.size()];
  }
  return s + " .";
}

}  // namespace

Corpus make_corpus(const Options& opt) {
  std::mt19937_64 rng(opt.seed);
  Corpus out;
  out.trigger_tokens = kTriggers;

  nlohmann::json schema;
  schema["slots"] = {{{"name", "label"}, {"classes", kClasses}}};
  out.schema_json = schema.dump();

  for (std::size_t i = 0; i < opt.paragraphs; ++i) {
    const std::size_t cls = rng() % kClasses.size();  // 0-based
    const std::size_t sentences = pick(rng, opt.min_sentences, opt.max_sentences);
    const std::size_t key = rng() % sentences;

    std::string text;
    for (std::size_t s = 0; s < sentences; ++s) {
      if (s) text += ' ';
      text += s == key ? trigger_sentence(rng, opt, kTriggers[cls])
                       : filler_sentence(rng, opt);
    }

    nlohmann::json line;
    line["id"] = i;
    line["text"] = text;
    line["labels"] = {{"label", kClasses[cls]}};
    out.corpus_lines.push_back(line.dump());

    nlohmann::json gold;
    gold["id"] = i;
    gold["slot"] = "label";
    gold["gold_jump"] = key;  // 0-based sentence index
    out.gold_lines.push_back(gold.dump());

    out.labels.push_back(static_cast<int>(cls) + 1);
    out.trigger_sentence.push_back(key);
  }
  return out;
}

std::string write_lines(const std::string& path,
                        const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const std::string& line : lines) out << line << '\n';
  return path;
}

}  // namespace synth
