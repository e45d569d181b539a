#include "core/text.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace jumper {

using nlohmann::json;

// ---- vocabulary -------------------------------------------------------------

Vocabulary::Vocabulary() {
  add(kPadToken);
  add(kUnkToken);
}

Vocabulary::Vocabulary(std::vector<std::string> id_to_token)
    : id_to_token_(std::move(id_to_token)) {
  if (id_to_token_.size() < 2 || id_to_token_[0] != kPadToken ||
      id_to_token_[1] != kUnkToken)
    fail_format("vocabulary must start with the reserved <pad>/<unk> entries");
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    auto [it, inserted] = token_to_id_.emplace(id_to_token_[i], static_cast<int>(i));
    if (!inserted) fail_format("duplicate vocabulary token: " + id_to_token_[i]);
  }
}

int Vocabulary::add(const std::string& token) {
  auto it = token_to_id_.find(token);
  if (it != token_to_id_.end()) return it->second;
  int id = static_cast<int>(id_to_token_.size());
  token_to_id_.emplace(token, id);
  id_to_token_.push_back(token);
  return id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
    fail_invalid("token id out of range: " + std::to_string(id));
  return id_to_token_[static_cast<std::size_t>(id)];
}

// ---- schema -------------------------------------------------------------------

int Slot::class_index(const std::string& cls) const {
  if (cls == "None") return 0;
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == cls) return static_cast<int>(i) + 1;
  return -1;
}

const std::string& Slot::class_name(int index) const {
  static const std::string none = "None";
  if (index == 0) return none;
  if (index < 0 || static_cast<std::size_t>(index) > classes.size())
    fail_invalid("class index out of range for slot " + name);
  return classes[static_cast<std::size_t>(index) - 1];
}

int SlotSchema::slot_index(const std::string& name) const {
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].name == name) return static_cast<int>(i);
  return -1;
}

std::size_t SlotSchema::total_state_width() const {
  std::size_t w = 0;
  for (const Slot& s : slots) w += s.action_count();
  return w;
}

std::string SlotSchema::slot_names_joined() const {
  std::string out;
  for (const Slot& s : slots) {
    if (!out.empty()) out += ", ";
    out += s.name;
  }
  return out;
}

SlotSchema parse_schema_json(const std::string& json_text,
                             const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail_format(origin + ": invalid schema JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("slots") || !j["slots"].is_array())
    fail_format(origin + ": schema requires a top-level \"slots\" array");
  SlotSchema schema;
  for (const auto& js : j["slots"]) {
    Slot slot;
    if (!js.contains("name") || !js.contains("classes"))
      fail_format(origin + ": each slot requires \"name\" and \"classes\"");
    slot.name = js["name"].get<std::string>();
    for (const auto& c : js["classes"]) {
      std::string cls = c.get<std::string>();
      if (cls == "None")
        fail_format(origin + ": \"None\" is reserved and not a listable class");
      if (std::find(slot.classes.begin(), slot.classes.end(), cls) !=
          slot.classes.end())
        fail_format(origin + ": duplicate class \"" + cls + "\" in slot " +
                    slot.name);
      slot.classes.push_back(std::move(cls));
    }
    if (slot.classes.empty())
      fail_format(origin + ": slot " + slot.name + " has no classes");
    if (schema.slot_index(slot.name) >= 0)
      fail_format(origin + ": duplicate slot name " + slot.name);
    schema.slots.push_back(std::move(slot));
  }
  if (schema.slots.empty()) fail_format(origin + ": schema has no slots");
  return schema;
}

SlotSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open schema file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_schema_json(ss.str(), path);
}

std::string schema_to_json(const SlotSchema& schema) {
  json slots = json::array();
  for (const Slot& s : schema.slots)
    slots.push_back({{"name", s.name}, {"classes", s.classes}});
  return json{{"slots", slots}}.dump();
}

// ---- segmentation / tokenization ------------------------------------------------

namespace {

bool is_delimiter(char c) {
  return c == ',' || c == '.' || c == '!' || c == '?';
}

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

// A segment counts only if something besides delimiters/whitespace remains.
bool has_content(const std::string& s) {
  for (char c : s)
    if (!is_space(c) && !is_delimiter(c)) return true;
  return false;
}

}  // namespace

std::vector<std::string> segment_paragraph(const std::string& text) {
  if (trim(text).empty()) fail_invalid("segment_paragraph: empty input text");
  std::vector<std::string> segments;
  std::string current;
  for (char c : text) {
    current.push_back(c);
    if (is_delimiter(c)) {
      if (has_content(current)) segments.push_back(trim(current));
      current.clear();
    }
  }
  if (has_content(current)) segments.push_back(trim(current));
  return segments;
}

namespace {

bool is_detachable_punct(char c) {
  static const std::string set = ",.!?;:\"()[]{}";
  return set.find(c) != std::string::npos;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& sentence) {
  std::vector<std::string> tokens;
  std::istringstream in(sentence);
  std::string chunk;
  while (in >> chunk) {
    std::transform(chunk.begin(), chunk.end(), chunk.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    std::size_t b = 0, e = chunk.size();
    std::vector<std::string> leading, trailing;
    while (b < e && is_detachable_punct(chunk[b]))
      leading.push_back(std::string(1, chunk[b++]));
    while (e > b && is_detachable_punct(chunk[e - 1]))
      trailing.push_back(std::string(1, chunk[--e]));
    for (auto& t : leading) tokens.push_back(std::move(t));
    if (e > b) tokens.push_back(chunk.substr(b, e - b));
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it)
      tokens.push_back(std::move(*it));
  }
  return tokens;
}

// ---- paragraphs ---------------------------------------------------------------

Paragraph make_paragraph(const std::string& text, const Vocabulary& vocab,
                         const ParagraphLimits& limits) {
  Paragraph p;
  std::vector<std::string> raw = segment_paragraph(text);
  if (raw.size() > limits.max_sentences) {
    std::fprintf(stderr,
                 "warning: paragraph truncated from %zu to %zu sentences\n",
                 raw.size(), limits.max_sentences);
    raw.resize(limits.max_sentences);
  }
  for (std::string& sentence : raw) {
    std::vector<std::string> toks = tokenize(sentence);
    if (toks.empty()) continue;
    if (toks.size() > limits.max_sentence_tokens) {
      std::fprintf(stderr,
                   "warning: sentence truncated from %zu to %zu tokens\n",
                   toks.size(), limits.max_sentence_tokens);
      toks.resize(limits.max_sentence_tokens);
    }
    std::vector<int> ids;
    ids.reserve(toks.size());
    for (const std::string& t : toks) ids.push_back(vocab.id(t));
    p.sentences.push_back(std::move(ids));
    p.raw_sentences.push_back(std::move(sentence));
  }
  if (p.sentences.empty())
    fail_invalid("paragraph has no tokenizable sentences");
  return p;
}

// ---- corpus loading -------------------------------------------------------------

namespace {

Example parse_corpus_line(const std::string& line, std::size_t line_no,
                          const SlotSchema& schema, const std::string& path) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    fail_format(path + ":" + std::to_string(line_no) + ": invalid JSON: " +
                e.what());
  }
  if (!j.is_object() || !j.contains("text") || !j["text"].is_string())
    fail_format(path + ":" + std::to_string(line_no) +
                ": corpus line requires a \"text\" string");
  Example ex;
  ex.id = j.value("id", static_cast<std::int64_t>(line_no - 1));
  ex.text = j["text"].get<std::string>();
  if (trim(ex.text).empty())
    fail_format(path + ":" + std::to_string(line_no) + ": empty \"text\"");
  ex.gold.assign(schema.slot_count(), 0);
  ex.gold_jump.assign(schema.slot_count(), std::nullopt);
  if (j.contains("labels")) {
    if (!j["labels"].is_object())
      fail_format(path + ":" + std::to_string(line_no) +
                  ": \"labels\" must be an object");
    for (const auto& [slot_name, value] : j["labels"].items()) {
      int si = schema.slot_index(slot_name);
      if (si < 0)
        fail_format(path + ":" + std::to_string(line_no) + ": unknown slot \"" +
                    slot_name + "\" (valid: " + schema.slot_names_joined() + ")");
      if (value.is_null()) {
        ex.gold[static_cast<std::size_t>(si)] = 0;
        continue;
      }
      if (!value.is_string())
        fail_format(path + ":" + std::to_string(line_no) +
                    ": label for slot \"" + slot_name + "\" must be a string or null");
      const std::string cls = value.get<std::string>();
      int ci = schema.slots[static_cast<std::size_t>(si)].class_index(cls);
      if (ci < 0)
        fail_format(path + ":" + std::to_string(line_no) + ": unknown class \"" +
                    cls + "\" for slot \"" + slot_name + "\"");
      ex.gold[static_cast<std::size_t>(si)] = ci;
    }
  }
  return ex;
}

}  // namespace

Dataset load_corpus_raw(const std::string& path, const SlotSchema& schema) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open corpus file: " + path);
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    data.examples.push_back(parse_corpus_line(line, line_no, schema, path));
  }
  return data;
}

void encode_dataset(Dataset& data, const Vocabulary& vocab,
                    const ParagraphLimits& limits) {
  for (Example& ex : data.examples)
    ex.paragraph = make_paragraph(ex.text, vocab, limits);
}

Dataset load_corpus(const std::string& path, const SlotSchema& schema,
                    const Vocabulary& vocab, const ParagraphLimits& limits) {
  Dataset data = load_corpus_raw(path, schema);
  encode_dataset(data, vocab, limits);
  return data;
}

void attach_rationale_gold(Dataset& data, const SlotSchema& schema,
                           const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open rationale gold file: " + path);
  std::map<std::int64_t, std::size_t> by_id;
  for (std::size_t i = 0; i < data.examples.size(); ++i)
    by_id[data.examples[i].id] = i;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail_format(path + ":" + std::to_string(line_no) + ": invalid JSON: " +
                  e.what());
    }
    if (!j.contains("id") || !j.contains("slot") || !j.contains("gold_jump"))
      fail_format(path + ":" + std::to_string(line_no) +
                  ": record requires id, slot, gold_jump");
    auto it = by_id.find(j["id"].get<std::int64_t>());
    if (it == by_id.end()) continue;  // annotation for an example not loaded
    int si = schema.slot_index(j["slot"].get<std::string>());
    if (si < 0)
      fail_format(path + ":" + std::to_string(line_no) + ": unknown slot \"" +
                  j["slot"].get<std::string>() + "\"");
    // gold files carry 0-based sentence indices; steps are 1-based
    data.examples[it->second].gold_jump[static_cast<std::size_t>(si)] =
        j["gold_jump"].get<int>() + 1;
  }
}

// ---- vocab / embeddings ----------------------------------------------------------

Vocabulary build_vocab(const Dataset& data, std::size_t min_count) {
  if (data.examples.empty()) fail_invalid("build_vocab: empty corpus");
  std::map<std::string, std::size_t> freq;
  for (const Example& ex : data.examples)
    for (const std::string& sentence : segment_paragraph(ex.text))
      for (const std::string& tok : tokenize(sentence)) ++freq[tok];
  std::vector<std::pair<std::string, std::size_t>> entries(freq.begin(),
                                                           freq.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab;
  for (const auto& [tok, count] : entries)
    if (count >= min_count) vocab.add(tok);
  return vocab;
}

EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t dim,
                                 std::uint64_t seed) {
  EmbeddingTable table;
  table.dim = dim;
  table.values.assign(vocab.size() * dim, Real{0});
  table.pretrained.assign(vocab.size(), 0);
  Rng rng(derive_seed(seed, 0x9a7));
  // PAD row stays zero so padding is inert
  for (std::size_t row = 1; row < vocab.size(); ++row)
    for (std::size_t k = 0; k < dim; ++k)
      table.values[row * dim + k] = uniform_real(rng, Real{-0.01}, Real{0.01});
  return table;
}

EmbeddingTable load_pretrained_embeddings(const std::string& path,
                                          const Vocabulary& vocab,
                                          std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open embedding file: " + path);
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<Real>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    std::vector<Real> vals;
    double x;
    while (ls >> x) vals.push_back(static_cast<Real>(x));
    if (!ls.eof())
      fail_format(path + ":" + std::to_string(line_no) +
                  ": non-numeric embedding value");
    if (vals.empty())
      fail_format(path + ":" + std::to_string(line_no) + ": no values on line");
    if (dim == 0) dim = vals.size();
    if (vals.size() != dim)
      fail_format(path + ":" + std::to_string(line_no) + ": expected " +
                  std::to_string(dim) + " values, found " +
                  std::to_string(vals.size()));
    rows.emplace(std::move(tok), std::move(vals));
  }
  if (dim == 0) fail_format(path + ": embedding file has no rows");

  EmbeddingTable table = random_embeddings(vocab, dim, seed);
  for (std::size_t id = 2; id < vocab.size(); ++id) {
    auto it = rows.find(vocab.token(static_cast<int>(id)));
    if (it == rows.end()) continue;
    std::copy(it->second.begin(), it->second.end(),
              table.values.begin() + static_cast<std::ptrdiff_t>(id * dim));
    table.pretrained[id] = 1;
  }
  return table;
}

// ---- splits ------------------------------------------------------------------------

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(derive_seed(seed, 0x5f117));
  fisher_yates(idx, rng);
  return idx;
}

}  // namespace

DatasetSplit split_holdout(std::size_t n, double dev_fraction,
                           std::uint64_t seed) {
  if (dev_fraction < 0 || dev_fraction > 1)
    fail_invalid("split_holdout: dev fraction must be in [0, 1]");
  std::vector<std::size_t> idx = shuffled_indices(n, seed);
  const auto dev_count = static_cast<std::size_t>(
      std::llround(dev_fraction * static_cast<double>(n)));
  DatasetSplit split;
  split.folds.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(dev_count),
                           idx.end());
  split.folds.emplace_back(idx.begin(),
                           idx.begin() + static_cast<std::ptrdiff_t>(dev_count));
  return split;
}

DatasetSplit split_kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k > n)
    fail_invalid("split_kfold: need 1 <= k <= dataset size, got k = " +
                 std::to_string(k) + " over " + std::to_string(n));
  std::vector<std::size_t> idx = shuffled_indices(n, seed);
  DatasetSplit split;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t len = n / k + (f < n % k ? 1 : 0);
    split.folds.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(pos),
                             idx.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return split;
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.examples.reserve(indices.size());
  for (std::size_t i : indices) out.examples.push_back(data.examples.at(i));
  return out;
}

}  // namespace jumper
