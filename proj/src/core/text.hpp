#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/common.hpp"

namespace jumper {

// ---- vocabulary -------------------------------------------------------------

constexpr int kPadId = 0;
constexpr int kUnkId = 1;
inline const char* kPadToken = "<pad>";
inline const char* kUnkToken = "<unk>";

class Vocabulary {
public:
  Vocabulary();
  // Rebuild from an explicit id -> token list (checkpoint load).
  explicit Vocabulary(std::vector<std::string> id_to_token);

  int add(const std::string& token);           // existing id if present
  int id(const std::string& token) const;      // kUnkId if absent
  const std::string& token(int id) const;
  std::size_t size() const { return id_to_token_.size(); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }

private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// ---- slot schema ------------------------------------------------------------

// Per-slot action space: index 0 is always the default "None", concrete
// classes occupy 1..N.
struct Slot {
  std::string name;
  std::vector<std::string> classes;

  std::size_t action_count() const { return classes.size() + 1; }
  // Action/class index for a class name; 0 for "None".
  int class_index(const std::string& cls) const;
  const std::string& class_name(int index) const;  // index 0 -> "None"
};

struct SlotSchema {
  std::vector<Slot> slots;

  std::size_t slot_count() const { return slots.size(); }
  int slot_index(const std::string& name) const;  // -1 if unknown
  std::size_t total_state_width() const;          // sum of action counts
  std::string slot_names_joined() const;
};

SlotSchema parse_schema_json(const std::string& json_text,
                             const std::string& origin);
SlotSchema load_schema(const std::string& path);
std::string schema_to_json(const SlotSchema& schema);

// ---- segmentation / tokenization -------------------------------------------

// Split at , . ! ? with the delimiter kept on the preceding segment.
// Segments with no content besides delimiters and whitespace are dropped.
std::vector<std::string> segment_paragraph(const std::string& text);

// Lowercased whitespace split with leading/trailing punctuation detached.
// Already-tokenized input (tokens space separated) passes through.
std::vector<std::string> tokenize(const std::string& sentence);

// ---- paragraphs and datasets -------------------------------------------------

struct Paragraph {
  std::vector<std::vector<int>> sentences;      // token ids
  std::vector<std::string> raw_sentences;       // parallel originals
  std::size_t sentence_count() const { return sentences.size(); }
};

struct ParagraphLimits {
  std::size_t max_sentence_tokens = 60;
  std::size_t max_sentences = 30;
};

// segment + tokenize + encode, truncating over-long input with a warning
// on stderr.
Paragraph make_paragraph(const std::string& text, const Vocabulary& vocab,
                         const ParagraphLimits& limits = {});

struct Example {
  std::int64_t id = 0;
  std::string text;
  Paragraph paragraph;
  std::vector<int> gold;                        // class index per slot; 0 = None
  std::vector<std::optional<int>> gold_jump;    // 1-based step per slot
};

struct Dataset {
  std::vector<Example> examples;
  std::size_t size() const { return examples.size(); }
};

// JSON-lines corpus: {"text": ..., "labels": {slot: class-or-null}};
// optional "id" defaults to the 0-based line index. Unknown slots or
// classes are format errors naming the line.
Dataset load_corpus(const std::string& path, const SlotSchema& schema,
                    const Vocabulary& vocab, const ParagraphLimits& limits = {});
// Raw text variant for corpora that are loaded before the vocabulary
// exists; paragraphs are encoded later via encode_dataset.
Dataset load_corpus_raw(const std::string& path, const SlotSchema& schema);
void encode_dataset(Dataset& data, const Vocabulary& vocab,
                    const ParagraphLimits& limits = {});

// JSON-lines {"id": n, "slot": name, "gold_jump": 0-based sentence index};
// attaches 1-based jump steps to matching examples.
void attach_rationale_gold(Dataset& data, const SlotSchema& schema,
                           const std::string& path);

// ---- vocabulary building / embeddings ----------------------------------------

// Tokens with frequency >= min_count, ids in descending-frequency order
// (ties broken lexicographically) after the reserved ids.
Vocabulary build_vocab(const Dataset& data, std::size_t min_count = 1);

struct EmbeddingTable {
  std::size_t dim = 0;
  std::vector<Real> values;                     // |V| x dim row-major
  std::vector<std::uint8_t> pretrained;         // per-row provenance flag
};

// Whitespace text format: token v1 .. vd per line. Vocabulary rows found
// in the file are copied; the rest are sampled uniform[-0.01, 0.01].
// Reserved rows stay zero (PAD) / random (UNK).
EmbeddingTable load_pretrained_embeddings(const std::string& path,
                                          const Vocabulary& vocab,
                                          std::uint64_t seed);
EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t dim,
                                 std::uint64_t seed);

// ---- splits -------------------------------------------------------------------

struct DatasetSplit {
  std::vector<std::vector<std::size_t>> folds;  // index sets into the dataset
};

// Holdout: two folds {train, dev} with |dev| = round(dev_fraction * n).
DatasetSplit split_holdout(std::size_t n, double dev_fraction,
                           std::uint64_t seed);
// k disjoint folds covering all indices; first n % k folds get the extra
// sample.
DatasetSplit split_kfold(std::size_t n, std::size_t k, std::uint64_t seed);

Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices);

}  // namespace jumper
