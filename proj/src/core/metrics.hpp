#pragma once

#include <optional>
#include <span>

#include "core/text.hpp"

namespace jumper {

struct EvalRecord {
  std::size_t slot = 0;
  int predicted = 0;
  int gold = 0;
  std::size_t predicted_jump = 1;            // 1-based; T when no jump
  std::optional<std::size_t> gold_jump;      // 1-based
  std::size_t sentence_count = 1;
};

// Fraction of records with the predicted class equal to gold.
double classification_accuracy(std::span<const EvalRecord> records);

// Among records carrying a gold jump and classified correctly, the fraction
// whose predicted jump step matches.
double jumping_accuracy(std::span<const EvalRecord> records);

// Fraction with both class and jump position correct; identically CA * JA
// over a uniformly annotated record set.
double overall_accuracy(std::span<const EvalRecord> records);

struct ReducedReading {
  double avg_sentences = 0;
  double avg_jump = 0;
  double reduced_fraction = 0;  // 1 - avg_jump / avg_sentences
};

ReducedReading reduced_reading(std::span<const EvalRecord> records);

// Unweighted mean over classes of per-class F1 (classes with neither gold
// nor predicted instances excluded), averaged over slots.
double macro_f1(std::span<const EvalRecord> records, const SlotSchema& schema);

// Frequency of each slot's most common gold class.
std::vector<double> majority_guess(const Dataset& data, const SlotSchema& schema);

}  // namespace jumper
