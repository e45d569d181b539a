#include "core/metrics.hpp"

#include <algorithm>
#include <map>

namespace jumper {

double classification_accuracy(std::span<const EvalRecord> records) {
  if (records.empty()) fail_invalid("classification_accuracy: no records");
  std::size_t correct = 0;
  for (const EvalRecord& r : records) correct += r.predicted == r.gold;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double jumping_accuracy(std::span<const EvalRecord> records) {
  std::size_t annotated = 0, correct_class = 0, both = 0;
  for (const EvalRecord& r : records) {
    if (!r.gold_jump) continue;
    ++annotated;
    if (r.predicted != r.gold) continue;
    ++correct_class;
    both += r.predicted_jump == *r.gold_jump;
  }
  if (annotated == 0)
    fail_invalid("jumping_accuracy: no records carry gold jump annotations");
  if (correct_class == 0)
    fail_invalid(
        "jumping_accuracy: undefined, no annotated record is classified "
        "correctly");
  return static_cast<double>(both) / static_cast<double>(correct_class);
}

double overall_accuracy(std::span<const EvalRecord> records) {
  std::size_t annotated = 0, both = 0;
  for (const EvalRecord& r : records) {
    if (!r.gold_jump) continue;
    ++annotated;
    both += r.predicted == r.gold && r.predicted_jump == *r.gold_jump;
  }
  if (annotated == 0)
    fail_invalid("overall_accuracy: no records carry gold jump annotations");
  return static_cast<double>(both) / static_cast<double>(annotated);
}

ReducedReading reduced_reading(std::span<const EvalRecord> records) {
  if (records.empty()) fail_invalid("reduced_reading: no records");
  double sum_t = 0, sum_jump = 0;
  for (const EvalRecord& r : records) {
    sum_t += static_cast<double>(r.sentence_count);
    sum_jump += static_cast<double>(r.predicted_jump);
  }
  ReducedReading out;
  out.avg_sentences = sum_t / static_cast<double>(records.size());
  out.avg_jump = sum_jump / static_cast<double>(records.size());
  out.reduced_fraction = 1.0 - out.avg_jump / out.avg_sentences;
  return out;
}

double macro_f1(std::span<const EvalRecord> records, const SlotSchema& schema) {
  if (records.empty()) fail_invalid("macro_f1: no records");
  double slot_sum = 0;
  std::size_t slots_present = 0;
  for (std::size_t s = 0; s < schema.slot_count(); ++s) {
    const std::size_t classes = schema.slots[s].action_count();
    std::vector<std::size_t> tp(classes, 0), fp(classes, 0), fn(classes, 0);
    bool any = false;
    for (const EvalRecord& r : records) {
      if (r.slot != s) continue;
      any = true;
      const auto pred = static_cast<std::size_t>(r.predicted);
      const auto gold = static_cast<std::size_t>(r.gold);
      if (pred == gold)
        ++tp[pred];
      else {
        ++fp[pred];
        ++fn[gold];
      }
    }
    if (!any) continue;
    ++slots_present;
    double f1_sum = 0;
    std::size_t counted = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      if (tp[c] + fp[c] + fn[c] == 0) continue;  // never gold, never predicted
      ++counted;
      const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
      f1_sum += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp[c]) / denom;
    }
    slot_sum += counted == 0 ? 0.0 : f1_sum / static_cast<double>(counted);
  }
  if (slots_present == 0) fail_invalid("macro_f1: records match no slot");
  return slot_sum / static_cast<double>(slots_present);
}

std::vector<double> majority_guess(const Dataset& data,
                                   const SlotSchema& schema) {
  if (data.examples.empty()) fail_invalid("majority_guess: empty dataset");
  std::vector<double> out(schema.slot_count(), 0);
  for (std::size_t s = 0; s < schema.slot_count(); ++s) {
    std::map<int, std::size_t> counts;
    for (const Example& ex : data.examples) ++counts[ex.gold[s]];
    std::size_t best = 0;
    for (const auto& [cls, n] : counts) best = std::max(best, n);
    out[s] = static_cast<double>(best) / static_cast<double>(data.size());
  }
  return out;
}

}  // namespace jumper
