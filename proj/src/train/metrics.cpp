#include "safetext/train/metrics.hpp"

#include "safetext/data/dataset.hpp"
#include "safetext/errors.hpp"

namespace safetext::train {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

SingleEval evaluate_single(const std::vector<int>& pred,
                           const std::vector<int>& gold) {
  if (pred.size() != gold.size())
    throw ConfigError("evaluate_single: prediction and label counts differ");
  if (pred.empty()) throw DataError("evaluate_single: empty evaluation set");
  SingleEval e;
  e.total = pred.size();
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == gold[i]) ++e.correct;
    if (pred[i] == 1 && gold[i] == 1) ++tp;
    if (pred[i] == 1 && gold[i] == 0) ++fp;
    if (pred[i] == 0 && gold[i] == 1) ++fn;
  }
  e.accuracy = ratio(e.correct, e.total);
  e.precision = ratio(tp, tp + fp);
  e.recall = ratio(tp, tp + fn);
  return e;
}

nlohmann::ordered_json SingleEval::to_json() const {
  return {{"total", total},
          {"correct", correct},
          {"accuracy", accuracy},
          {"precision", precision},
          {"recall", recall}};
}

MultiEval evaluate_multi(const std::vector<std::array<bool, 3>>& pred,
                         const std::vector<std::array<bool, 3>>& gold) {
  if (pred.size() != gold.size())
    throw ConfigError("evaluate_multi: prediction and label counts differ");
  if (pred.empty()) throw DataError("evaluate_multi: empty evaluation set");
  MultiEval e;
  e.total = pred.size();
  std::size_t exact = 0;
  double wrong_frac = 0.0;
  std::size_t tp[3] = {0, 0, 0}, fp[3] = {0, 0, 0}, fn[3] = {0, 0, 0};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    int wrong = 0;
    for (int c = 0; c < 3; ++c) {
      if (pred[i][c] != gold[i][c]) ++wrong;
      if (pred[i][c] && gold[i][c]) ++tp[c];
      if (pred[i][c] && !gold[i][c]) ++fp[c];
      if (!pred[i][c] && gold[i][c]) ++fn[c];
    }
    if (wrong == 0) ++exact;
    wrong_frac += wrong / 3.0;
  }
  e.exact_match = ratio(exact, e.total);
  e.hamming_score = 1.0 - wrong_frac / static_cast<double>(e.total);
  for (int c = 0; c < 3; ++c) {
    e.precision[c] = ratio(tp[c], tp[c] + fp[c]);
    e.recall[c] = ratio(tp[c], tp[c] + fn[c]);
  }
  return e;
}

nlohmann::ordered_json MultiEval::to_json() const {
  nlohmann::ordered_json j = {{"total", total},
                              {"exact_match", exact_match},
                              {"hamming_score", hamming_score}};
  nlohmann::ordered_json per;
  for (int c = 0; c < 3; ++c) {
    per[data::kCategories[c]] = {{"precision", precision[c]},
                                 {"recall", recall[c]}};
  }
  j["per_category"] = per;
  return j;
}

}  // namespace safetext::train
