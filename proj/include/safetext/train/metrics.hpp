#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <json.hpp>

namespace safetext::train {

struct SingleEval {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  double precision = 0.0;  // positive class
  double recall = 0.0;
  nlohmann::ordered_json to_json() const;
};

SingleEval evaluate_single(const std::vector<int>& pred,
                           const std::vector<int>& gold);

struct MultiEval {
  std::size_t total = 0;
  double exact_match = 0.0;
  // 1 - mean fraction of mismatched category bits per story.
  double hamming_score = 0.0;
  std::array<double, 3> precision{};
  std::array<double, 3> recall{};
  nlohmann::ordered_json to_json() const;
};

MultiEval evaluate_multi(const std::vector<std::array<bool, 3>>& pred,
                         const std::vector<std::array<bool, 3>>& gold);

}  // namespace safetext::train
