#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace safetext::models {

enum class Arch { cnn, rnn, cnn_rnn, cnn_rnn_bidirec_char };
enum class Task { single, multi };

const char* arch_name(Arch a);
const char* task_name(Task t);
Arch parse_arch(const std::string& s);
Task parse_task(const std::string& s);

struct ModelConfig {
  Arch arch = Arch::cnn_rnn;
  Task task = Task::single;
  std::size_t category = 0;  // target category in single-label mode

  std::size_t vocab_size = 10000;
  std::size_t embedding_dim = 300;

  std::vector<std::size_t> filter_widths{3, 4, 5};
  std::size_t filters_per_width = 100;

  std::size_t lstm_layers = 1;
  std::size_t lstm_hidden = 300;
  bool bidirectional = false;

  bool use_char = false;
  std::size_t char_embedding_dim = 16;
  std::vector<std::size_t> char_filter_widths{3, 4, 5};
  std::size_t char_filters_per_width = 100;

  double keep_prob = 0.75;
  std::size_t batch_size = 64;
  double threshold = 0.5;

  std::size_t t_max = 200;
  std::size_t c_max = 16;

  double learning_rate = 1e-4;
  double clip_norm = 2.0;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;

  std::uint64_t seed = 1;

  // Hyperparameter defaults for each architecture and task.
  static ModelConfig preset(Arch arch, Task task);

  void validate() const;  // throws ConfigError

  std::size_t num_classes() const { return task == Task::single ? 2 : 3; }
  std::size_t conv_output_dim() const {
    return filter_widths.size() * filters_per_width;
  }
  std::size_t char_output_dim() const {
    return use_char ? char_filter_widths.size() * char_filters_per_width : 0;
  }

  nlohmann::ordered_json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  // Applies the fields present in j on top of *this.
  void apply_overrides(const nlohmann::json& j);
};

}  // namespace safetext::models
