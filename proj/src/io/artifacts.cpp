#include "safetext/io/artifacts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "safetext/errors.hpp"

namespace safetext::io {

std::uint64_t hash_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open file for hashing: " + path);
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
    const std::streamsize got = f.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

std::string hash_file_hex(const std::string& path) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash_file(path)));
  return buf;
}

void save_checkpoint(const models::Model& model, const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = "safetext-checkpoint-v1";
  j["config"] = model.config().to_json();
  j["vocab"] = model.vocab().id_to_token();
  if (const auto* cv = model.char_vocab()) j["char_alphabet"] = cv->alphabet();

  nlohmann::ordered_json params = nlohmann::ordered_json::array();
  const auto& ps = model.params();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& p = ps.at(i);
    nlohmann::ordered_json pj;
    pj["name"] = p.name;
    pj["shape"] = p.value.shape();
    pj["values"] = p.value.vec();
    params.push_back(std::move(pj));
  }
  j["parameters"] = std::move(params);
  write_json_file(path, j);
}

std::unique_ptr<models::Model> load_checkpoint(const std::string& path) {
  const nlohmann::json j = read_json_file(path);
  try {
    if (j.value("format", "") != "safetext-checkpoint-v1")
      throw DataError("unrecognized checkpoint format in " + path);
    models::ModelConfig cfg = models::ModelConfig::from_json(j.at("config"));
    auto vocab = data::Vocabulary::from_tokens(
        j.at("vocab").get<std::vector<std::string>>());
    std::optional<data::CharVocabulary> cv;
    if (j.contains("char_alphabet"))
      cv = data::CharVocabulary::from_alphabet(
          j.at("char_alphabet").get<std::string>());

    auto model = std::make_unique<models::Model>(cfg, std::move(vocab),
                                                 std::move(cv));
    std::size_t filled = 0;
    for (const auto& pj : j.at("parameters")) {
      const auto name = pj.at("name").get<std::string>();
      auto* param = model->params().find(name);
      if (!param)
        throw DataError("checkpoint parameter '" + name +
                        "' does not exist in this architecture");
      const auto shape = pj.at("shape").get<std::vector<std::size_t>>();
      if (shape != param->value.shape())
        throw DataError("checkpoint parameter '" + name +
                        "' has the wrong shape");
      const auto values = pj.at("values").get<std::vector<double>>();
      if (values.size() != param->value.size())
        throw DataError("checkpoint parameter '" + name +
                        "' has the wrong element count");
      std::copy(values.begin(), values.end(), param->value.data());
      ++filled;
    }
    if (filled != model->params().size())
      throw DataError("checkpoint is missing parameters for this architecture");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed checkpoint " + path + ": " + e.what());
  }
}

void write_manifest(const std::string& path, const std::string& command,
                    const nlohmann::ordered_json& config,
                    const std::vector<ManifestInput>& inputs,
                    const std::vector<std::string>& notes) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config"] = config;
  nlohmann::ordered_json in = nlohmann::ordered_json::array();
  for (const auto& i : inputs) {
    in.push_back({{"role", i.role},
                  {"path", i.path},
                  {"fnv1a", hash_file_hex(i.path)}});
  }
  j["inputs"] = std::move(in);
  j["notes"] = notes;
  write_json_file(path, j);
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write file: " + path);
  f << j.dump(2) << '\n';
  if (!f.good()) throw DataError("failed writing file: " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open file: " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid json in " + path + ": " + e.what());
  }
}

}  // namespace safetext::io
