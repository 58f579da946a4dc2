#include "safetext/data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "safetext/data/csv.hpp"
#include "safetext/data/tokenize.hpp"
#include "safetext/errors.hpp"
#include "safetext/rng.hpp"

namespace safetext::data {

namespace {

std::string trimmed(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_label(const std::string& cell, std::size_t line,
                 const char* column) {
  const std::string v = trimmed(cell);
  if (v == "0") return false;
  if (v == "1") return true;
  throw DataError("line " + std::to_string(line) + ": label column '" +
                  column + "' holds '" + cell + "', expected 0 or 1");
}

}  // namespace

LoadResult load_stories(const std::string& csv_path) {
  const auto rows = read_csv(csv_path);
  if (rows.empty()) throw DataError("dataset is empty: " + csv_path);

  const auto& header = rows[0];
  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trimmed(header[i]) == name) return i;
    throw DataError("dataset " + csv_path + " is missing required column '" +
                    name + "'");
  };
  const std::size_t desc_col = column("description");
  std::array<std::size_t, 3> label_cols{};
  for (std::size_t c = 0; c < 3; ++c) label_cols[c] = column(kCategories[c]);
  std::size_t loc_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (trimmed(header[i]) == "location") loc_col = i;

  LoadResult out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    if (row.size() == 1 && trimmed(row[0]).empty()) continue;  // blank line
    if (row.size() < header.size())
      throw DataError("line " + std::to_string(line) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(row.size()));
    Story s;
    s.text = trimmed(row[desc_col]);
    if (s.text.empty()) {
      ++out.skipped_empty;
      continue;
    }
    for (std::size_t c = 0; c < 3; ++c)
      s.labels[c] = parse_label(row[label_cols[c]], line, kCategories[c]);
    if (loc_col < header.size()) s.location = trimmed(row[loc_col]);
    out.stories.push_back(std::move(s));
  }
  return out;
}

Splits stratified_split(std::size_t n_stories,
                        const std::vector<Story>& stories, std::uint64_t seed,
                        double train_frac, double dev_frac) {
  if (n_stories == 0 || stories.size() != n_stories)
    throw ConfigError("stratified_split: story count mismatch");
  if (train_frac <= 0 || dev_frac < 0 || train_frac + dev_frac >= 1.0)
    throw ConfigError("stratified_split: fractions must leave room for test");

  std::map<unsigned, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < n_stories; ++i) {
    unsigned key = 0;
    for (std::size_t c = 0; c < 3; ++c)
      if (stories[i].labels[c]) key |= 1u << c;
    strata[key].push_back(i);
  }

  Rng rng(seed);
  Splits sp;
  for (auto& [key, members] : strata) {
    Rng stream = rng.fork(key);
    stream.shuffle(members);
    const auto n = members.size();
    const auto n_train = static_cast<std::size_t>(
        std::llround(train_frac * static_cast<double>(n)));
    const auto n_dev = static_cast<std::size_t>(
        std::llround(dev_frac * static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i) {
      if (i < n_train)
        sp.train.push_back(members[i]);
      else if (i < n_train + n_dev)
        sp.dev.push_back(members[i]);
      else
        sp.test.push_back(members[i]);
    }
  }
  std::sort(sp.train.begin(), sp.train.end());
  std::sort(sp.dev.begin(), sp.dev.end());
  std::sort(sp.test.begin(), sp.test.end());
  if (sp.train.empty()) throw DataError("stratified_split: empty training split");
  return sp;
}

namespace {

std::vector<std::size_t> read_index_file(const std::string& path,
                                         std::size_t n_stories) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open split file: " + path);
  std::vector<std::size_t> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const std::string v = trimmed(line);
    if (v.empty()) continue;
    std::size_t pos = 0;
    unsigned long long idx = 0;
    try {
      idx = std::stoull(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != v.size())
      throw DataError(path + " line " + std::to_string(lineno) +
                      ": expected a story index, found '" + line + "'");
    if (idx >= n_stories)
      throw DataError(path + " line " + std::to_string(lineno) + ": index " +
                      std::to_string(idx) + " out of range for " +
                      std::to_string(n_stories) + " stories");
    out.push_back(static_cast<std::size_t>(idx));
  }
  return out;
}

}  // namespace

Splits load_split_files(const std::string& train_path,
                        const std::string& dev_path,
                        const std::string& test_path, std::size_t n_stories) {
  Splits sp;
  sp.train = read_index_file(train_path, n_stories);
  sp.dev = read_index_file(dev_path, n_stories);
  sp.test = read_index_file(test_path, n_stories);
  if (sp.train.empty()) throw DataError("split file has no entries: " + train_path);

  std::set<std::size_t> seen;
  auto check_disjoint = [&](const std::vector<std::size_t>& part,
                            const std::string& name) {
    for (std::size_t i : part)
      if (!seen.insert(i).second)
        throw DataError("story index " + std::to_string(i) +
                        " appears in more than one split (" + name + ")");
  };
  check_disjoint(sp.train, train_path);
  check_disjoint(sp.dev, dev_path);
  check_disjoint(sp.test, test_path);
  return sp;
}

Vocabulary build_vocab(const std::vector<const Story*>& stories,
                       std::size_t max_size) {
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(stories.size());
  for (const Story* s : stories) corpus.push_back(tokenize(s->text));
  return Vocabulary::build(corpus, max_size);
}

CharVocabulary build_char_vocab(const std::vector<const Story*>& stories) {
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(stories.size());
  for (const Story* s : stories) corpus.push_back(tokenize(s->text));
  return CharVocabulary::build(corpus);
}

std::vector<const Story*> select(const std::vector<Story>& stories,
                                 const std::vector<std::size_t>& indices) {
  std::vector<const Story*> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= stories.size())
      throw DataError("story index out of range: " + std::to_string(i));
    out.push_back(&stories[i]);
  }
  return out;
}

}  // namespace safetext::data
