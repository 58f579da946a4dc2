#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "safetext/data/vocab.hpp"

namespace safetext::data {

inline constexpr std::array<const char*, 3> kCategories{"commenting", "ogling",
                                                        "groping"};

struct Story {
  std::string text;
  std::string location;  // empty when the column is absent
  std::array<bool, 3> labels{};
};

struct LoadResult {
  std::vector<Story> stories;
  std::size_t skipped_empty = 0;  // rows dropped for a blank description
};

// CSV with a header row naming `description`, the three category columns, and
// optionally `location`. Label cells must be 0 or 1.
LoadResult load_stories(const std::string& csv_path);

struct Splits {
  std::vector<std::size_t> train, dev, test;
};

// Seeded stratified split over the 8 label combinations.
Splits stratified_split(std::size_t n_stories,
                        const std::vector<Story>& stories, std::uint64_t seed,
                        double train_frac = 0.8, double dev_frac = 0.1);

// One zero-based story index per line in each file.
Splits load_split_files(const std::string& train_path,
                        const std::string& dev_path,
                        const std::string& test_path, std::size_t n_stories);

// Vocabularies fitted on the given stories (normally the training split).
Vocabulary build_vocab(const std::vector<const Story*>& stories,
                       std::size_t max_size);
CharVocabulary build_char_vocab(const std::vector<const Story*>& stories);

std::vector<const Story*> select(const std::vector<Story>& stories,
                                 const std::vector<std::size_t>& indices);

}  // namespace safetext::data
