#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "common/testutil.hpp"
#include "safetext/data/batch.hpp"
#include "safetext/data/csv.hpp"
#include "safetext/data/dataset.hpp"
#include "safetext/data/tokenize.hpp"
#include "safetext/data/vocab.hpp"
#include "safetext/errors.hpp"

using namespace safetext;
namespace data = safetext::data;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("safetext_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
}

}  // namespace

TEST_CASE("tokenize: empty, case folding, punctuation splitting") {
  CHECK(data::tokenize("").empty());
  CHECK(data::tokenize("   \t\n ").empty());
  CHECK(data::tokenize("Metro") == std::vector<std::string>{"metro"});
  CHECK(data::tokenize("Guys passing comments, staring.") ==
        std::vector<std::string>({"guys", "passing", "comments", ",",
                                  "staring", "."}));
  CHECK(data::tokenize("Don't!") ==
        std::vector<std::string>({"don", "'", "t", "!"}));
  CHECK(data::tokenize("a,b") == std::vector<std::string>({"a", ",", "b"}));
}

TEST_CASE("build_vocab: reserved ids plus frequency-then-lexicographic order") {
  {
    std::vector<std::vector<std::string>> corpus{{"e", "d", "c", "b", "a"}};
    data::Vocabulary v = data::Vocabulary::build(corpus, 10000);
    CHECK(v.size() == 7);
    CHECK(v.id(data::kPadToken) == data::kPadId);
    CHECK(v.id(data::kUnkToken) == data::kUnkId);
  }
  {
    std::vector<std::vector<std::string>> corpus{
        {"a", "a", "a", "b", "b", "b", "c"}};
    data::Vocabulary v = data::Vocabulary::build(corpus, 4);
    CHECK(v.size() == 4);
    CHECK(v.id("a") == 2);
    CHECK(v.id("b") == 3);
    CHECK(v.id("c") == data::kUnkId);
    CHECK(!v.contains("c"));
  }
}

TEST_CASE("build_vocab: the cap holds at 10,001 distinct tokens") {
  std::vector<std::vector<std::string>> corpus(1);
  for (int i = 0; i < 10001; ++i)
    corpus[0].push_back("tok" + std::to_string(i));
  data::Vocabulary v = data::Vocabulary::build(corpus);
  CHECK(v.size() == 10000);
}

TEST_CASE("build_vocab rejects an empty corpus") {
  CHECK_THROWS_AS(data::Vocabulary::build({}, 100), DataError);
  CHECK_THROWS_AS(data::Vocabulary::build({{}, {}}, 100), DataError);
}

TEST_CASE("vocabulary round-trips through its token list") {
  std::vector<std::vector<std::string>> corpus{{"x", "y", "y"}};
  data::Vocabulary v = data::Vocabulary::build(corpus);
  data::Vocabulary w = data::Vocabulary::from_tokens(v.id_to_token());
  CHECK(w.size() == v.size());
  CHECK(w.id("y") == v.id("y"));
  CHECK(w.fingerprint() == v.fingerprint());
  CHECK_THROWS_AS(data::Vocabulary::from_tokens({"a", "b"}), DataError);
}

TEST_CASE("char vocabulary covers observed characters and maps the rest to UNK") {
  std::vector<std::vector<std::string>> corpus{{"abc", "ab", "a1!"}};
  data::CharVocabulary cv = data::CharVocabulary::build(corpus);
  CHECK(cv.id('a') == 2);  // most frequent
  CHECK(cv.id('b') >= 2);
  CHECK(cv.id('z') == data::kUnkId);
  data::CharVocabulary back = data::CharVocabulary::from_alphabet(cv.alphabet());
  CHECK(back.id('b') == cv.id('b'));
  CHECK(back.fingerprint() == cv.fingerprint());
}

TEST_CASE("csv parser handles quotes, escapes, CRLF, and embedded newlines") {
  const std::string text =
      "a,b,c\r\n"
      "\"x, y\",\"he said \"\"hi\"\"\",plain\n"
      "\"multi\nline\",2,3\n";
  auto rows = data::parse_csv(text);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>({"a", "b", "c"}));
  CHECK(rows[1][0] == "x, y");
  CHECK(rows[1][1] == "he said \"hi\"");
  CHECK(rows[1][2] == "plain");
  CHECK(rows[2][0] == "multi\nline");
  CHECK_THROWS_AS(data::parse_csv("\"unterminated"), DataError);
}

TEST_CASE("csv writer round-trips through the parser") {
  std::vector<std::string> fields{"plain", "with, comma", "with \"quote\"",
                                  "multi\nline", ""};
  std::ostringstream os;
  data::write_csv_row(os, fields);
  auto rows = data::parse_csv(os.str());
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == fields);
}

TEST_CASE("load_stories parses labels and the optional location column") {
  TempDir td;
  const std::string path = td.file("data.csv");
  write_file(path,
             "description,commenting,ogling,groping,location\n"
             "\"My college was nearby. Guys passing comments, staring, trying "
             "to touch.\",1,1,1,college road\n"
             "Nothing happened today.,0,0,0,\n"
             "  ,1,0,0,blank description\n");
  auto res = data::load_stories(path);
  REQUIRE(res.stories.size() == 2);
  CHECK(res.skipped_empty == 1);
  CHECK(res.stories[0].labels == std::array<bool, 3>{true, true, true});
  CHECK(res.stories[0].location == "college road");
  CHECK(res.stories[1].labels == std::array<bool, 3>{false, false, false});
  CHECK(res.stories[1].location.empty());
}

TEST_CASE("load_stories reports missing columns and bad labels precisely") {
  TempDir td;
  {
    const std::string path = td.file("missing.csv");
    write_file(path, "text,commenting,ogling,groping\nhello,0,0,0\n");
    CHECK_THROWS_WITH_AS(data::load_stories(path),
                         doctest::Contains("description"), DataError);
  }
  {
    const std::string path = td.file("badlabel.csv");
    write_file(path,
               "description,commenting,ogling,groping\n"
               "fine,0,1,0\n"
               "broken,0,yes,0\n");
    CHECK_THROWS_WITH_AS(data::load_stories(path), doctest::Contains("line 3"),
                         DataError);
  }
  {
    const std::string path = td.file("short.csv");
    write_file(path, "description,commenting,ogling,groping\nonly,0\n");
    CHECK_THROWS_AS(data::load_stories(path), DataError);
  }
}

TEST_CASE("encode_batch pads, truncates, and maps OOV to UNK") {
  data::Vocabulary v = data::Vocabulary::build(
      {{"one", "two", "three", "four", "five", "longword"}});
  data::Story a{"one two three", "", {}};
  data::Story b{"one two three four five", "", {}};
  auto enc = data::encode_batch({&a, &b}, v, nullptr, 5, 16);
  CHECK(enc.b == 2);
  CHECK(enc.t == 5);
  CHECK(enc.lengths == std::vector<std::int32_t>({3, 5}));
  const auto& ids = *enc.word_ids;
  CHECK(ids[0] == v.id("one"));
  CHECK(ids[2] == v.id("three"));
  CHECK(ids[3] == data::kPadId);
  CHECK(ids[4] == data::kPadId);
  CHECK(ids[5 + 4] == v.id("five"));

  data::Story oov{"one mystery", "", {}};
  auto enc2 = data::encode_batch({&oov}, v, nullptr, 5, 16);
  CHECK((*enc2.word_ids)[1] == data::kUnkId);

  data::Story longer{"one two three four five one two", "", {}};
  auto enc3 = data::encode_batch({&longer}, v, nullptr, 4, 16);
  CHECK(enc3.t == 4);
  CHECK(enc3.lengths[0] == 4);
}

TEST_CASE("encode_batch fills char ids with trailing PAD") {
  std::vector<std::vector<std::string>> corpus{{"abcdefghijkl", "xy"}};
  data::Vocabulary v = data::Vocabulary::build(corpus);
  data::CharVocabulary cv = data::CharVocabulary::build(corpus);
  data::Story s{"abcdefghijkl xy", "", {}};
  auto enc = data::encode_batch({&s}, v, &cv, 10, 16);
  REQUIRE(enc.c == 16);
  const auto& cids = *enc.char_ids;
  for (std::size_t cc = 0; cc < 12; ++cc) CHECK(cids[cc] != data::kPadId);
  for (std::size_t cc = 12; cc < 16; ++cc) CHECK(cids[cc] == data::kPadId);
  // second word: 2 chars then PAD
  CHECK(cids[16 + 0] == cv.id('x'));
  CHECK(cids[16 + 1] == cv.id('y'));
  CHECK(cids[16 + 2] == data::kPadId);
}

TEST_CASE("encode/decode round-trips for in-vocabulary tokens") {
  std::vector<std::vector<std::string>> corpus{
      {"walking", "home", "late", "night"}};
  data::Vocabulary v = data::Vocabulary::build(corpus);
  data::Story s{"walking home late night", "", {}};
  auto enc = data::encode_batch({&s}, v, nullptr, 10, 16);
  std::vector<std::string> back;
  for (std::int32_t tt = 0; tt < enc.lengths[0]; ++tt)
    back.push_back(v.token((*enc.word_ids)[static_cast<std::size_t>(tt)]));
  CHECK(back == data::tokenize(s.text));
}

TEST_CASE("label matrix rows and vectors are consistent") {
  data::Vocabulary v = data::Vocabulary::build({{"w"}});
  data::Story a{"w", "", {true, false, true}};
  data::Story b{"w", "", {false, false, false}};
  auto enc = data::encode_batch({&a, &b}, v, nullptr);
  Tensor m = enc.label_matrix();
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(0, 1) == 0.0);
  CHECK(m.at(0, 2) == 1.0);
  double row0 = m.at(0, 0) + m.at(0, 1) + m.at(0, 2);
  CHECK((row0 >= 0.0 && row0 <= 3.0));
  CHECK(enc.label_vector(0) == std::vector<std::int32_t>({1, 0}));
  CHECK(enc.label_vector(2) == std::vector<std::int32_t>({1, 0}));
}

TEST_CASE("vocabulary built on train induces identical encodings regardless "
          "of dev content") {
  std::vector<std::vector<std::string>> train{{"alpha", "beta", "gamma"}};
  data::Vocabulary v = data::Vocabulary::build(train);
  data::Story devstory{"alpha new beta", "", {}};
  auto e1 = data::encode_batch({&devstory}, v, nullptr);
  // Rebuilding from the same train corpus (dev text never enters).
  data::Vocabulary v2 = data::Vocabulary::build(train);
  auto e2 = data::encode_batch({&devstory}, v2, nullptr);
  CHECK(*e1.word_ids == *e2.word_ids);
}

TEST_CASE("stratified split is seeded, disjoint, and covers every story") {
  auto synth = testutil::make_synth_corpus(200, 42);
  std::vector<data::Story> stories;
  for (const auto& s : synth)
    stories.push_back({s.text, "", {s.labels[0], s.labels[1], s.labels[2]}});

  auto sp1 = data::stratified_split(stories.size(), stories, 7);
  auto sp2 = data::stratified_split(stories.size(), stories, 7);
  CHECK(sp1.train == sp2.train);
  CHECK(sp1.dev == sp2.dev);
  CHECK(sp1.test == sp2.test);

  std::set<std::size_t> all;
  for (auto i : sp1.train) all.insert(i);
  for (auto i : sp1.dev) all.insert(i);
  for (auto i : sp1.test) all.insert(i);
  CHECK(all.size() == stories.size());
  CHECK(sp1.train.size() + sp1.dev.size() + sp1.test.size() == stories.size());
  CHECK(sp1.train.size() > stories.size() / 2);
  CHECK(!sp1.dev.empty());
  CHECK(!sp1.test.empty());

  auto sp3 = data::stratified_split(stories.size(), stories, 8);
  CHECK(sp3.train != sp1.train);
}

TEST_CASE("split files load verbatim and reject overlap or range errors") {
  TempDir td;
  write_file(td.file("train.txt"), "0\n1\n2\n");
  write_file(td.file("dev.txt"), "3\n");
  write_file(td.file("test.txt"), "4\n");
  auto sp = data::load_split_files(td.file("train.txt"), td.file("dev.txt"),
                                   td.file("test.txt"), 5);
  CHECK(sp.train == std::vector<std::size_t>({0, 1, 2}));
  CHECK(sp.dev == std::vector<std::size_t>({3}));
  CHECK(sp.test == std::vector<std::size_t>({4}));

  write_file(td.file("over.txt"), "9\n");
  CHECK_THROWS_AS(data::load_split_files(td.file("train.txt"),
                                         td.file("dev.txt"),
                                         td.file("over.txt"), 5),
                  DataError);
  write_file(td.file("dup.txt"), "0\n");
  CHECK_THROWS_AS(data::load_split_files(td.file("train.txt"),
                                         td.file("dup.txt"),
                                         td.file("test.txt"), 5),
                  DataError);
}
