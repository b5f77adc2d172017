#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vihsd/dataset.hpp"
#include "vihsd/error.hpp"
#include "vihsd/rng.hpp"
#include "vihsd/text.hpp"
#include "vihsd/unicode.hpp"

using namespace vihsd;
namespace fs = std::filesystem;

namespace {

using Tokens = std::vector<std::string>;

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "vihsd_test_text";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

}  // namespace

TEST_CASE("normalize_text examples") {
  CHECK(normalize_text("Có  3   con!!!") == "có number con");
  CHECK(normalize_text("Thương tụi mày quá") == "thương tụi mày quá");
  CHECK(normalize_text("") == "");
}

TEST_CASE("normalize_text on the labelled sample comments") {
  CHECK(normalize_text("Thương tụi mày quá không biết tụi mày có thương tao ko :(") ==
        "thương tụi mày quá không biết tụi mày có thương tao ko");
  CHECK(normalize_text("Thi đấu thể thao chuyên nghiệp ở trong nước bạc bẽo vl") ==
        "thi đấu thể thao chuyên nghiệp ở trong nước bạc bẽo vl");
  CHECK(normalize_text("Không ai rãnh mà nói chuyện với mày đâu thằng ngũ") ==
        "không ai rãnh mà nói chuyện với mày đâu thằng ngũ");
}

TEST_CASE("normalize_text details") {
  CHECK(normalize_text("ĐẸP QUÁ") == "đẹp quá");
  CHECK(normalize_text("giá 1.000.000đ") == "giá number number number đ");
  CHECK(normalize_text("abc123def") == "abc number def");
  CHECK(normalize_text("xin chào,bạn") == "xin chào bạn");
  CHECK(normalize_text("\t  a \n b　 ") == "a b");
  CHECK(normalize_text("٣٤ و") == "number و");  // Arabic-Indic digits are Nd
  CHECK(normalize_text("«trích dẫn»") == "trích dẫn");
  CHECK(normalize_text("😀 haha") == "😀 haha");  // symbols are not punctuation
  CHECK(normalize_text("a\xff" "b") == "a\xEF\xBF\xBD" "b");
  CHECK(normalize_text("!!!") == "");
  CHECK(normalize_text("number 5") == "number number");
}

TEST_CASE("normalize_text is idempotent over random strings") {
  const std::vector<char32_t> pool = {
      'A', 'z', 'Q', '0', '9', ' ', '\t', '\n', '!', ',', '.', '_', '-', '(', 0x00C0, 0x0110,
      0x1EA0, 0x1EF9, 0x0130, 0x03A3, 0x0660, 0x0669, 0x0966, 0xFF10, 0x3000, 0x00A0, 0x2028,
      0x2014, 0x00AB, 0x300C, 0x1F600, 0x0391, 0x10400, 0x2160, 0x00B2, 0xFFFD, 0x0301};
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    std::u32string s;
    const auto len = rng.below(24);
    for (std::size_t i = 0; i < len; ++i) {
      if (rng.bernoulli(0.2)) {
        s.push_back(static_cast<char32_t>(rng.below(0x30000)));
        if (s.back() >= 0xD800 && s.back() <= 0xDFFF) s.back() = 'x';
      } else {
        s.push_back(pool[rng.below(pool.size())]);
      }
    }
    std::string raw = unicode::encode_utf8(s);
    if (trial % 10 == 0) raw.push_back('\xC3');  // truncated sequence
    const auto once = normalize_text(raw);
    CAPTURE(raw);
    CHECK(normalize_text(once) == once);
    CHECK(once.find("  ") == std::string::npos);
  }
}

TEST_CASE("utf8 decoding is lenient") {
  CHECK(unicode::decode_utf8("a\xC3") == std::u32string{U'a', 0xFFFD});
  CHECK(unicode::decode_utf8("\xE0\x80\x80") .front() == 0xFFFD);  // overlong
  CHECK(unicode::decode_utf8("\xED\xA0\x80").front() == 0xFFFD);   // surrogate
  CHECK(unicode::encode_utf8(unicode::decode_utf8("tiếng Việt 😀")) == "tiếng Việt 😀");
}

TEST_CASE("tokenize") {
  CHECK(tokenize("thương tụi mày") == Tokens{"thương", "tụi", "mày"});
  CHECK(tokenize("").empty());

  const std::vector<std::string> entries = {"thể_thao", "chuyên nghiệp", "thi"};
  const auto lex = Lexicon::from_entries(entries);
  CHECK(lex.size() == 2);  // single syllable entry ignored
  CHECK(tokenize("thi đấu thể thao", &lex) == Tokens{"thi", "đấu", "thể_thao"});
  CHECK(tokenize("thi đấu thể thao chuyên nghiệp", &lex) ==
        Tokens{"thi", "đấu", "thể_thao", "chuyên_nghiệp"});
  CHECK(tokenize("thương tụi mày", &lex) == tokenize("thương tụi mày"));
}

TEST_CASE("tokenize prefers the longest lexicon match") {
  const std::vector<std::string> entries = {"a b", "a b c", "c d"};
  const auto lex = Lexicon::from_entries(entries);
  CHECK(tokenize("a b c d", &lex) == Tokens{"a_b_c", "d"});
  CHECK(tokenize("a b d", &lex) == Tokens{"a_b", "d"});
}

TEST_CASE("lexicon file") {
  const auto p = temp_path("lex.txt");
  write_text(p, "Thể Thao\nbạc_bẽo\n\nvl\n");
  const auto lex = Lexicon::load(p);
  CHECK(lex.size() == 2);
  CHECK(lex.contains("thể thao"));
  CHECK(lex.contains("bạc bẽo"));
  try {
    Lexicon::load(temp_path("missing.txt"));
    FAIL("expected Io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("build_vocab") {
  const std::vector<Tokens> corpus = {{"a", "b", "a"}};
  auto v = Vocabulary::build(corpus, 1);
  CHECK(v.size() == 4);
  CHECK(v.id("[PAD]") == 0);
  CHECK(v.id("[UNK]") == 1);
  CHECK(v.id("a") == 2);
  CHECK(v.id("b") == 3);
  CHECK(v.id("zzz") == kUnkId);

  auto v2 = Vocabulary::build(corpus, 2);
  CHECK(v2.size() == 3);
  CHECK(v2.id("a") == 2);
  CHECK_FALSE(v2.contains("b"));

  CHECK(Vocabulary::build(std::vector<Tokens>{}, 1).size() == 2);

  const std::vector<Tokens> ties = {{"d", "c", "b", "b"}};
  CHECK(Vocabulary::build(ties).tokens() == Tokens{"[PAD]", "[UNK]", "b", "c", "d"});

  try {
    Vocabulary::build(corpus, 0);
    FAIL("expected Config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}

TEST_CASE("vocabulary serialization round trip and bijection") {
  const std::vector<Tokens> corpus = {{"xin", "chào", "bạn"}, {"chào", "number"}};
  const auto v = Vocabulary::build(corpus);
  const auto back = Vocabulary::deserialize(v.serialize());
  CHECK(back.tokens() == v.tokens());
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(v.id(v.token(static_cast<std::int32_t>(i))) == static_cast<std::int32_t>(i));
  }
  CHECK_THROWS_AS(Vocabulary::deserialize("a\nb\n"), Error);
  CHECK_THROWS_AS(Vocabulary::deserialize("[PAD]\n[UNK]\nx\nx\n"), Error);
}

TEST_CASE("encode_pad") {
  const std::vector<Tokens> corpus = {{"a", "b", "c"}};
  const auto v = Vocabulary::build(corpus);

  auto row = encode_pad(Tokens{"a", "b", "c"}, v);
  REQUIRE(row.size() == 220);
  CHECK(row[0] == v.id("a"));
  CHECK(row[2] == v.id("c"));
  for (std::size_t i = 3; i < 220; ++i) CHECK(row[i] == 0);

  Tokens many;
  for (int i = 0; i < 300; ++i) many.push_back(i < 220 ? "a" : "b");
  row = encode_pad(many, v);
  REQUIRE(row.size() == 220);
  CHECK(std::all_of(row.begin(), row.end(), [&](auto id) { return id == v.id("a"); }));

  row = encode_pad(Tokens{}, v);
  CHECK(row == std::vector<std::int32_t>(220, 0));

  CHECK(encode_pad(Tokens{"zzz"}, v, 2) == std::vector<std::int32_t>{kUnkId, 0});
  CHECK_THROWS_AS(encode_pad(Tokens{"a"}, v, 0), Error);
}

TEST_CASE("encode_pad width and decode round trip") {
  const std::vector<Tokens> corpus = {{"x", "y", "z", "w"}};
  const auto v = Vocabulary::build(corpus);
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Tokens toks;
    const auto n = rng.below(300);
    for (std::size_t i = 0; i < n; ++i) toks.push_back(corpus[0][rng.below(4)]);
    const auto row = encode_pad(toks, v);
    REQUIRE(row.size() == 220);
    const auto back = decode(row, v);
    CHECK(back == Tokens(toks.begin(), toks.begin() + std::min<std::size_t>(n, 220)));
  }
}

TEST_CASE("encode_batch") {
  const std::vector<Tokens> docs = {{"a"}, {"b", "a", "c"}};
  const auto v = Vocabulary::build(docs);
  auto batch = encode_batch(docs, std::vector<int>{0, 2}, v, 4);
  CHECK(batch.ids.rows == 2);
  CHECK(batch.ids.cols == 4);
  CHECK(batch.lengths == std::vector<std::size_t>{1, 3});
  CHECK(batch.ids.at(1, 1) == v.id("a"));
  const std::vector<std::size_t> pick = {1};
  auto sub = batch.select(pick);
  CHECK(sub.size() == 1);
  CHECK((*sub.labels)[0] == 2);
  CHECK(sub.ids.at(0, 0) == v.id("b"));
  CHECK_THROWS_AS(encode_batch(docs, std::vector<int>{0, 3}, v, 4), Error);
  CHECK_THROWS_AS(encode_batch(docs, std::vector<int>{0}, v, 4), Error);
}

TEST_CASE("dataset csv") {
  const auto d = parse_dataset(
      "text,label\n"
      "\"Có  3   con!!!\",0\n"
      "\"a, \"\"quoted\"\"\nnewline\",2\r\n"
      "plain,1\n");
  REQUIRE(d.size() == 3);
  CHECK(d.texts[0] == "Có  3   con!!!");
  CHECK(d.texts[1] == "a, \"quoted\"\nnewline");
  CHECK(*d.labels == std::vector<int>{0, 2, 1});

  const auto again = parse_dataset(format_dataset(d));
  CHECK(again.texts == d.texts);
  CHECK(*again.labels == *d.labels);

  const auto unlabeled = parse_dataset("text\nhello\n");
  CHECK_FALSE(unlabeled.labels.has_value());
  CHECK(unlabeled.texts == Tokens{"hello"});

  try {
    parse_dataset("text,label\nok,1\nbad,7\n", "train.csv");
    FAIL("expected Data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_dataset("label\n1\n"), Error);
  CHECK_THROWS_AS(parse_dataset("text,label\n\"open,1\n"), Error);
  CHECK_THROWS_AS(parse_dataset("text,label\na,1,extra\n"), Error);
}

TEST_CASE("dataset file round trip") {
  Dataset d;
  d.texts = {"một", "hai, ba", " lề "};
  d.labels = std::vector<int>{2, 1, 0};
  const auto p = temp_path("data.csv");
  write_dataset(p, d);
  const auto back = read_dataset(p);
  CHECK(back.texts == d.texts);
  CHECK(*back.labels == *d.labels);
  CHECK_FALSE(fs::exists(p.string() + ".tmp"));
  CHECK_THROWS_AS(read_dataset(temp_path("nope.csv")), Error);
}
