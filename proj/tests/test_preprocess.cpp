#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "drought/corpus.hpp"
#include "drought/preprocess.hpp"
#include "drought/rng.hpp"

using namespace drought;
namespace fs = std::filesystem;

namespace {

const CleaningConfig& cfg() {
  static const CleaningConfig c = CleaningConfig::defaults();
  return c;
}

// Space-separated mix of words, punctuation, digits, markup fragments, and
// multi-byte UTF-8. URLs and tags carry no digits so that every digit in the
// output string is a digit the cleaner must preserve.
std::string fuzz_string(Rng& rng) {
  static const std::vector<std::string> pieces = {
      "a", "Z", "9", "0", "3", "17", ".", ",", "!!", "?", "#", "@",
      "'", "\"", "&", ";", "<b>", "</b>", "<div class='x'>", "&amp;", "&nbsp;",
      "http://ex.am/ple?q=z", "https://t.co/Abc", "www.site.org", "caf\xc3\xa9",
      "na\xc3\xafve", "\xc5\x92uvre", "don't", "it's", "won't", "I'M", "y'all",
      "\xe2\x80\x99", "\xe2\x80\x9c", "\xe2\x80\x9d", "drought2020", "100%", "#DroughtWatch",
  };
  const std::size_t n = 1 + rng.uniform_int(30);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += rng.uniform_int(8) ? " " : "  ";
    s += pieces[rng.uniform_int(pieces.size())];
  }
  return s;
}

long long count_digits(const std::string& s) {
  long long n = 0;
  for (char ch : s) n += (ch >= '0' && ch <= '9') ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("clean_text golden examples") {
  CHECK(clean_text("Drought&nbsp;hits <b>farms</b> http://x.co", cfg()) == "drought hits farms");
  CHECK(clean_text("can't irrigate the caf\xc3\xa9", cfg()) == "cannot irrigate the cafe");
  CHECK(clean_text("RAIN!!! 2 inches #drought", cfg()) == "rain 2 inches drought");
  CHECK(clean_text("visit www.drought.gov for UPDATES", cfg()) == "visit for updates");
  CHECK(clean_text("  ", cfg()).empty());
  CHECK(clean_text("won't it's we're", cfg()) == "will not it is we are");
}

TEST_CASE("clean_text strips urls, tags, and entities before tokenizing") {
  CHECK(clean_text("a<br/>b", cfg()) == "a b");
  CHECK(clean_text("x &amp; y", cfg()) == "x y");  // bare & would vanish anyway
  CHECK(clean_text("pre https://example.com/path#frag post", cfg()) == "pre post");
}

TEST_CASE("clean_text folds accents to ascii") {
  CHECK(clean_text("na\xc3\xafve r\xc3\xa9sum\xc3\xa9", cfg()) == "naive resume");
  CHECK(clean_text("\xc3\x9c" "ber stra\xc3\x9f" "e", cfg()) == "uber strasse");
}

TEST_CASE("clean_text is idempotent and preserves digits over a fuzz corpus") {
  Rng rng(202608);
  for (int i = 0; i < 10000; ++i) {
    const std::string raw = fuzz_string(rng);
    const std::string once = clean_text(raw, cfg());
    CHECK(clean_text(once, cfg()) == once);
    CHECK(count_digits(once) == count_digits(raw));
  }
}

TEST_CASE("clean_text is idempotent on adversarial concatenations") {
  // No separating spaces: fragments can fuse into new tokens.
  Rng rng(991);
  for (int i = 0; i < 2000; ++i) {
    std::string raw;
    const std::size_t n = 1 + rng.uniform_int(12);
    static const std::vector<std::string> bits = {
        "a", "<b>", "&amp;", "don't", "\xe2\x80\x99", "caf\xc3\xa9", "!", "#x", "..",
    };
    for (std::size_t k = 0; k < n; ++k) raw += bits[rng.uniform_int(bits.size())];
    const std::string once = clean_text(raw, cfg());
    CHECK(clean_text(once, cfg()) == once);
  }
}

TEST_CASE("digits in plain text are never dropped") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    // Plain alphanumeric + space strings: digit multiset must be preserved.
    std::string raw;
    const std::size_t n = 1 + rng.uniform_int(40);
    long long digits_in = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const int r = static_cast<int>(rng.uniform_int(20));
      if (r < 8) {
        raw += static_cast<char>('a' + rng.uniform_int(26));
      } else if (r < 14) {
        raw += static_cast<char>('0' + rng.uniform_int(10));
        ++digits_in;
      } else if (r < 17) {
        raw += ' ';
      } else {
        raw += static_cast<char>('A' + rng.uniform_int(26));
      }
    }
    const std::string out = clean_text(raw, cfg());
    long long digits_out = 0;
    for (char ch : out) digits_out += (ch >= '0' && ch <= '9') ? 1 : 0;
    CHECK(digits_out == digits_in);
  }
}

TEST_CASE("contraction expansion is case-insensitive and map-driven") {
  const ContractionMap& m = default_contraction_map();
  CHECK(expand_contractions("Can't stop", m) == "cannot stop");
  CHECK(expand_contractions("WON'T", m) == "will not");
  CHECK(expand_contractions("cant", m) == "cant");  // no apostrophe, no match
  CHECK(expand_contractions("brand's", m) == "brand's");  // possessive not in map
}

TEST_CASE("contraction map loads from tsv") {
  const fs::path p = fs::temp_directory_path() / "drought_test_contractions.tsv";
  {
    std::ofstream out(p);
    out << "can't\tcannot\nshan't\tshall not\n";
  }
  ContractionMap m = load_contraction_map(p.string());
  CHECK(m.size() == 2);
  CHECK(m.at("can't") == "cannot");
  CHECK(expand_contractions("shan't go", m) == "shall not go");
  fs::remove(p);
}

TEST_CASE("vocabulary reserves pad/cls/sep/unk and round-trips through disk") {
  Vocabulary v;
  CHECK(v.size() == Vocabulary::kNumReserved);
  const int a = v.add("drought");
  const int b = v.add("water");
  CHECK(a == Vocabulary::kNumReserved);
  CHECK(v.add("drought") == a);  // idempotent
  CHECK(v.id_of("water") == b);
  CHECK(v.id_of("missing") == Vocabulary::kUnk);
  CHECK(v.token_of(a) == "drought");

  const fs::path p = fs::temp_directory_path() / "drought_test_vocab.txt";
  v.save(p.string());
  Vocabulary back = Vocabulary::load(p.string());
  CHECK(back.size() == v.size());
  CHECK(back.id_of("drought") == a);
  CHECK(back.id_of("water") == b);
  fs::remove(p);
}

TEST_CASE("build_vocab orders by frequency then lexicographically and honors min_count") {
  DocumentSet docs;
  auto add = [&](const std::string& id, const std::string& text) {
    Document d;
    d.id = id;
    d.text = text;
    docs.push_back(d);
  };
  add("1", "water water water crop crop fire");
  add("2", "water crop blaze");
  Vocabulary v = build_vocab(docs, 2);
  CHECK(v.id_of("water") == Vocabulary::kNumReserved);      // count 4
  CHECK(v.id_of("crop") == Vocabulary::kNumReserved + 1);   // count 3
  CHECK(v.id_of("fire") == Vocabulary::kUnk);               // count 1 < min_count
  CHECK(v.id_of("blaze") == Vocabulary::kUnk);

  Vocabulary v1 = build_vocab(docs, 1);
  // blaze and fire both have count 1; lexicographic tiebreak.
  CHECK(v1.id_of("blaze") < v1.id_of("fire"));

  CHECK_THROWS_AS(build_vocab(DocumentSet{}, 1), PreprocessError);
}

TEST_CASE("tokenize frames with cls/sep, pads to max_len, and masks correctly") {
  Vocabulary v;
  v.add("dry");
  v.add("well");
  TokenizedInput t = tokenize("dry well dry", v, 8);
  REQUIRE(t.token_ids.size() == 8);
  REQUIRE(t.attention_mask.size() == 8);
  CHECK(t.token_ids[0] == Vocabulary::kCls);
  CHECK(t.token_ids[1] == v.id_of("dry"));
  CHECK(t.token_ids[2] == v.id_of("well"));
  CHECK(t.token_ids[3] == v.id_of("dry"));
  CHECK(t.token_ids[4] == Vocabulary::kSep);
  CHECK(t.token_ids[5] == Vocabulary::kPad);
  int mask_sum = 0;
  for (int m : t.attention_mask) mask_sum += m;
  CHECK(mask_sum == 5);  // cls + 3 tokens + sep
  for (int i = 0; i < 5; ++i) CHECK(t.attention_mask[static_cast<std::size_t>(i)] == 1);
}

TEST_CASE("tokenize maps unknown words to unk, never errors on them") {
  Vocabulary v;
  v.add("dry");
  TokenizedInput t = tokenize("dry spell", v, 6);
  CHECK(t.token_ids[2] == Vocabulary::kUnk);
}

TEST_CASE("over-length input raises an error naming the token count and limit") {
  Vocabulary v;
  v.add("x");
  CHECK_THROWS_WITH_AS(tokenize("x x x x x", v, 6), doctest::Contains("5"), PreprocessError);
  CHECK_NOTHROW(tokenize("x x x x", v, 6));  // exactly max_len - 2 fits
}

TEST_CASE("decode inverts tokenize up to unknown tokens") {
  Vocabulary v;
  v.add("dry");
  v.add("well");
  TokenizedInput t = tokenize("dry well mystery", v, 8);
  std::vector<std::string> words = decode(t, v);
  REQUIRE(words.size() == 3);
  CHECK(words[0] == "dry");
  CHECK(words[1] == "well");
  CHECK(words[2] == "[UNK]");
}
