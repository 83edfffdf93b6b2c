#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "drought/corpus.hpp"
#include "drought/keywords.hpp"
#include "drought/rng.hpp"

using namespace drought;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("drought_test_" + name);
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DocumentSet make_docs(int n) {
  DocumentSet docs;
  for (int i = 0; i < n; ++i) {
    Document d;
    d.id = "d" + std::to_string(i);
    d.text = "document number " + std::to_string(i);
    d.source = Source::dir;
    LabelVector v{};
    v.bits[static_cast<std::size_t>(i % kNumCategories)] = 1;
    d.labels = v;
    docs.push_back(d);
  }
  return docs;
}

}  // namespace

TEST_CASE("aggregate_labels maps energy, business, and tourism into economy") {
  RawLabelVector9 raw{};
  raw.bits[static_cast<std::size_t>(raw_category_index("energy"))] = 1;
  CHECK(aggregate_labels(raw).bits[static_cast<std::size_t>(category_index("economy"))] == 1);

  raw = RawLabelVector9{};
  raw.bits[static_cast<std::size_t>(raw_category_index("business_industry"))] = 1;
  raw.bits[static_cast<std::size_t>(raw_category_index("fire"))] = 1;
  LabelVector out = aggregate_labels(raw);
  CHECK(out.bits[static_cast<std::size_t>(category_index("economy"))] == 1);
  CHECK(out.bits[static_cast<std::size_t>(category_index("fire"))] == 1);
  CHECK(out.count() == 2);
}

TEST_CASE("aggregate_labels is monotone and surjective onto the seven categories") {
  // Monotone: adding a raw bit never clears a canonical bit.
  for (int i = 0; i < kNumRawCategories; ++i) {
    for (int j = 0; j < kNumRawCategories; ++j) {
      RawLabelVector9 a{};
      a.bits[static_cast<std::size_t>(i)] = 1;
      RawLabelVector9 b = a;
      b.bits[static_cast<std::size_t>(j)] = 1;
      LabelVector la = aggregate_labels(a), lb = aggregate_labels(b);
      for (int c = 0; c < kNumCategories; ++c)
        CHECK(lb.bits[static_cast<std::size_t>(c)] >= la.bits[static_cast<std::size_t>(c)]);
    }
  }
  // Surjective: every canonical bit is reachable from some single raw bit.
  std::set<int> hit;
  for (int i = 0; i < kNumRawCategories; ++i) {
    RawLabelVector9 raw{};
    raw.bits[static_cast<std::size_t>(i)] = 1;
    LabelVector out = aggregate_labels(raw);
    for (int c = 0; c < kNumCategories; ++c)
      if (out.bits[static_cast<std::size_t>(c)]) hit.insert(c);
  }
  CHECK(hit.size() == static_cast<std::size_t>(kNumCategories));
}

TEST_CASE("csv round trip preserves documents and labels") {
  DocumentSet docs = make_docs(9);
  docs[3].text = "comma, \"quotes\" and\nnewline";
  docs[4].location = "Lincoln, NE";
  docs[5].timestamp = "2017-06-01";
  const fs::path p = temp_file("roundtrip.csv");
  save_documents(docs, p.string(), CorpusFormat::csv);
  DocumentSet back = load_documents(p.string(), CorpusFormat::csv);
  REQUIRE(back.size() == docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(back[i].id == docs[i].id);
    CHECK(back[i].text == docs[i].text);
    CHECK(back[i].location == docs[i].location);
    CHECK(back[i].timestamp == docs[i].timestamp);
    CHECK(*back[i].labels == *docs[i].labels);
  }
  fs::remove(p);
}

TEST_CASE("jsonl round trip preserves documents and labels") {
  DocumentSet docs = make_docs(5);
  docs[2].text = "unicode caf\xc3\xa9 and \"quotes\"";
  const fs::path p = temp_file("roundtrip.jsonl");
  save_documents(docs, p.string(), CorpusFormat::jsonl);
  DocumentSet back = load_documents(p.string(), CorpusFormat::jsonl);
  REQUIRE(back.size() == docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(back[i].id == docs[i].id);
    CHECK(back[i].text == docs[i].text);
    CHECK(*back[i].labels == *docs[i].labels);
  }
  fs::remove(p);
}

TEST_CASE("duplicate ids are rejected with the offending id") {
  const fs::path p = temp_file("dup.csv");
  write_file(p,
             "id,text,source,location,timestamp\n"
             "t1,first,tweet,,\n"
             "t1,second,tweet,,\n");
  CHECK_THROWS_WITH_AS(load_documents(p.string(), CorpusFormat::csv),
                       doctest::Contains("t1"), CorpusError);
  fs::remove(p);
}

TEST_CASE("malformed rows report their row number") {
  const fs::path p = temp_file("short.csv");
  write_file(p,
             "id,text,source,location,timestamp\n"
             "a,ok,dir,,\n"
             "b,missing-fields\n");
  CHECK_THROWS_WITH_AS(load_documents(p.string(), CorpusFormat::csv),
                       doctest::Contains("row 3"), CorpusError);
  fs::remove(p);
}

TEST_CASE("jsonl missing text reports the line number") {
  const fs::path p = temp_file("notext.jsonl");
  write_file(p,
             "{\"id\":\"a\",\"text\":\"fine\",\"source\":\"tweet\"}\n"
             "{\"id\":\"b\",\"source\":\"tweet\"}\n");
  CHECK_THROWS_WITH_AS(load_documents(p.string(), CorpusFormat::jsonl),
                       doctest::Contains("line 2"), CorpusError);
  fs::remove(p);
}

TEST_CASE("label columns must be a complete canonical or raw set, never a mix") {
  const fs::path p = temp_file("labels.csv");
  SUBCASE("mixed schemes") {
    write_file(p,
               "id,text,source,location,timestamp,economy,energy\n"
               "a,x,dir,,,0,0\n");
    CHECK_THROWS_AS(load_documents(p.string(), CorpusFormat::csv), CorpusError);
  }
  SUBCASE("incomplete set") {
    write_file(p,
               "id,text,source,location,timestamp,fire\n"
               "a,x,dir,,,1\n");
    CHECK_THROWS_AS(load_documents(p.string(), CorpusFormat::csv), CorpusError);
  }
  SUBCASE("non-binary value") {
    std::string header = "id,text,source,location,timestamp";
    for (auto n : kCategoryNames) header += "," + std::string(n);
    write_file(p, header + "\na,x,dir,,,0,1,2,0,0,0,0\n");
    CHECK_THROWS_AS(load_documents(p.string(), CorpusFormat::csv), CorpusError);
  }
  fs::remove(p);
}

TEST_CASE("raw nine-column corpora are aggregated on load") {
  const fs::path p = temp_file("raw9.csv");
  std::string header = "id,text,source,location,timestamp";
  for (auto n : kRawCategoryNames) header += "," + std::string(n);
  // energy=1, tourism_recreation=1, fire=1
  write_file(p, header + "\na,x,dir,,,0,1,0,0,0,0,1,0,1\n");
  DocumentSet docs = load_documents(p.string(), CorpusFormat::csv);
  REQUIRE(docs.size() == 1);
  REQUIRE(docs[0].labels.has_value());
  CHECK(docs[0].labels->bits[static_cast<std::size_t>(category_index("economy"))] == 1);
  CHECK(docs[0].labels->bits[static_cast<std::size_t>(category_index("fire"))] == 1);
  CHECK(docs[0].labels->count() == 2);
  REQUIRE(docs[0].raw_labels.has_value());
  fs::remove(p);
}

TEST_CASE("split sizes follow the floor rule: 14178 -> 11342/1417/1419") {
  DocumentSet docs = make_docs(14178);
  SplitSpec spec;
  spec.seed = 1;
  Split s = split_dataset(docs, spec);
  CHECK(s.train.size() == 11342);
  CHECK(s.val.size() == 1417);
  CHECK(s.test.size() == 1419);
}

TEST_CASE("split is a partition and is seed-deterministic") {
  DocumentSet docs = make_docs(101);
  SplitSpec spec;
  spec.seed = 42;
  Split a = split_dataset(docs, spec);
  Split b = split_dataset(docs, spec);
  std::set<std::string> ids;
  for (const auto* part : {&a.train, &a.val, &a.test})
    for (const Document& d : *part) CHECK(ids.insert(d.id).second);
  CHECK(ids.size() == docs.size());
  auto id_seq = [](const DocumentSet& ds) {
    std::string s;
    for (const Document& d : ds) s += d.id + ";";
    return s;
  };
  CHECK(id_seq(a.train) == id_seq(b.train));
  CHECK(id_seq(a.val) == id_seq(b.val));
  CHECK(id_seq(a.test) == id_seq(b.test));

  spec.seed = 43;
  Split c = split_dataset(docs, spec);
  CHECK(id_seq(a.train) != id_seq(c.train));  // different seed reshuffles
}

TEST_CASE("stratified split keeps every signature group proportionate") {
  DocumentSet docs = make_docs(70);  // 10 per single-label signature
  SplitSpec spec;
  spec.seed = 7;
  spec.stratified = true;
  Split s = split_dataset(docs, spec);
  CHECK(s.train.size() == 56);  // floor(10*0.8)=8 per group
  CHECK(s.val.size() == 7);
  CHECK(s.test.size() == 7);
}

TEST_CASE("split manifest lists every id exactly once with seed and ratios") {
  DocumentSet docs = make_docs(25);
  SplitSpec spec;
  spec.seed = 5;
  Split s = split_dataset(docs, spec);
  const fs::path p = temp_file("manifest.json");
  write_split_manifest(s, spec, p.string());
  const std::string text = read_file(p);
  CHECK(text.find("\"seed\"") != std::string::npos);
  CHECK(text.find("\"train\"") != std::string::npos);
  for (const Document& d : docs) CHECK(text.find("\"" + d.id + "\"") != std::string::npos);
  fs::remove(p);
}

TEST_CASE("corpus_stats counts whitespace tokens of raw text") {
  DocumentSet docs;
  Document a;
  a.id = "a";
  a.text = "one two  three";  // double space still splits to 3 tokens
  Document b;
  b.id = "b";
  b.text = "https://x.co  SEVEN words in THIS raw sentence";  // 7 tokens, raw text
  docs.push_back(a);
  docs.push_back(b);
  CorpusStats stats = corpus_stats(docs, 5);
  REQUIRE(stats.word_counts.size() == 2);
  CHECK(stats.word_counts[0] == 3);
  CHECK(stats.word_counts[1] == 7);
  CHECK(stats.total_words == 10);
  CHECK(stats.mean_words == doctest::Approx(5.0));
  CHECK(stats.max_words == 7);
  CHECK(stats.histogram.at(0) == 1);
  CHECK(stats.histogram.at(5) == 1);
}

TEST_CASE("synthetic corpus is deterministic and keyword-consistent") {
  KeywordTable table = default_keyword_table();
  DocumentSet a = generate_synthetic(50, 11, table, 0.0);
  DocumentSet b = generate_synthetic(50, 11, table, 0.0);
  REQUIRE(a.size() == 50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].text == b[i].text);
    CHECK(*a[i].labels == *b[i].labels);
    // Noise-free ground truth equals the keyword labeler output exactly.
    CHECK(label_document(a[i].text, table) == *a[i].labels);
    CHECK(a[i].labels->any());
    CHECK(a[i].source == Source::synthetic);
  }
  DocumentSet c = generate_synthetic(50, 12, table, 0.0);
  bool differs = false;
  for (std::size_t i = 0; i < c.size(); ++i) differs = differs || c[i].text != a[i].text;
  CHECK(differs);
}

TEST_CASE("synthetic noise adds distractor keywords outside the true labels") {
  KeywordTable table = default_keyword_table();
  DocumentSet docs = generate_synthetic(200, 3, table, 0.5);
  int noisy = 0;
  for (const Document& d : docs) {
    LabelVector relabeled = label_document(d.text, table);
    // Keyword labels may exceed but never miss the stored ground truth bits.
    for (int c = 0; c < kNumCategories; ++c)
      CHECK(relabeled.bits[static_cast<std::size_t>(c)] >=
            d.labels->bits[static_cast<std::size_t>(c)]);
    if (!(relabeled == *d.labels)) ++noisy;
  }
  CHECK(noisy > 0);
  CHECK(noisy <= 100 + 20);  // about half the corpus
  CHECK(noisy >= 100 - 20);
}

TEST_CASE("split ratios are validated") {
  SplitSpec spec;
  spec.train = 0.9;
  spec.val = 0.2;
  spec.test = 0.1;
  CHECK_THROWS_AS(spec.validate(), CorpusError);
}
