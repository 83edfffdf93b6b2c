#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "drought/corpus.hpp"
#include "drought/keywords.hpp"

using namespace drought;
namespace fs = std::filesystem;

namespace {

LabelVector expect(std::initializer_list<const char*> names) {
  LabelVector v{};
  for (const char* n : names) v.bits[static_cast<std::size_t>(category_index(n))] = 1;
  return v;
}

}  // namespace

TEST_CASE("default table: fire keywords are exactly the published seven") {
  const KeywordTable t = default_keyword_table();
  const std::set<std::string> expected = {"fire",    "burn",   "fires",   "wildfires",
                                          "burning", "burned", "wildfire"};
  CHECK(t.keywords(category_index("fire")) == expected);
}

TEST_CASE("default table: shared keywords span their categories") {
  const KeywordTable t = default_keyword_table();
  CHECK(t.categories_of("irrigation") == expect({"agriculture", "water_supply_quality"}));
  CHECK(t.categories_of("restrictions") ==
        expect({"relief_response_restrictions", "water_supply_quality"}));
  CHECK(t.categories_of("lawn") == expect({"economy", "plants_wildlife"}));
  CHECK(t.categories_of("ponds") == expect({"agriculture", "water_supply_quality"}));
  CHECK(t.categories_of("quality") ==
        expect({"society_public_health", "water_supply_quality"}));
  CHECK(t.categories_of("nothing-here") == LabelVector{});
}

TEST_CASE("golden sentences label exactly as expected") {
  const KeywordTable t = default_keyword_table();
  struct Case {
    const char* text;
    LabelVector want;
  };
  const std::vector<Case> cases = {
      {"wildfire season", expect({"fire"})},
      {"the crops failed again", expect({"agriculture"})},
      {"new irrigation restrictions announced",
       expect({"agriculture", "water_supply_quality", "relief_response_restrictions"})},
      {"BURNING hills tonight", expect({"fire"})},
      {"#wildfires spreading fast", expect({"fire"})},
      {"fish dying in the lake", expect({"plants_wildlife", "water_supply_quality"})},
      {"river levels dropping", expect({"water_supply_quality"})},
      {"city issues water conservation order",
       expect({"water_supply_quality", "relief_response_restrictions"})},
      {"hay prices up, ranchers selling cattle", expect({"agriculture", "economy"})},
      {"reservoir at record low", expect({"water_supply_quality"})},
      {"dust storms hit the valley", expect({"society_public_health"})},
      {"golf courses go brown", expect({"economy", "plants_wildlife"})},
      {"my lawn is dead", expect({"economy", "plants_wildlife"})},
      {"hydropower output cut", expect({"economy"})},
      {"boat ramps closed at the marina", expect({"economy"})},
      {"trees losing leaves early", expect({"agriculture", "plants_wildlife"})},
      {"drinking water quality warning", expect({"water_supply_quality",
                                                 "society_public_health"})},
      {"governor signs a drought declaration", expect({"relief_response_restrictions"})},
      {"Fire! Fire! said the @farmer", expect({"fire"})},
      {"nothing relevant here", LabelVector{}},
      // Negatives: morphological variants outside the table must not match.
      {"burnt fields everywhere", LabelVector{}},
      {"firefighters on standby", LabelVector{}},
  };
  for (const Case& c : cases) {
    CAPTURE(c.text);
    CHECK(label_document(c.text, t) == c.want);
  }
}

TEST_CASE("matching strips hashtags, mentions, and surrounding punctuation") {
  const KeywordTable t = default_keyword_table();
  CHECK(label_document("#fire", t) == expect({"fire"}));
  CHECK(label_document("@fire", t) == expect({"fire"}));
  CHECK(label_document("(fire)", t) == expect({"fire"}));
  CHECK(label_document("fire.", t) == expect({"fire"}));
  CHECK(label_document("FIRE", t) == expect({"fire"}));
  CHECK(label_document("campfire", t) == LabelVector{});  // substring must not match
}

TEST_CASE("label_corpus keeps only documents with at least one positive bit") {
  const KeywordTable t = default_keyword_table();
  DocumentSet docs;
  Document a;
  a.id = "a";
  a.text = "wildfire nearby";
  Document b;
  b.id = "b";
  b.text = "completely unrelated";
  docs.push_back(a);
  docs.push_back(b);
  DocumentSet labeled = label_corpus(docs, t);
  REQUIRE(labeled.size() == 1);
  CHECK(labeled[0].id == "a");
  CHECK(*labeled[0].labels == expect({"fire"}));
}

TEST_CASE("keyword table validates entries") {
  KeywordTable t;
  CHECK(t.empty());
  CHECK_THROWS_AS(t.add(category_index("fire"), "two words"), CorpusError);
  CHECK_THROWS_AS(t.add(category_index("fire"), "Fire"), CorpusError);
  CHECK_THROWS_AS(t.add(category_index("fire"), ""), CorpusError);
  CHECK_NOTHROW(t.add(category_index("fire"), "blaze"));
  CHECK_FALSE(t.empty());
}

TEST_CASE("keyword table round-trips through json") {
  const KeywordTable t = default_keyword_table();
  const fs::path p = fs::temp_directory_path() / "drought_test_keywords.json";
  save_keyword_table(t, p.string());
  KeywordTable back = load_keyword_table(p.string());
  for (int c = 0; c < kNumCategories; ++c) CHECK(back.keywords(c) == t.keywords(c));
  fs::remove(p);
}

TEST_CASE("loading a table with an unknown category fails") {
  const fs::path p = fs::temp_directory_path() / "drought_test_badkw.json";
  {
    std::ofstream out(p);
    out << "{\"volcanoes\": [\"lava\"]}";
  }
  CHECK_THROWS_AS(load_keyword_table(p.string()), CorpusError);
  fs::remove(p);
}
