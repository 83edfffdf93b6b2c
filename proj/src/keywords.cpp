#include "drought/keywords.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace drought {

using nlohmann::json;

void KeywordTable::add(int category, const std::string& keyword) {
  if (category < 0 || category >= kNumCategories)
    throw CorpusError("keyword table: invalid category index");
  if (keyword.empty()) throw CorpusError("keyword table: empty keyword");
  for (unsigned char c : keyword) {
    if (std::isspace(c))
      throw CorpusError("keyword table: multi-word keyword \"" + keyword + "\"");
    if (std::isupper(c))
      throw CorpusError("keyword table: keyword \"" + keyword + "\" is not lowercase");
  }
  sets_[static_cast<std::size_t>(category)].insert(keyword);
}

bool KeywordTable::empty() const {
  return std::all_of(sets_.begin(), sets_.end(),
                     [](const std::set<std::string>& s) { return s.empty(); });
}

LabelVector KeywordTable::categories_of(const std::string& token) const {
  LabelVector out;
  for (int c = 0; c < kNumCategories; ++c)
    if (sets_[static_cast<std::size_t>(c)].count(token))
      out.bits[static_cast<std::size_t>(c)] = 1;
  return out;
}

KeywordTable default_keyword_table() {
  static const std::array<std::vector<const char*>, kNumCategories> rows = {{
      // agriculture
      {"hay", "crops", "corn", "cattle", "livestock", "crop", "farmers", "wheat",
       "pasture", "irrigation", "grass", "producer", "agriculture", "grazing", "cotton",
       "yield", "yields", "soybean", "ranchers", "trees", "producers", "ponds", "growth",
       "growing"},
      // economy
      {"boat", "ski", "business", "fishing", "park", "ramps", "power", "businesses",
       "fireworks", "golf", "hydropower", "lawn", "prices"},
      // fire
      {"fire", "burn", "fires", "wildfires", "burning", "burned", "wildfire"},
      // plants_wildlife
      {"leaves", "brown", "plants", "wildlife", "fish", "soil", "lawn", "garden", "deer",
       "browning", "birds", "bird", "tree", "trees"},
      // relief_response_restrictions
      {"restrictions", "ban", "conservation", "mandatory", "voluntary", "declaration",
       "governor", "communities", "prohibited", "conserve"},
      // society_public_health
      {"quality", "dust", "food", "health", "allergies", "smoke", "homeowners", "mental",
       "stress"},
      // water_supply_quality
      {"restrictions", "river", "conservation", "lake", "irrigation", "wells", "ponds",
       "quality", "reservoir", "pond"},
  }};
  KeywordTable t;
  for (int c = 0; c < kNumCategories; ++c)
    for (const char* w : rows[static_cast<std::size_t>(c)]) t.add(c, w);
  return t;
}

KeywordTable load_keyword_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CorpusError(path + ": " + e.what());
  }
  if (!j.is_object()) throw CorpusError(path + ": expected a JSON object");
  KeywordTable t;
  for (auto& [name, words] : j.items()) {
    const int c = category_index(name);
    if (c < 0) throw CorpusError(path + ": unknown category \"" + name + "\"");
    if (!words.is_array() || words.empty())
      throw CorpusError(path + ": category \"" + name + "\" must be a non-empty array");
    for (const auto& w : words) t.add(c, w.get<std::string>());
  }
  if (t.empty()) throw CorpusError(path + ": empty keyword table");
  return t;
}

void save_keyword_table(const KeywordTable& table, const std::string& path) {
  json j = json::object();
  for (int c = 0; c < kNumCategories; ++c) {
    json arr = json::array();
    for (const auto& w : table.keywords(c)) arr.push_back(w);
    j[std::string(kCategoryNames[static_cast<std::size_t>(c)])] = arr;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

namespace {

// Lowercase a token, strip one leading # or @, then strip surrounding
// punctuation. ASCII-only normalization; the labeler works on raw text.
std::string normalize_token(const std::string& raw) {
  std::string t;
  t.reserve(raw.size());
  for (unsigned char c : raw) t.push_back(static_cast<char>(std::tolower(c)));
  std::size_t begin = 0, end = t.size();
  if (begin < end && (t[begin] == '#' || t[begin] == '@')) ++begin;
  while (begin < end && std::ispunct(static_cast<unsigned char>(t[begin]))) ++begin;
  while (end > begin && std::ispunct(static_cast<unsigned char>(t[end - 1]))) --end;
  return t.substr(begin, end - begin);
}

}  // namespace

LabelVector label_document(const std::string& text, const KeywordTable& table) {
  LabelVector out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      const std::string token = normalize_token(text.substr(i, j - i));
      if (!token.empty()) {
        LabelVector hit = table.categories_of(token);
        for (int c = 0; c < kNumCategories; ++c)
          out.bits[static_cast<std::size_t>(c)] |= hit.bits[static_cast<std::size_t>(c)];
      }
    }
    i = j;
  }
  return out;
}

DocumentSet label_corpus(const DocumentSet& docs, const KeywordTable& table) {
  DocumentSet out;
  for (const auto& d : docs) {
    LabelVector lv = label_document(d.text, table);
    if (!lv.any()) continue;
    Document copy = d;
    copy.labels = lv;
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace drought
