#include "drought/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "drought/csv.hpp"
#include "drought/keywords.hpp"
#include "drought/rng.hpp"

namespace drought {

using nlohmann::json;

std::string source_name(Source s) {
  switch (s) {
    case Source::dir: return "dir";
    case Source::tweet: return "tweet";
    case Source::synthetic: return "synthetic";
  }
  return "dir";
}

Source parse_source(const std::string& name) {
  if (name == "dir") return Source::dir;
  if (name == "tweet") return Source::tweet;
  if (name == "synthetic") return Source::synthetic;
  throw CorpusError("unknown source '" + name + "' (expected dir, tweet, or synthetic)");
}

namespace {

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// Classifies trailing header columns as raw-9 labels, canonical-7 labels, or
// rejects them. Requires the complete set of one scheme.
enum class LabelScheme { none, raw9, canonical7 };

LabelScheme classify_label_columns(const std::vector<std::string>& names,
                                   std::vector<int>& order) {
  if (names.empty()) return LabelScheme::none;
  // Six names appear in both schemes; "economy" is canonical-only and
  // energy/business_industry/tourism_recreation are raw-only.
  bool raw_only = false, canonical_only = false;
  for (const auto& n : names) {
    const bool in7 = category_index(n) >= 0;
    const bool in9 = raw_category_index(n) >= 0;
    if (!in7 && !in9) throw CorpusError("unknown label column '" + n + "'");
    if (in9 && !in7) raw_only = true;
    if (in7 && !in9) canonical_only = true;
  }
  if (raw_only && canonical_only)
    throw CorpusError("label columns mix raw and canonical names");
  const LabelScheme scheme = raw_only ? LabelScheme::raw9 : LabelScheme::canonical7;
  const int expected = scheme == LabelScheme::raw9 ? kNumRawCategories : kNumCategories;
  if (static_cast<int>(names.size()) != expected) {
    throw CorpusError("incomplete label column set: got " + std::to_string(names.size()) +
                      " columns, expected " + std::to_string(expected));
  }
  order.clear();
  std::unordered_set<int> seen;
  for (const auto& n : names) {
    const int idx = scheme == LabelScheme::raw9 ? raw_category_index(n) : category_index(n);
    if (!seen.insert(idx).second) throw CorpusError("duplicate label column '" + n + "'");
    order.push_back(idx);
  }
  return scheme;
}

std::uint8_t parse_label_value(const std::string& v, int row) {
  if (v == "0") return 0;
  if (v == "1") return 1;
  throw CorpusError("row " + std::to_string(row) + ": label value '" + v +
                    "' is not 0 or 1");
}

DocumentSet load_csv(std::istream& in, const std::string& path) {
  auto header = csv::read_record(in);
  if (!header) throw CorpusError(path + ": empty file");
  static const std::vector<std::string> fixed = {"id", "text", "source", "location",
                                                 "timestamp"};
  if (header->size() < fixed.size() ||
      !std::equal(fixed.begin(), fixed.end(), header->begin())) {
    throw CorpusError(path + ": header must begin with id,text,source,location,timestamp");
  }
  std::vector<std::string> label_names(header->begin() + 5, header->end());
  std::vector<int> order;
  const LabelScheme scheme = classify_label_columns(label_names, order);

  DocumentSet docs;
  std::unordered_set<std::string> ids;
  int row = 1;
  while (auto rec = csv::read_record(in)) {
    ++row;
    if (rec->size() == 1 && (*rec)[0].empty()) continue;  // trailing blank line
    if (rec->size() != header->size()) {
      throw CorpusError(path + ": row " + std::to_string(row) + ": expected " +
                        std::to_string(header->size()) + " fields, got " +
                        std::to_string(rec->size()));
    }
    Document d;
    d.id = (*rec)[0];
    d.text = (*rec)[1];
    if (d.id.empty()) throw CorpusError(path + ": row " + std::to_string(row) + ": empty id");
    if (is_blank(d.text))
      throw CorpusError(path + ": row " + std::to_string(row) + ": empty text");
    if (!ids.insert(d.id).second)
      throw CorpusError(path + ": duplicate id \"" + d.id + "\"");
    try {
      d.source = parse_source((*rec)[2]);
    } catch (const CorpusError& e) {
      throw CorpusError(path + ": row " + std::to_string(row) + ": " + e.what());
    }
    if (!(*rec)[3].empty()) d.location = (*rec)[3];
    if (!(*rec)[4].empty()) d.timestamp = (*rec)[4];
    if (scheme == LabelScheme::raw9) {
      RawLabelVector9 raw;
      for (std::size_t k = 0; k < order.size(); ++k)
        raw.bits[static_cast<std::size_t>(order[k])] = parse_label_value((*rec)[5 + k], row);
      d.raw_labels = raw;
      d.labels = aggregate_labels(raw);
    } else if (scheme == LabelScheme::canonical7) {
      LabelVector lv;
      for (std::size_t k = 0; k < order.size(); ++k)
        lv.bits[static_cast<std::size_t>(order[k])] = parse_label_value((*rec)[5 + k], row);
      d.labels = lv;
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

DocumentSet load_jsonl(std::istream& in, const std::string& path) {
  DocumentSet docs;
  std::unordered_set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw CorpusError(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("text"))
      throw CorpusError(path + ": line " + std::to_string(lineno) +
                        ": object must contain \"id\" and \"text\"");
    Document d;
    d.id = j.at("id").get<std::string>();
    d.text = j.at("text").get<std::string>();
    if (is_blank(d.text))
      throw CorpusError(path + ": line " + std::to_string(lineno) + ": empty text");
    if (!ids.insert(d.id).second)
      throw CorpusError(path + ": duplicate id \"" + d.id + "\"");
    d.source = j.contains("source") ? parse_source(j.at("source").get<std::string>())
                                    : Source::dir;
    if (j.contains("location") && !j.at("location").is_null())
      d.location = j.at("location").get<std::string>();
    if (j.contains("timestamp") && !j.at("timestamp").is_null())
      d.timestamp = j.at("timestamp").get<std::string>();

    std::vector<std::string> label_names;
    for (auto& [key, val] : j.items()) {
      if (key == "id" || key == "text" || key == "source" || key == "location" ||
          key == "timestamp")
        continue;
      label_names.push_back(key);
    }
    if (!label_names.empty()) {
      std::vector<int> order;
      const LabelScheme scheme = classify_label_columns(label_names, order);
      auto value_of = [&](const std::string& key) -> std::uint8_t {
        const auto& v = j.at(key);
        if (v.is_number_integer()) {
          const int x = v.get<int>();
          if (x == 0 || x == 1) return static_cast<std::uint8_t>(x);
        } else if (v.is_boolean()) {
          return v.get<bool>() ? 1 : 0;
        }
        throw CorpusError(path + ": line " + std::to_string(lineno) + ": label \"" + key +
                          "\" is not 0 or 1");
      };
      if (scheme == LabelScheme::raw9) {
        RawLabelVector9 raw;
        for (std::size_t k = 0; k < order.size(); ++k)
          raw.bits[static_cast<std::size_t>(order[k])] = value_of(label_names[k]);
        d.raw_labels = raw;
        d.labels = aggregate_labels(raw);
      } else {
        LabelVector lv;
        for (std::size_t k = 0; k < order.size(); ++k)
          lv.bits[static_cast<std::size_t>(order[k])] = value_of(label_names[k]);
        d.labels = lv;
      }
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace

DocumentSet load_documents(const std::string& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path);
  return format == CorpusFormat::csv ? load_csv(in, path) : load_jsonl(in, path);
}

void save_documents(const DocumentSet& docs, const std::string& path, CorpusFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot open " + path + " for writing");
  const bool any_raw = std::any_of(docs.begin(), docs.end(),
                                   [](const Document& d) { return d.raw_labels.has_value(); });
  const bool any_canonical = std::any_of(docs.begin(), docs.end(),
                                         [](const Document& d) { return d.labels.has_value(); });
  if (format == CorpusFormat::csv) {
    std::vector<std::string> header = {"id", "text", "source", "location", "timestamp"};
    if (any_raw)
      for (auto n : kRawCategoryNames) header.emplace_back(n);
    else if (any_canonical)
      for (auto n : kCategoryNames) header.emplace_back(n);
    csv::write_record(out, header);
    for (const auto& d : docs) {
      std::vector<std::string> rec = {d.id, d.text, source_name(d.source),
                                      d.location.value_or(""), d.timestamp.value_or("")};
      if (any_raw) {
        RawLabelVector9 raw = d.raw_labels.value_or(RawLabelVector9{});
        for (auto b : raw.bits) rec.push_back(b ? "1" : "0");
      } else if (any_canonical) {
        LabelVector lv = d.labels.value_or(LabelVector{});
        for (auto b : lv.bits) rec.push_back(b ? "1" : "0");
      }
      csv::write_record(out, rec);
    }
  } else {
    for (const auto& d : docs) {
      json j;
      j["id"] = d.id;
      j["text"] = d.text;
      j["source"] = source_name(d.source);
      if (d.location) j["location"] = *d.location;
      if (d.timestamp) j["timestamp"] = *d.timestamp;
      if (d.raw_labels) {
        for (int i = 0; i < kNumRawCategories; ++i)
          j[std::string(kRawCategoryNames[static_cast<std::size_t>(i)])] =
              static_cast<int>(d.raw_labels->bits[static_cast<std::size_t>(i)]);
      } else if (d.labels) {
        for (int i = 0; i < kNumCategories; ++i)
          j[std::string(kCategoryNames[static_cast<std::size_t>(i)])] =
              static_cast<int>(d.labels->bits[static_cast<std::size_t>(i)]);
      }
      out << j.dump() << '\n';
    }
  }
}

void SplitSpec::validate() const {
  if (train < 0 || val < 0 || test < 0) throw CorpusError("split ratios must be non-negative");
  if (std::abs(train + val + test - 1.0) > 1e-9)
    throw CorpusError("split ratios must sum to 1");
}

namespace {

// Shuffles indices with rng, then floors into train/val with remainder test.
void assign_block(const std::vector<std::size_t>& group, Rng& rng, const SplitSpec& spec,
                  const DocumentSet& docs, Split& out) {
  std::vector<std::size_t> idx = group;
  rng.shuffle(idx);
  const std::size_t n = idx.size();
  const std::size_t n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train));
  const std::size_t n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.val));
  for (std::size_t k = 0; k < n; ++k) {
    const Document& d = docs[idx[k]];
    if (k < n_train) out.train.push_back(d);
    else if (k < n_train + n_val) out.val.push_back(d);
    else out.test.push_back(d);
  }
}

}  // namespace

Split split_dataset(const DocumentSet& docs, const SplitSpec& spec) {
  spec.validate();
  if (docs.empty()) throw CorpusError("cannot split an empty corpus");
  Rng rng = Rng::forked(spec.seed, /*stream=*/1);
  Split out;
  if (!spec.stratified) {
    std::vector<std::size_t> all(docs.size());
    std::iota(all.begin(), all.end(), 0u);
    assign_block(all, rng, spec, docs, out);
  } else {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      std::string sig = "unlabeled";
      if (docs[i].labels) {
        sig.clear();
        for (auto b : docs[i].labels->bits) sig.push_back(b ? '1' : '0');
      }
      groups[sig].push_back(i);
    }
    for (auto& [sig, group] : groups) assign_block(group, rng, spec, docs, out);
  }
  return out;
}

void write_split_manifest(const Split& split, const SplitSpec& spec, const std::string& path) {
  json j;
  j["seed"] = spec.seed;
  j["ratios"] = {spec.train, spec.val, spec.test};
  j["stratified"] = spec.stratified;
  json assignment = json::object();
  for (const auto& d : split.train) assignment[d.id] = "train";
  for (const auto& d : split.val) assignment[d.id] = "val";
  for (const auto& d : split.test) assignment[d.id] = "test";
  j["assignment"] = assignment;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

CorpusStats corpus_stats(const DocumentSet& docs, int bin_width) {
  CorpusStats s;
  s.bin_width = bin_width;
  s.word_counts.reserve(docs.size());
  for (const auto& d : docs) {
    int count = 0;
    bool in_token = false;
    for (unsigned char c : d.text) {
      if (std::isspace(c)) {
        in_token = false;
      } else if (!in_token) {
        in_token = true;
        ++count;
      }
    }
    s.word_counts.push_back(count);
    s.total_words += count;
    s.max_words = std::max(s.max_words, count);
    ++s.histogram[(count / bin_width) * bin_width];
  }
  s.mean_words = docs.empty() ? 0.0
                              : static_cast<double>(s.total_words) /
                                    static_cast<double>(docs.size());
  return s;
}

namespace {

// Filler words for synthetic documents; filtered against the table at
// generation time so they never trip the keyword labeler.
const std::vector<std::string> kFillers = {
    "drought",  "update",  "from",    "county",   "this",   "week",
    "officials", "say",    "conditions", "continue", "across", "region",
    "report",   "today",   "statewide", "summer",  "ongoing", "situation"};

}  // namespace

DocumentSet generate_synthetic(int n, std::uint64_t seed, const KeywordTable& table,
                               double noise) {
  if (n <= 0) throw CorpusError("generate_synthetic: n must be positive");
  if (noise < 0.0 || noise > 1.0) throw CorpusError("generate_synthetic: noise must be in [0,1]");
  if (table.empty()) throw CorpusError("generate_synthetic: empty keyword table");

  std::vector<std::string> fillers;
  for (const auto& w : kFillers)
    if (!table.categories_of(w).any()) fillers.push_back(w);
  if (fillers.empty()) fillers = {"qx", "zv", "wq"};

  // Flattened keyword list per category, sorted for determinism.
  std::array<std::vector<std::string>, kNumCategories> kw;
  std::vector<int> nonempty;
  for (int c = 0; c < kNumCategories; ++c) {
    kw[static_cast<std::size_t>(c)].assign(table.keywords(c).begin(), table.keywords(c).end());
    if (!kw[static_cast<std::size_t>(c)].empty()) nonempty.push_back(c);
  }
  if (nonempty.empty()) throw CorpusError("generate_synthetic: empty keyword table");

  Rng rng = Rng::forked(seed, /*stream=*/2);

  // Which documents receive a distractor keyword.
  const int n_noisy = static_cast<int>(std::llround(noise * n));
  std::vector<int> doc_order(static_cast<std::size_t>(n));
  std::iota(doc_order.begin(), doc_order.end(), 0);
  rng.shuffle(doc_order);
  std::vector<bool> noisy(static_cast<std::size_t>(n), false);
  for (int k = 0; k < n_noisy; ++k) noisy[static_cast<std::size_t>(doc_order[static_cast<std::size_t>(k)])] = true;

  DocumentSet docs;
  docs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Sample 1-3 categories and 1-2 keywords from each.
    std::vector<int> cats = nonempty;
    rng.shuffle(cats);
    const std::size_t n_cats = 1 + rng.uniform_int(std::min<std::uint64_t>(3, cats.size()));
    cats.resize(n_cats);

    std::vector<std::string> tokens;
    LabelVector truth;
    for (int c : cats) {
      const auto& pool = kw[static_cast<std::size_t>(c)];
      const std::size_t n_kw = 1 + rng.uniform_int(std::min<std::uint64_t>(2, pool.size()));
      for (std::size_t k = 0; k < n_kw; ++k) {
        const std::string& word = pool[rng.uniform_int(pool.size())];
        tokens.push_back(word);
        // A keyword shared between categories labels all of them.
        LabelVector owners = table.categories_of(word);
        for (int b = 0; b < kNumCategories; ++b)
          truth.bits[static_cast<std::size_t>(b)] |= owners.bits[static_cast<std::size_t>(b)];
      }
    }

    if (noisy[static_cast<std::size_t>(i)]) {
      // A keyword from categories entirely outside the ground-truth labels.
      for (int attempt = 0; attempt < 64; ++attempt) {
        const int c = nonempty[rng.uniform_int(nonempty.size())];
        const auto& pool = kw[static_cast<std::size_t>(c)];
        const std::string& word = pool[rng.uniform_int(pool.size())];
        LabelVector owners = table.categories_of(word);
        bool overlaps = false;
        for (int b = 0; b < kNumCategories; ++b)
          if (owners.bits[static_cast<std::size_t>(b)] && truth.bits[static_cast<std::size_t>(b)]) overlaps = true;
        if (!overlaps) {
          tokens.push_back(word);
          break;
        }
      }
    }

    const std::size_t n_fill = 3 + rng.uniform_int(4);
    for (std::size_t k = 0; k < n_fill; ++k)
      tokens.push_back(fillers[rng.uniform_int(fillers.size())]);
    rng.shuffle(tokens);

    Document d;
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "synth-%06d", i);
    d.id = idbuf;
    d.source = Source::synthetic;
    d.labels = truth;
    std::ostringstream text;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      if (k) text << ' ';
      text << tokens[k];
    }
    d.text = text.str();
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace drought
