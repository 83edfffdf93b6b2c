#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "drought/labels.hpp"

namespace drought {

enum class Source { dir, tweet, synthetic };

std::string source_name(Source s);
Source parse_source(const std::string& name);

struct Document {
  std::string id;
  std::string text;
  Source source = Source::dir;
  std::optional<std::string> location;
  std::optional<std::string> timestamp;
  std::optional<LabelVector> labels;
  std::optional<RawLabelVector9> raw_labels;
};

using DocumentSet = std::vector<Document>;

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CorpusFormat { csv, jsonl };

// Reads documents from CSV (RFC-4180) or JSONL. Label columns, when present,
// must form exactly the nine raw names or the seven canonical names.
// Throws CorpusError on missing file, malformed rows (with row number),
// duplicate ids, or unknown label columns.
DocumentSet load_documents(const std::string& path, CorpusFormat format);

void save_documents(const DocumentSet& docs, const std::string& path, CorpusFormat format);

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;
  bool stratified = false;

  void validate() const;
};

struct Split {
  DocumentSet train;
  DocumentSet val;
  DocumentSet test;
};

// Uniform random permutation of the corpus determined entirely by the seed,
// then floor(N*ratio) documents to train and validation with the remainder
// going to test. With stratified=true the same rule is applied within each
// label-signature group.
Split split_dataset(const DocumentSet& docs, const SplitSpec& spec);

// JSON manifest mapping id -> {train|val|test}, plus seed and ratios.
void write_split_manifest(const Split& split, const SplitSpec& spec, const std::string& path);

struct CorpusStats {
  std::vector<int> word_counts;  // whitespace tokens of raw text, per document
  long long total_words = 0;
  double mean_words = 0.0;
  int max_words = 0;
  std::map<int, int> histogram;  // bin lower bound -> count
  int bin_width = 5;
};

CorpusStats corpus_stats(const DocumentSet& docs, int bin_width = 5);

class KeywordTable;  // keywords.hpp

// Deterministic desk-scale corpus: each document embeds keywords of a sampled
// label subset among non-keyword filler words; ground-truth labels are the
// union of table categories of the embedded keywords. A `noise` fraction of
// documents additionally carry one distractor keyword from categories outside
// their labels.
DocumentSet generate_synthetic(int n, std::uint64_t seed, const KeywordTable& table,
                               double noise);

}  // namespace drought
