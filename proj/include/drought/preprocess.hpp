#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "drought/corpus.hpp"

namespace drought {

struct PreprocessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using ContractionMap = std::map<std::string, std::string>;

struct CleaningConfig {
  ContractionMap contraction_map;  // keys lowercase
  bool keep_stopwords = true;      // stop-words are never removed
  bool keep_numbers = true;        // digits are never removed

  static CleaningConfig defaults();
};

// ~120 common English contractions; all keys contain an apostrophe, so the
// expansion pass is a no-op on already-cleaned text.
ContractionMap default_contraction_map();

// Two-column TSV: contraction <TAB> expansion.
ContractionMap load_contraction_map(const std::string& path);

// Replaces every maximal apostrophe-word token matching a map key
// (case-insensitively) with its expansion.
std::string expand_contractions(const std::string& text, const ContractionMap& map);

// In order: (i) strip HTML tags and entities, strip URLs, fold accented
// characters; (ii) expand contractions; (iii) drop everything outside
// alphanumerics and whitespace, collapse whitespace, lowercase.
std::string clean_text(const std::string& raw, const CleaningConfig& cfg);

// Whitespace-token vocabulary with four reserved ids.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kCls = 1;
  static constexpr int kSep = 2;
  static constexpr int kUnk = 3;
  static constexpr int kNumReserved = 4;

  int add(const std::string& token);  // idempotent, returns id
  int id_of(const std::string& token) const;  // kUnk when absent
  const std::string& token_of(int id) const;
  int size() const { return kNumReserved + static_cast<int>(tokens_.size()); }

  void save(const std::string& path) const;  // one token per line
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Vocabulary over cleaned text; tokens occurring fewer than min_count times
// map to the unknown id. Throws on an empty corpus.
Vocabulary build_vocab(const DocumentSet& docs, int min_count,
                       const CleaningConfig& cfg = CleaningConfig::defaults());

struct TokenizedInput {
  std::vector<int> token_ids;       // length == max_len
  std::vector<int> attention_mask;  // 1 on non-padding positions
};

// [CLS] tokens... [SEP] then padding to max_len. Throws PreprocessError when
// the text does not fit in max_len - 2 tokens; never truncates.
TokenizedInput tokenize(const std::string& text, const Vocabulary& vocab, int max_len);

// Inverse of tokenize for the desk-scale vocabulary: the cleaned token
// sequence with unknowns rendered as "[UNK]".
std::vector<std::string> decode(const TokenizedInput& input, const Vocabulary& vocab);

}  // namespace drought
