#pragma once

#include <array>
#include <set>
#include <string>

#include "drought/corpus.hpp"
#include "drought/labels.hpp"

namespace drought {

// Category -> set of lowercase unigram keywords. Keywords may appear under
// several categories ("irrigation" is both agriculture and water supply).
class KeywordTable {
 public:
  KeywordTable() = default;

  void add(int category, const std::string& keyword);  // validates unigram
  const std::set<std::string>& keywords(int category) const { return sets_[static_cast<std::size_t>(category)]; }
  bool empty() const;

  // Every category whose set contains `token`, as a label vector.
  LabelVector categories_of(const std::string& token) const;

 private:
  std::array<std::set<std::string>, kNumCategories> sets_;
};

// The shipped default table (the seven-category keyword list).
KeywordTable default_keyword_table();

// JSON file: object mapping canonical category name -> array of strings.
// Throws CorpusError on unknown category names, multi-word keywords, or an
// empty category.
KeywordTable load_keyword_table(const std::string& path);
void save_keyword_table(const KeywordTable& table, const std::string& path);

// Lowercase, strip a leading # or @, strip surrounding punctuation, split on
// whitespace; a category bit is set iff some resulting token is exactly one
// of its keywords.
LabelVector label_document(const std::string& text, const KeywordTable& table);

// label_document over every document, keeping only those with at least one
// positive bit; labels are attached to the returned copies.
DocumentSet label_corpus(const DocumentSet& docs, const KeywordTable& table);

}  // namespace drought
