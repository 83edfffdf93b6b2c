#include "drought/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

namespace drought {

namespace {

// ---- step i helpers -------------------------------------------------------

std::string strip_html_tags(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_tag = false;
  for (char c : s) {
    if (c == '<') {
      in_tag = true;
      out.push_back(' ');
    } else if (c == '>') {
      in_tag = false;
    } else if (!in_tag) {
      out.push_back(c);
    }
  }
  return out;
}

std::string strip_urls(const std::string& s) {
  std::string out;
  std::size_t i = 0;
  const std::size_t n = s.size();
  auto starts_with = [&](std::size_t pos, const char* prefix) {
    for (std::size_t k = 0; prefix[k]; ++k) {
      if (pos + k >= n || std::tolower(static_cast<unsigned char>(s[pos + k])) != prefix[k])
        return false;
    }
    return true;
  };
  while (i < n) {
    if (starts_with(i, "http://") || starts_with(i, "https://") || starts_with(i, "www.")) {
      while (i < n && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back(' ');
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

// Named entities plus numeric &#NN; / &#xNN; forms. Unknown entities are
// replaced by a space. &nbsp; decodes to a plain space.
std::string decode_entities(const std::string& s) {
  static const std::map<std::string, std::string> named = {
      {"nbsp", " "}, {"amp", "&"}, {"lt", "<"},   {"gt", ">"},
      {"quot", "\""}, {"apos", "'"}, {"rsquo", "'"}, {"lsquo", "'"},
      {"ndash", "-"}, {"mdash", "-"}, {"hellip", " "},
  };
  std::string out;
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const std::size_t semi = s.find(';', i + 1);
    if (semi == std::string::npos || semi - i > 10) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string body = s.substr(i + 1, semi - i - 1);
    if (!body.empty() && body[0] == '#') {
      long cp = -1;
      try {
        cp = (body.size() > 1 && (body[1] == 'x' || body[1] == 'X'))
                 ? std::stol(body.substr(2), nullptr, 16)
                 : std::stol(body.substr(1));
      } catch (...) {
      }
      if (cp >= 32 && cp < 127) out.push_back(static_cast<char>(cp));
      else out.push_back(' ');
      i = semi + 1;
    } else if (auto it = named.find(body); it != named.end()) {
      out += it->second;
      i = semi + 1;
    } else if (std::all_of(body.begin(), body.end(),
                           [](unsigned char c) { return std::isalpha(c); }) &&
               !body.empty()) {
      out.push_back(' ');
      i = semi + 1;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

// Latin-1 supplement and Latin Extended-A folded to ASCII; returns an empty
// string when the codepoint has no ASCII equivalent.
std::string fold_codepoint(std::uint32_t cp) {
  if (cp == 0x2019 || cp == 0x2018) return "'";  // curly apostrophes
  if (cp == 0x201C || cp == 0x201D) return "\"";
  if (cp >= 0xC0 && cp <= 0xFF) {
    switch (cp) {
      case 0xC6: return "AE";
      case 0xDF: return "ss";
      case 0xE6: return "ae";
      case 0xDE: return "TH";
      case 0xFE: return "th";
      case 0xD7: case 0xF7: return {};
    }
    static const char* latin1 =
        "AAAAAA#CEEEEIIIIDNOOOOO#OUUUUY##aaaaaa#ceeeeiiiidnooooo#ouuuuy#y";
    const char c = latin1[cp - 0xC0];
    return c == '#' ? std::string{} : std::string(1, c);
  }
  if (cp >= 0x100 && cp <= 0x17F) {
    switch (cp) {
      case 0x132: return "IJ";
      case 0x133: return "ij";
      case 0x152: return "OE";
      case 0x153: return "oe";
    }
    static const char* ext_a =
        "AaAaAaCcCcCcCcDdDdEeEeEeEeEeGgGgGgGgHhHhIiIiIiIiIi"
        "JjJjKkkLlLlLlLlLlNnNnNnnNnOoOoOoOoRrRrRrSsSsSsSsTtTtTt"
        "UuUuUuUuUuUuWwYyYZzZzZzs";
    return std::string(1, ext_a[cp - 0x100]);
  }
  return {};
}

std::string fold_accents(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const unsigned char c0 = static_cast<unsigned char>(s[i]);
    if (c0 < 0x80) {
      out.push_back(static_cast<char>(c0));
      ++i;
      continue;
    }
    // Decode one UTF-8 sequence; ill-formed bytes pass through unchanged.
    std::uint32_t cp = 0;
    std::size_t len = 0;
    if ((c0 & 0xE0) == 0xC0) { cp = c0 & 0x1Fu; len = 2; }
    else if ((c0 & 0xF0) == 0xE0) { cp = c0 & 0x0Fu; len = 3; }
    else if ((c0 & 0xF8) == 0xF0) { cp = c0 & 0x07u; len = 4; }
    if (len == 0 || i + len > n) {
      out.push_back(static_cast<char>(c0));
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char ck = static_cast<unsigned char>(s[i + k]);
      if ((ck & 0xC0) != 0x80) { ok = false; break; }
      cp = (cp << 6) | (ck & 0x3Fu);
    }
    if (!ok) {
      out.push_back(static_cast<char>(c0));
      ++i;
      continue;
    }
    const std::string folded = fold_codepoint(cp);
    if (!folded.empty()) out += folded;
    else out.append(s, i, len);
    i += len;
  }
  return out;
}

bool is_word_char(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '\'';
}

}  // namespace

std::string expand_contractions(const std::string& text, const ContractionMap& map) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!is_word_char(text[i])) {
      out.push_back(text[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < n && is_word_char(text[j])) ++j;
    std::string token = text.substr(i, j - i);
    std::string key;
    key.reserve(token.size());
    for (char c : token) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    auto it = map.find(key);
    out += (it != map.end()) ? it->second : token;
    i = j;
  }
  return out;
}

std::string clean_text(const std::string& raw, const CleaningConfig& cfg) {
  // step i
  std::string s = fold_accents(decode_entities(strip_urls(strip_html_tags(raw))));
  // step ii
  s = expand_contractions(s, cfg.contraction_map);
  // step iii: lowercase alphanumerics; apostrophes vanish; everything else
  // becomes whitespace, then runs collapse.
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(u)));
    } else if (c == '\'') {
      continue;
    } else {
      pending_space = true;
    }
  }
  return out;
}

ContractionMap default_contraction_map() {
  static const char* pairs[][2] = {
      {"ain't", "am not"}, {"aren't", "are not"}, {"can't", "cannot"},
      {"can't've", "cannot have"}, {"could've", "could have"}, {"couldn't", "could not"},
      {"couldn't've", "could not have"}, {"didn't", "did not"}, {"doesn't", "does not"},
      {"don't", "do not"}, {"hadn't", "had not"}, {"hadn't've", "had not have"},
      {"hasn't", "has not"}, {"haven't", "have not"}, {"he'd", "he would"},
      {"he'd've", "he would have"}, {"he'll", "he will"}, {"he's", "he is"},
      {"how'd", "how did"}, {"how'll", "how will"}, {"how's", "how is"},
      {"i'd", "i would"}, {"i'd've", "i would have"}, {"i'll", "i will"},
      {"i'm", "i am"}, {"i've", "i have"}, {"isn't", "is not"},
      {"it'd", "it would"}, {"it'd've", "it would have"}, {"it'll", "it will"},
      {"it's", "it is"}, {"let's", "let us"}, {"ma'am", "madam"},
      {"mayn't", "may not"}, {"might've", "might have"}, {"mightn't", "might not"},
      {"must've", "must have"}, {"mustn't", "must not"}, {"needn't", "need not"},
      {"o'clock", "of the clock"}, {"oughtn't", "ought not"}, {"shan't", "shall not"},
      {"she'd", "she would"}, {"she'd've", "she would have"}, {"she'll", "she will"},
      {"she's", "she is"}, {"should've", "should have"}, {"shouldn't", "should not"},
      {"shouldn't've", "should not have"}, {"that'd", "that would"}, {"that's", "that is"},
      {"there'd", "there would"}, {"there's", "there is"}, {"they'd", "they would"},
      {"they'll", "they will"}, {"they're", "they are"}, {"they've", "they have"},
      {"wasn't", "was not"}, {"we'd", "we would"}, {"we'll", "we will"},
      {"we're", "we are"}, {"we've", "we have"}, {"weren't", "were not"},
      {"what'll", "what will"}, {"what're", "what are"}, {"what's", "what is"},
      {"what've", "what have"}, {"when's", "when is"}, {"where'd", "where did"},
      {"where's", "where is"}, {"where've", "where have"}, {"who'll", "who will"},
      {"who's", "who is"}, {"who've", "who have"}, {"why's", "why is"},
      {"will've", "will have"}, {"won't", "will not"}, {"won't've", "will not have"},
      {"would've", "would have"}, {"wouldn't", "would not"},
      {"wouldn't've", "would not have"}, {"y'all", "you all"}, {"you'd", "you would"},
      {"you'd've", "you would have"}, {"you'll", "you will"}, {"you're", "you are"},
      {"you've", "you have"}, {"'cause", "because"}, {"'tis", "it is"},
      {"'twas", "it was"}, {"daren't", "dare not"}, {"everyone's", "everyone is"},
      {"everybody's", "everybody is"}, {"somebody's", "somebody is"},
      {"someone's", "someone is"}, {"something's", "something is"},
      {"here's", "here is"}, {"how've", "how have"}, {"might'ven't", "might not have"},
      {"mustn't've", "must not have"}, {"needn't've", "need not have"},
      {"oughtn't've", "ought not have"}, {"she'll've", "she will have"},
      {"he'll've", "he will have"}, {"they'll've", "they will have"},
      {"we'll've", "we will have"}, {"you'll've", "you will have"},
      {"it'll've", "it will have"}, {"i'll've", "i will have"},
      {"who'll've", "who will have"}, {"what'll've", "what will have"},
      {"this'll", "this will"}, {"that'll", "that will"}, {"there'll", "there will"},
      {"'em", "them"}, {"ne'er", "never"}, {"o'er", "over"}, {"gov't", "government"},
      {"y'know", "you know"}, {"ain't've", "am not have"}, {"who'd", "who would"},
      {"why'd", "why did"},
  };
  ContractionMap m;
  for (const auto& p : pairs) m[p[0]] = p[1];
  return m;
}

CleaningConfig CleaningConfig::defaults() {
  CleaningConfig cfg;
  cfg.contraction_map = default_contraction_map();
  return cfg;
}

ContractionMap load_contraction_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreprocessError("cannot open " + path);
  ContractionMap m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw PreprocessError(path + ": line " + std::to_string(lineno) + ": expected two tab-separated columns");
    std::string key = line.substr(0, tab);
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    m[key] = line.substr(tab + 1);
  }
  return m;
}

// ---- vocabulary / tokenization --------------------------------------------

int Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const int id = size();
  tokens_.push_back(token);
  index_[token] = id;
  return id;
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
  static const std::string reserved[kNumReserved] = {"[PAD]", "[CLS]", "[SEP]", "[UNK]"};
  if (id < kNumReserved) return reserved[id];
  return tokens_.at(static_cast<std::size_t>(id - kNumReserved));
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreprocessError("cannot open " + path + " for writing");
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreprocessError("cannot open " + path);
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) v.add(line);
  }
  return v;
}

Vocabulary build_vocab(const DocumentSet& docs, int min_count, const CleaningConfig& cfg) {
  if (docs.empty()) throw PreprocessError("build_vocab: empty corpus");
  std::map<std::string, long long> counts;
  for (const auto& d : docs) {
    std::istringstream ss(clean_text(d.text, cfg));
    std::string tok;
    while (ss >> tok) ++counts[tok];
  }
  // Frequency-descending, then lexicographic, for a stable id assignment.
  std::vector<std::pair<std::string, long long>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [tok, cnt] : items)
    if (cnt >= min_count) v.add(tok);
  return v;
}

TokenizedInput tokenize(const std::string& text, const Vocabulary& vocab, int max_len) {
  if (max_len < 3) throw PreprocessError("tokenize: max_len must be at least 3");
  std::vector<std::string> words;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) words.push_back(tok);
  if (static_cast<int>(words.size()) > max_len - 2) {
    throw PreprocessError("tokenize: input has " + std::to_string(words.size()) +
                          " tokens but the limit is " + std::to_string(max_len - 2) +
                          " (max_len " + std::to_string(max_len) + ", no truncation)");
  }
  TokenizedInput out;
  out.token_ids.assign(static_cast<std::size_t>(max_len), Vocabulary::kPad);
  out.attention_mask.assign(static_cast<std::size_t>(max_len), 0);
  std::size_t pos = 0;
  out.token_ids[pos] = Vocabulary::kCls;
  out.attention_mask[pos++] = 1;
  for (const auto& w : words) {
    out.token_ids[pos] = vocab.id_of(w);
    out.attention_mask[pos++] = 1;
  }
  out.token_ids[pos] = Vocabulary::kSep;
  out.attention_mask[pos++] = 1;
  return out;
}

std::vector<std::string> decode(const TokenizedInput& input, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < input.token_ids.size(); ++i) {
    if (!input.attention_mask[i]) continue;
    const int id = input.token_ids[i];
    if (id == Vocabulary::kCls || id == Vocabulary::kSep) continue;
    out.push_back(vocab.token_of(id));
  }
  return out;
}

}  // namespace drought
