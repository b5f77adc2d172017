#include "vihsd/text.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "vihsd/error.hpp"
#include "vihsd/unicode.hpp"

namespace vihsd {

std::string normalize_text(std::string_view raw) {
  const std::u32string cps = unicode::decode_utf8(raw);
  std::string staged;
  staged.reserve(raw.size() + 8);
  bool in_digits = false;
  for (char32_t cp : cps) {
    cp = unicode::to_lower(cp);
    if (unicode::is_decimal_digit(cp)) {
      if (!in_digits) staged += " number ";
      in_digits = true;
      continue;
    }
    in_digits = false;
    if (unicode::is_punctuation(cp) || unicode::is_whitespace(cp)) {
      staged.push_back(' ');
    } else {
      unicode::append_utf8(staged, cp);
    }
  }
  std::string out;
  out.reserve(staged.size());
  for (char c : staged) {
    if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
    out.push_back(c);
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

namespace {

std::vector<std::string> split_spaces(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(std::span<const std::string> parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

}  // namespace

Lexicon Lexicon::from_entries(std::span<const std::string> entries) {
  Lexicon lex;
  for (const auto& line : entries) {
    // '_' is punctuation, so underscore-joined entries split here too.
    auto syllables = split_spaces(normalize_text(line));
    if (syllables.size() < 2) continue;
    lex.max_syllables_ = std::max(lex.max_syllables_, syllables.size());
    lex.words_.insert(join(syllables, ' '));
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read lexicon file " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  if (in.bad()) fail(ErrorKind::Io, "error while reading lexicon file " + path.string());
  return from_entries(lines);
}

std::string Lexicon::serialize() const {
  std::vector<std::string> sorted(words_.begin(), words_.end());
  std::sort(sorted.begin(), sorted.end());
  std::string out;
  for (const auto& w : sorted) out += w + "\n";
  return out;
}

std::vector<std::string> tokenize(std::string_view normalized, const Lexicon* lexicon) {
  auto syllables = split_spaces(normalized);
  if (!lexicon || lexicon->empty()) return syllables;
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < syllables.size()) {
    std::size_t matched = 1;
    const std::size_t longest = std::min(lexicon->max_syllables(), syllables.size() - i);
    for (std::size_t n = longest; n >= 2; --n) {
      std::span<const std::string> window(syllables.data() + i, n);
      if (lexicon->contains(join(window, ' '))) {
        matched = n;
        break;
      }
    }
    out.push_back(join(std::span<const std::string>(syllables.data() + i, matched), '_'));
    i += matched;
  }
  return out;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary() {
  tokens_ = {std::string(kPadToken), std::string(kUnkToken)};
  index_ = {{tokens_[0], kPadId}, {tokens_[1], kUnkId}};
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> corpus,
                             std::size_t min_frequency) {
  if (min_frequency < 1) fail(ErrorKind::Config, "min_frequency must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus)
    for (const auto& tok : doc) ++counts[tok];
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= min_frequency && tok != kPadToken && tok != kUnkToken) kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (auto& [tok, n] : kept) {
    v.index_.emplace(tok, static_cast<std::int32_t>(v.tokens_.size()));
    v.tokens_.push_back(tok);
  }
  return v;
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) != 0;
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    fail(ErrorKind::Data, "token id " + std::to_string(id) + " outside vocabulary of size " +
                              std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (const auto& t : tokens_) out += t + "\n";
  return out;
}

Vocabulary Vocabulary::deserialize(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  if (lines.size() < 2 || lines[0] != kPadToken || lines[1] != kUnkToken) {
    fail(ErrorKind::Format, "vocabulary must start with " + std::string(kPadToken) + " and " +
                                std::string(kUnkToken));
  }
  Vocabulary v;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty() || !v.index_.emplace(lines[i], static_cast<std::int32_t>(i)).second) {
      fail(ErrorKind::Format, "vocabulary line " + std::to_string(i + 1) +
                                  " is empty or duplicated");
    }
    v.tokens_.push_back(lines[i]);
  }
  return v;
}

std::vector<std::int32_t> encode_pad(std::span<const std::string> tokens, const Vocabulary& vocab,
                                     std::size_t max_len) {
  if (max_len < 1) fail(ErrorKind::Config, "max_len must be at least 1");
  std::vector<std::int32_t> row(max_len, kPadId);
  const std::size_t n = std::min(tokens.size(), max_len);
  for (std::size_t i = 0; i < n; ++i) row[i] = vocab.id(tokens[i]);
  return row;
}

std::vector<std::string> decode(std::span<const std::int32_t> ids, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (auto id : ids) {
    if (id == kPadId) break;
    out.push_back(vocab.token(id));
  }
  return out;
}

EncodedBatch EncodedBatch::select(std::span<const std::size_t> rows) const {
  EncodedBatch out;
  out.ids.rows = rows.size();
  out.ids.cols = ids.cols;
  out.ids.ids.reserve(rows.size() * ids.cols);
  if (labels) out.labels.emplace();
  for (auto r : rows) {
    if (r >= ids.rows) fail(ErrorKind::Contract, "EncodedBatch::select row out of range");
    out.ids.ids.insert(out.ids.ids.end(), ids.ids.begin() + r * ids.cols,
                       ids.ids.begin() + (r + 1) * ids.cols);
    if (labels) out.labels->push_back((*labels)[r]);
    out.lengths.push_back(lengths[r]);
  }
  return out;
}

EncodedBatch encode_batch(std::span<const std::vector<std::string>> token_lists,
                          const std::optional<std::vector<int>>& labels, const Vocabulary& vocab,
                          std::size_t max_len) {
  if (labels && labels->size() != token_lists.size()) {
    fail(ErrorKind::Data, "encode_batch: " + std::to_string(token_lists.size()) + " rows but " +
                              std::to_string(labels->size()) + " labels");
  }
  EncodedBatch batch;
  batch.ids.rows = token_lists.size();
  batch.ids.cols = max_len;
  batch.ids.ids.reserve(token_lists.size() * max_len);
  for (const auto& toks : token_lists) {
    auto row = encode_pad(toks, vocab, max_len);
    batch.ids.ids.insert(batch.ids.ids.end(), row.begin(), row.end());
    batch.lengths.push_back(toks.size());
  }
  if (labels) {
    for (std::size_t i = 0; i < labels->size(); ++i) {
      const int y = (*labels)[i];
      if (y < 0 || y > 2) {
        fail(ErrorKind::Data, "label " + std::to_string(y) + " at row " + std::to_string(i) +
                                  " is not in {0,1,2}");
      }
    }
    batch.labels = labels;
  }
  return batch;
}

}  // namespace vihsd
