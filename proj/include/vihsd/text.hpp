#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vihsd/layers.hpp"

namespace vihsd {

/// Fixed comment length fed to the embedding layer.
inline constexpr std::size_t kDefaultMaxLen = 220;

/// Lowercases, replaces every punctuation mark (Unicode P*) with a space,
/// replaces each maximal run of decimal digits (Unicode Nd) with the token
/// `number`, then collapses whitespace runs to single spaces and trims.
/// Idempotent.
std::string normalize_text(std::string_view raw);

/// Multi-syllable words used to join syllables during tokenization.
class Lexicon {
 public:
  Lexicon() = default;

  /// One word per line, syllables separated by spaces or underscores. Lines
  /// are normalized; single-syllable lines are ignored. Throws
  /// `ErrorKind::Io` if the file cannot be read.
  static Lexicon load(const std::filesystem::path& path);
  static Lexicon from_entries(std::span<const std::string> entries);

  bool empty() const { return words_.empty(); }
  std::size_t size() const { return words_.size(); }
  std::size_t max_syllables() const { return max_syllables_; }
  /// `key` is space-joined syllables.
  bool contains(const std::string& key) const { return words_.count(key) != 0; }
  /// One entry per line, space-joined, sorted.
  std::string serialize() const;

 private:
  std::unordered_set<std::string> words_;
  std::size_t max_syllables_ = 0;
};

/// Splits normalized text on spaces; with a lexicon, greedily joins the
/// longest run of syllables forming a lexicon word with '_'.
std::vector<std::string> tokenize(std::string_view normalized, const Lexicon* lexicon = nullptr);

/// Token <-> index map with reserved PAD (0) and UNK (1).
class Vocabulary {
 public:
  // Brackets are punctuation, so no normalized token can collide with these.
  static constexpr std::string_view kPadToken = "[PAD]";
  static constexpr std::string_view kUnkToken = "[UNK]";

  Vocabulary();

  /// Tokens with frequency >= min_frequency, ordered by (frequency desc,
  /// token asc), numbered from 2.
  static Vocabulary build(std::span<const std::vector<std::string>> corpus,
                          std::size_t min_frequency = 1);

  std::size_t size() const { return tokens_.size(); }
  std::int32_t id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::int32_t id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// One token per line in index order.
  std::string serialize() const;
  static Vocabulary deserialize(std::string_view text);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

/// Maps tokens to ids (unknown -> UNK), keeps the first max_len, post-pads
/// with PAD to exactly max_len.
std::vector<std::int32_t> encode_pad(std::span<const std::string> tokens, const Vocabulary& vocab,
                                     std::size_t max_len = kDefaultMaxLen);

/// Inverse of encode_pad for the non-PAD prefix.
std::vector<std::string> decode(std::span<const std::int32_t> ids, const Vocabulary& vocab);

struct EncodedBatch {
  IdMatrix ids;                             // [batch, max_len]
  std::optional<std::vector<int>> labels;   // values in {0, 1, 2}
  std::vector<std::size_t> lengths;         // token counts before padding/truncation

  std::size_t size() const { return ids.rows; }
  EncodedBatch select(std::span<const std::size_t> rows) const;
};

EncodedBatch encode_batch(std::span<const std::vector<std::string>> token_lists,
                          const std::optional<std::vector<int>>& labels, const Vocabulary& vocab,
                          std::size_t max_len = kDefaultMaxLen);

}  // namespace vihsd
