#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vihsd/layers.hpp"
#include "vihsd/rng.hpp"
#include "vihsd/text.hpp"

namespace vihsd {

/// Word vectors in the fastText `.vec` text format.
struct VecFile {
  std::size_t declared_count = 0;
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<float>> entries;
  std::vector<std::string> order;     // first-seen order of distinct tokens
  std::vector<std::string> warnings;  // duplicates, count mismatch

  std::size_t size() const { return entries.size(); }
  const std::vector<float>* find(std::string_view token) const;
};

/// Line 1 is `count dim`; every other non-blank line is a token followed by
/// `dim` floats, separated by ASCII spaces. Tokens may hold any non-space
/// bytes. Throws `ErrorKind::Format` naming the line for a bad header, a
/// wrong component count or an unparsable number; `ErrorKind::Io` if the
/// file cannot be read. A repeated token keeps its last vector and adds a
/// warning; so does a row count different from the header.
VecFile parse_vec_file(const std::filesystem::path& path);
VecFile parse_vec(std::string_view text);

/// Shortest round-trip decimal form of every value.
std::string format_vec(const VecFile& vec);
void write_vec_file(const std::filesystem::path& path, const VecFile& vec);

inline constexpr float kOovInitRange = 0.05f;

struct EmbeddingBuild {
  EmbeddingTable<float> table;
  std::size_t found = 0;
  double coverage = 0.0;  // found / (vocab_size - 2); 0 when nothing but reserved rows
};

/// PAD row zeros, tokens present in `vec` copy their vector, every other row
/// (UNK included) is uniform in [-0.05, 0.05]. Throws `ErrorKind::Config`
/// when vec.dim != embed_dim (an empty file with dim 0 is accepted).
EmbeddingBuild build_embedding_matrix(const VecFile& vec, const Vocabulary& vocab,
                                      std::size_t embed_dim, Rng& rng);

}  // namespace vihsd
