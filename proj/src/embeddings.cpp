#include "vihsd/embeddings.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "vihsd/dataset.hpp"
#include "vihsd/error.hpp"

namespace vihsd {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void format_error(std::size_t line, const std::string& what) {
  fail(ErrorKind::Format, "vec line " + std::to_string(line) + ": " + what);
}

std::size_t parse_count(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    format_error(line, "expected header `count dim`, got '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

const std::vector<float>* VecFile::find(std::string_view token) const {
  auto it = entries.find(std::string(token));
  return it == entries.end() ? nullptr : &it->second;
}

VecFile parse_vec(std::string_view text) {
  VecFile vec;
  std::size_t pos = 0, line_no = 0;
  bool header_seen = false;
  std::size_t rows = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() != 2) format_error(1, "expected header `count dim`");
      vec.declared_count = parse_count(fields[0], 1);
      vec.dim = parse_count(fields[1], 1);
      if (vec.dim == 0) format_error(1, "dimension must be positive");
      header_seen = true;
      continue;
    }
    if (fields.empty()) continue;
    if (fields.size() - 1 != vec.dim) {
      format_error(line_no, "expected " + std::to_string(vec.dim) + " components, found " +
                                std::to_string(fields.size() - 1));
    }
    std::vector<float> values(vec.dim);
    for (std::size_t k = 0; k < vec.dim; ++k) {
      auto f = fields[k + 1];
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), values[k]);
      if (ec != std::errc() || p != f.data() + f.size() || !std::isfinite(values[k])) {
        format_error(line_no, "component " + std::to_string(k + 1) + " '" + std::string(f) +
                                  "' is not a finite number");
      }
    }
    std::string token(fields[0]);
    auto [it, inserted] = vec.entries.insert_or_assign(token, std::move(values));
    if (inserted) {
      vec.order.push_back(token);
    } else {
      vec.warnings.push_back("line " + std::to_string(line_no) + ": duplicate token '" + token +
                             "', keeping the last vector");
    }
    ++rows;
  }
  if (!header_seen) format_error(1, "empty file, expected header `count dim`");
  if (rows != vec.declared_count) {
    vec.warnings.push_back("header declares " + std::to_string(vec.declared_count) +
                           " vectors, file has " + std::to_string(rows));
  }
  return vec;
}

VecFile parse_vec_file(const std::filesystem::path& path) {
  return parse_vec(read_file(path));
}

std::string format_vec(const VecFile& vec) {
  std::string out = std::to_string(vec.order.size()) + " " + std::to_string(vec.dim) + "\n";
  char buf[64];
  for (const auto& tok : vec.order) {
    out += tok;
    for (float v : vec.entries.at(tok)) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out.push_back(' ');
      out.append(buf, p);
    }
    out.push_back('\n');
  }
  return out;
}

void write_vec_file(const std::filesystem::path& path, const VecFile& vec) {
  write_file_atomic(path, format_vec(vec));
}

EmbeddingBuild build_embedding_matrix(const VecFile& vec, const Vocabulary& vocab,
                                      std::size_t embed_dim, Rng& rng) {
  if (embed_dim == 0) fail(ErrorKind::Config, "embed_dim must be positive");
  if (!vec.entries.empty() && vec.dim != embed_dim) {
    fail(ErrorKind::Config, "word vectors have dimension " + std::to_string(vec.dim) +
                                " but the model expects embed_dim " + std::to_string(embed_dim));
  }
  const std::size_t V = vocab.size();
  std::vector<float> w(V * embed_dim, 0.0f);
  EmbeddingBuild out;
  for (std::size_t r = 0; r < V; ++r) {
    if (static_cast<std::int32_t>(r) == kPadId) continue;
    float* row = w.data() + r * embed_dim;
    const auto* found = static_cast<std::int32_t>(r) == kUnkId ? nullptr
                                                               : vec.find(vocab.token(static_cast<std::int32_t>(r)));
    if (found) {
      std::copy(found->begin(), found->end(), row);
      ++out.found;
    } else {
      for (std::size_t k = 0; k < embed_dim; ++k)
        row[k] = static_cast<float>(rng.uniform(-kOovInitRange, kOovInitRange));
    }
  }
  out.coverage = V > 2 ? static_cast<double>(out.found) / static_cast<double>(V - 2) : 0.0;
  out.table.weights = Tensor({V, embed_dim}, std::move(w), true);
  return out;
}

}  // namespace vihsd
