#include "vihsd/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "vihsd/dataset.hpp"
#include "vihsd/error.hpp"

namespace vihsd {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormatLine = "vihsd-checkpoint 1";

[[noreturn]] void corrupt(const fs::path& dir, const std::string& what) {
  fail(ErrorKind::Corruption, "checkpoint " + dir.string() + ": " + what);
}

std::string encode_weights(const Model<float>& model) {
  std::string out;
  for (const auto& np : model.named_parameters()) {
    for (float v : np.tensor.data()) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
    }
  }
  return out;
}

std::size_t to_size(const std::string& s, const fs::path& dir, const std::string& key) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty() || s[0] == '-') corrupt(dir, "manifest field '" + key + "' is not a count: " + s);
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string format_manifest(const Model<float>& model) {
  const auto& s = model.spec();
  std::ostringstream out;
  out.precision(17);
  out << kFormatLine << "\n";
  out << "kind " << model_name(s.kind) << "\n";
  out << "max_len " << s.max_len << "\n";
  out << "embed_dim " << s.embed_dim << "\n";
  out << "dropout_rate " << s.dropout_rate << "\n";
  out << "gru_units " << s.gru_units << "\n";
  out << "lstm_units " << s.lstm_units << "\n";
  out << "lstm_blocks " << s.lstm_blocks << "\n";
  out << "conv_filters " << s.conv_filters << "\n";
  out << "kernel_widths";
  for (auto w : s.kernel_widths) out << " " << w;
  out << "\n";
  out << "num_classes " << s.num_classes << "\n";
  out << "embeddings_trainable " << (s.embeddings_trainable ? 1 : 0) << "\n";
  out << "vocab_size " << model.vocab_size() << "\n";
  for (const auto& np : model.named_parameters()) {
    out << "param " << np.name;
    for (auto d : np.tensor.shape()) out << " " << d;
    out << "\n";
  }
  return out.str();
}

void save_checkpoint(const fs::path& dir, const Model<float>& model, const Vocabulary& vocab,
                     const Lexicon& lexicon) {
  if (vocab.size() != model.vocab_size()) {
    fail(ErrorKind::Contract, "vocabulary has " + std::to_string(vocab.size()) +
                                  " entries but the model embeds " + std::to_string(model.vocab_size()));
  }
  fs::path target = dir;
  if (!target.has_filename()) target = target.parent_path();
  const fs::path staging = target.string() + ".partial";
  const fs::path old = target.string() + ".old";
  std::error_code ec;
  fs::remove_all(staging, ec);
  fs::create_directories(staging, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + staging.string() + ": " + ec.message());

  write_file_atomic(staging / "manifest", format_manifest(model));
  write_file_atomic(staging / "weights", encode_weights(model));
  write_file_atomic(staging / "vocab", vocab.serialize());
  write_file_atomic(staging / "lexicon", lexicon.serialize());

  fs::remove_all(old, ec);
  if (fs::exists(target)) {
    fs::rename(target, old, ec);
    if (ec) fail(ErrorKind::Io, "cannot move old checkpoint aside: " + ec.message());
  }
  fs::rename(staging, target, ec);
  if (ec) fail(ErrorKind::Io, "cannot move checkpoint into place at " + target.string() + ": " + ec.message());
  fs::remove_all(old, ec);
}

LoadedModel load_checkpoint(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::Io, "checkpoint directory " + dir.string() + " does not exist");
  const std::string manifest = read_file(dir / "manifest");

  std::istringstream in(manifest);
  std::string line;
  if (!std::getline(in, line) || line != kFormatLine) corrupt(dir, "manifest does not start with '" + std::string(kFormatLine) + "'");

  std::map<std::string, std::vector<std::string>> fields;
  std::vector<std::pair<std::string, Shape>> params;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    std::vector<std::string> values;
    for (std::string v; ls >> v;) values.push_back(v);
    if (key == "param") {
      if (values.empty()) corrupt(dir, "manifest has a param line without a name");
      Shape shape;
      for (std::size_t i = 1; i < values.size(); ++i) shape.push_back(to_size(values[i], dir, values[0]));
      params.emplace_back(values[0], std::move(shape));
    } else {
      fields[key] = std::move(values);
    }
  }
  auto one = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end() || it->second.size() != 1) corrupt(dir, "manifest field '" + key + "' missing or malformed");
    return it->second[0];
  };

  ModelSpec spec;
  try {
    spec.kind = parse_model_kind(one("kind"));
  } catch (const Error&) {
    corrupt(dir, "manifest names unknown model kind '" + one("kind") + "'");
  }
  spec.max_len = to_size(one("max_len"), dir, "max_len");
  spec.embed_dim = to_size(one("embed_dim"), dir, "embed_dim");
  try {
    spec.dropout_rate = std::stod(one("dropout_rate"));
  } catch (const std::exception&) {
    corrupt(dir, "manifest field 'dropout_rate' is not a number");
  }
  spec.gru_units = to_size(one("gru_units"), dir, "gru_units");
  spec.lstm_units = to_size(one("lstm_units"), dir, "lstm_units");
  spec.lstm_blocks = to_size(one("lstm_blocks"), dir, "lstm_blocks");
  spec.conv_filters = to_size(one("conv_filters"), dir, "conv_filters");
  spec.kernel_widths.clear();
  if (!fields.count("kernel_widths")) corrupt(dir, "manifest field 'kernel_widths' missing");
  for (const auto& w : fields["kernel_widths"]) spec.kernel_widths.push_back(to_size(w, dir, "kernel_widths"));
  spec.num_classes = to_size(one("num_classes"), dir, "num_classes");
  spec.embeddings_trainable = one("embeddings_trainable") == "1";
  const std::size_t vocab_size = to_size(one("vocab_size"), dir, "vocab_size");
  if (vocab_size < 2) corrupt(dir, "vocab_size must be at least 2");

  Rng rng(0);
  EmbeddingTable<float> table{Tensor::zeros({vocab_size, spec.embed_dim}, true), true};
  std::optional<Model<float>> model;
  try {
    model.emplace(spec, std::move(table), rng);
  } catch (const Error& e) {
    corrupt(dir, std::string("manifest describes an invalid model: ") + e.what());
  }

  const auto expected = model->named_parameters();
  if (params.size() != expected.size()) {
    corrupt(dir, "manifest lists " + std::to_string(params.size()) + " parameters, the " +
                     std::string(model_name(spec.kind)) + " model has " + std::to_string(expected.size()));
  }
  std::size_t total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].first != expected[i].name) {
      corrupt(dir, "parameter " + std::to_string(i) + " is '" + params[i].first + "', expected '" +
                       expected[i].name + "'");
    }
    if (params[i].second != expected[i].tensor.shape()) {
      corrupt(dir, "parameter '" + params[i].first + "' has shape " + shape_str(params[i].second) +
                       " but the model expects " + shape_str(expected[i].tensor.shape()));
    }
    total += expected[i].tensor.numel();
  }

  const std::string weights = read_file(dir / "weights");
  if (weights.size() != total * 4) {
    corrupt(dir, "weights file has " + std::to_string(weights.size()) + " bytes, manifest requires " +
                     std::to_string(total * 4));
  }
  std::size_t offset = 0;
  for (const auto& np : expected) {
    auto dst = np.tensor.node()->value.data();
    for (std::size_t i = 0; i < np.tensor.numel(); ++i, offset += 4) {
      std::uint32_t bits = 0;
      for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(weights[offset + k])) << (8 * k);
      dst[i] = std::bit_cast<float>(bits);
    }
  }

  Vocabulary vocab;
  try {
    vocab = Vocabulary::deserialize(read_file(dir / "vocab"));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    corrupt(dir, std::string("vocab file: ") + e.what());
  }
  if (vocab.size() != vocab_size) {
    corrupt(dir, "vocab file has " + std::to_string(vocab.size()) + " entries, manifest says " +
                     std::to_string(vocab_size));
  }
  Lexicon lexicon;
  if (fs::exists(dir / "lexicon")) {
    std::vector<std::string> lines;
    std::istringstream ls(read_file(dir / "lexicon"));
    for (std::string l; std::getline(ls, l);) lines.push_back(l);
    lexicon = Lexicon::from_entries(lines);
  }
  return LoadedModel{std::move(*model), std::move(vocab), std::move(lexicon)};
}

std::vector<std::vector<float>> snapshot_parameters(const Model<float>& model) {
  std::vector<std::vector<float>> out;
  for (const auto& np : model.named_parameters()) out.push_back(np.tensor.to_vector());
  return out;
}

void restore_parameters(const Model<float>& model, const std::vector<std::vector<float>>& snapshot) {
  const auto params = model.named_parameters();
  if (params.size() != snapshot.size()) fail(ErrorKind::Contract, "snapshot does not match the model");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& dst = params[i].tensor.node()->value;
    if (dst.size() != snapshot[i].size()) fail(ErrorKind::Contract, "snapshot does not match " + params[i].name);
    dst = snapshot[i];
  }
}

}  // namespace vihsd
