#include "vihsd/config.hpp"

#include <json.hpp>

#include "vihsd/dataset.hpp"
#include "vihsd/error.hpp"

namespace vihsd {

using nlohmann::json;

ModelSpec RunConfig::spec_for(ModelKind kind) const {
  ModelSpec s = recurrent;
  s.kind = kind;
  if (kind == ModelKind::TextCnn) {
    s.conv_filters = textcnn_filters;
    s.kernel_widths = textcnn_kernel_widths;
  }
  return s;
}

void RunConfig::validate() const {
  if (models.empty()) fail(ErrorKind::Config, "no model selected");
  if (min_frequency == 0) fail(ErrorKind::Config, "min_frequency must be at least 1");
  for (auto k : models) spec_for(k).validate();
  training.validate();
}

std::vector<ModelKind> parse_model_selection(const std::string& name) {
  if (name == "all") return {std::begin(kAllModelKinds), std::end(kAllModelKinds)};
  return {parse_model_kind(name)};
}

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  fail(ErrorKind::Config, "config key '" + key + "': " + why);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) bad_key(where + it.key(), "unknown key");
  }
}

template <typename V>
void read(const json& obj, const std::string& where, const char* key, V& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    if constexpr (std::is_same_v<V, std::size_t> || std::is_same_v<V, std::uint64_t>) {
      if (!it->is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
    } else if constexpr (std::is_same_v<V, double>) {
      if (!it->is_number()) throw std::invalid_argument("expected a number");
    } else if constexpr (std::is_same_v<V, bool>) {
      if (!it->is_boolean()) throw std::invalid_argument("expected true or false");
    } else if constexpr (std::is_same_v<V, std::string>) {
      if (!it->is_string()) throw std::invalid_argument("expected a string");
    }
    out = it->get<V>();
  } catch (const std::exception& e) {
    bad_key(where + key, e.what());
  }
}

void read_widths(const json& obj, const std::string& where, const char* key, std::vector<std::size_t>& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_array()) bad_key(where + key, "expected an array of positive integers");
  out.clear();
  for (const auto& v : *it) {
    if (!v.is_number_unsigned()) bad_key(where + key, "expected an array of positive integers");
    out.push_back(v.get<std::size_t>());
  }
}

void read_path(const json& obj, const char* key, const std::filesystem::path& base, std::filesystem::path& out) {
  std::string s;
  read(obj, "", key, s);
  if (s.empty()) return;
  std::filesystem::path p(s);
  out = p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail(ErrorKind::Config, "config must be a JSON object");
  reject_unknown(root, "", {"train_data", "test_data", "vectors", "lexicon", "out_dir", "model", "seed",
                            "min_frequency", "model_spec", "training"});
  RunConfig cfg;
  read_path(root, "train_data", base_dir, cfg.train_data);
  read_path(root, "test_data", base_dir, cfg.test_data);
  read_path(root, "vectors", base_dir, cfg.vectors);
  read_path(root, "lexicon", base_dir, cfg.lexicon);
  read_path(root, "out_dir", base_dir, cfg.out_dir);
  std::string model;
  read(root, "", "model", model);
  if (!model.empty()) cfg.models = parse_model_selection(model);
  read(root, "", "seed", cfg.training.seed);
  read(root, "", "min_frequency", cfg.min_frequency);

  if (auto it = root.find("model_spec"); it != root.end()) {
    if (!it->is_object()) bad_key("model_spec", "expected an object");
    const json& m = *it;
    const std::string w = "model_spec.";
    reject_unknown(m, w, {"max_len", "embed_dim", "dropout_rate", "gru_units", "lstm_units", "lstm_blocks",
                          "conv_filters", "kernel_widths", "textcnn_filters", "textcnn_kernel_widths",
                          "embeddings_trainable"});
    auto& s = cfg.recurrent;
    read(m, w, "max_len", s.max_len);
    read(m, w, "embed_dim", s.embed_dim);
    read(m, w, "dropout_rate", s.dropout_rate);
    read(m, w, "gru_units", s.gru_units);
    read(m, w, "lstm_units", s.lstm_units);
    read(m, w, "lstm_blocks", s.lstm_blocks);
    read(m, w, "conv_filters", s.conv_filters);
    read_widths(m, w, "kernel_widths", s.kernel_widths);
    read(m, w, "textcnn_filters", cfg.textcnn_filters);
    read_widths(m, w, "textcnn_kernel_widths", cfg.textcnn_kernel_widths);
    read(m, w, "embeddings_trainable", s.embeddings_trainable);
  }
  if (auto it = root.find("training"); it != root.end()) {
    if (!it->is_object()) bad_key("training", "expected an object");
    const json& t = *it;
    const std::string w = "training.";
    reject_unknown(t, w, {"batch_size", "max_epochs", "learning_rate", "beta1", "beta2", "epsilon", "patience",
                          "class_weighting", "val_fraction"});
    auto& tc = cfg.training;
    read(t, w, "batch_size", tc.batch_size);
    read(t, w, "max_epochs", tc.max_epochs);
    read(t, w, "learning_rate", tc.learning_rate);
    read(t, w, "beta1", tc.beta1);
    read(t, w, "beta2", tc.beta2);
    read(t, w, "epsilon", tc.epsilon);
    read(t, w, "patience", tc.patience);
    std::string weighting;
    read(t, w, "class_weighting", weighting);
    if (!weighting.empty()) tc.class_weighting = parse_class_weighting(weighting);
    read(t, w, "val_fraction", tc.val_fraction);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    fail(ErrorKind::Config, std::string("cannot read config: ") + e.what());
  }
  return parse_run_config(text, path.parent_path());
}

}  // namespace vihsd
