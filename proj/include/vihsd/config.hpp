#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vihsd/model.hpp"
#include "vihsd/train.hpp"

namespace vihsd {

/// Everything a training run needs. Loaded from JSON; relative paths in the
/// file resolve against the file's directory.
struct RunConfig {
  std::filesystem::path train_data;
  std::filesystem::path test_data;  // optional held-out set scored after training
  std::filesystem::path vectors;    // optional .vec file; random init without it
  std::filesystem::path lexicon;    // optional
  std::filesystem::path out_dir = "runs";
  std::vector<ModelKind> models = {ModelKind::BiGruLstmCnn};
  std::size_t min_frequency = 1;

  ModelSpec recurrent = ModelSpec::defaults(ModelKind::BiGruLstmCnn);
  std::size_t textcnn_filters = 100;
  std::vector<std::size_t> textcnn_kernel_widths = {3, 4, 5};

  TrainConfig training;

  /// Spec for one architecture: shared fields plus the kind's conv layout.
  ModelSpec spec_for(ModelKind kind) const;
  /// Throws `ErrorKind::Config` on invalid values.
  void validate() const;
};

/// Parses JSON text. Unknown keys and wrongly typed values throw
/// `ErrorKind::Config` naming the key.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// "all" or a single model name.
std::vector<ModelKind> parse_model_selection(const std::string& name);

}  // namespace vihsd
