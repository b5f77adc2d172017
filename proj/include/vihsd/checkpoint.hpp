#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vihsd/model.hpp"
#include "vihsd/text.hpp"

namespace vihsd {

/// A checkpoint is a directory:
///   manifest  text: format line, ModelSpec fields, vocab size, then one
///             `param <name> <dims...>` line per parameter in order
///   weights   every parameter as little-endian float32, manifest order
///   vocab     Vocabulary::serialize()
///   lexicon   Lexicon::serialize()
struct LoadedModel {
  Model<float> model;
  Vocabulary vocab;
  Lexicon lexicon;
};

/// Writes into a sibling staging directory and renames it over `dir`, so a
/// reader never sees a half-written checkpoint.
void save_checkpoint(const std::filesystem::path& dir, const Model<float>& model,
                     const Vocabulary& vocab, const Lexicon& lexicon = {});

/// Validates every name and shape in the manifest against the model the
/// spec describes before reading weights. Throws `ErrorKind::Corruption`
/// (naming the parameter or file) on any inconsistency and `ErrorKind::Io`
/// when a file is missing.
LoadedModel load_checkpoint(const std::filesystem::path& dir);

std::string format_manifest(const Model<float>& model);

/// In-memory parameter snapshot, used to keep the best epoch during training.
std::vector<std::vector<float>> snapshot_parameters(const Model<float>& model);
void restore_parameters(const Model<float>& model, const std::vector<std::vector<float>>& snapshot);

}  // namespace vihsd
