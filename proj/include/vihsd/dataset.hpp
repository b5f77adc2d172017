#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vihsd {

inline constexpr int kNumClasses = 3;

/// Rows of a `text,label` CSV. `labels` is empty when the file has no label
/// column.
struct Dataset {
  std::vector<std::string> texts;
  std::optional<std::vector<int>> labels;

  std::size_t size() const { return texts.size(); }
};

/// RFC 4180 parser. The header must be `text,label` or `text` (column order
/// free, extra columns ignored). Throws `ErrorKind::Io` if unreadable and
/// `ErrorKind::Data` naming the line for a bad label or quoting error.
Dataset read_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::string_view csv, std::string_view source = "<memory>");

std::string format_dataset(const Dataset& data);
/// Quotes a field when it holds a comma, quote, line break or edge space.
std::string csv_field(std::string_view field);
void write_dataset(const std::filesystem::path& path, const Dataset& data);

/// Atomic text write: data goes to a sibling temp file that is then renamed.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace vihsd
