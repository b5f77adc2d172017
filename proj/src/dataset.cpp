#include "vihsd/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <system_error>

#include "vihsd/error.hpp"

namespace vihsd {

namespace {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

std::vector<Record> parse_csv(std::string_view s, std::string_view source) {
  std::vector<Record> out;
  std::size_t i = 0, line = 1;
  if (s.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  while (i < s.size()) {
    Record rec;
    rec.line = line;
    std::string field;
    bool done = false;
    while (!done) {
      field.clear();
      if (i < s.size() && s[i] == '"') {
        ++i;
        for (;;) {
          if (i >= s.size()) {
            fail(ErrorKind::Data, std::string(source) + ": unterminated quoted field starting on line " +
                                      std::to_string(rec.line));
          }
          char c = s[i++];
          if (c == '"') {
            if (i < s.size() && s[i] == '"') {
              field.push_back('"');
              ++i;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line;
            field.push_back(c);
          }
        }
        if (i < s.size() && s[i] != ',' && s[i] != '\n' && s[i] != '\r') {
          fail(ErrorKind::Data, std::string(source) + ": unexpected character after closing quote on line " +
                                    std::to_string(line));
        }
      } else {
        while (i < s.size() && s[i] != ',' && s[i] != '\n' && s[i] != '\r') {
          if (s[i] == '"') {
            fail(ErrorKind::Data, std::string(source) + ": stray quote in unquoted field on line " +
                                      std::to_string(line));
          }
          field.push_back(s[i++]);
        }
      }
      rec.fields.push_back(field);
      if (i >= s.size()) {
        done = true;
      } else if (s[i] == ',') {
        ++i;
      } else {
        if (s[i] == '\r') ++i;
        if (i < s.size() && s[i] == '\n') ++i;
        ++line;
        done = true;
      }
    }
    // Skip blank lines.
    if (!(rec.fields.size() == 1 && rec.fields[0].empty())) out.push_back(std::move(rec));
  }
  return out;
}

bool needs_quotes(std::string_view f) {
  return f.find_first_of(",\"\r\n") != std::string_view::npos || (!f.empty() && (f.front() == ' ' || f.back() == ' '));
}

}  // namespace

std::string csv_field(std::string_view f) {
  if (!needs_quotes(f)) return std::string(f);
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Dataset parse_dataset(std::string_view csv, std::string_view source) {
  auto records = parse_csv(csv, source);
  if (records.empty()) fail(ErrorKind::Data, std::string(source) + ": missing header line");
  const auto& header = records.front().fields;
  auto col = [&](std::string_view name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const auto text_col = col("text");
  const auto label_col = col("label");
  if (text_col < 0) {
    fail(ErrorKind::Data, std::string(source) + ": header must contain a `text` column (and optionally `label`)");
  }
  Dataset data;
  if (label_col >= 0) data.labels.emplace();
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      fail(ErrorKind::Data, std::string(source) + ": line " + std::to_string(rec.line) + " has " +
                                std::to_string(rec.fields.size()) + " fields, header has " +
                                std::to_string(header.size()));
    }
    data.texts.push_back(rec.fields[text_col]);
    if (label_col >= 0) {
      const auto& raw = rec.fields[label_col];
      if (raw != "0" && raw != "1" && raw != "2") {
        fail(ErrorKind::Data, std::string(source) + ": line " + std::to_string(rec.line) +
                                  ": label '" + raw + "' is not one of 0, 1, 2");
      }
      data.labels->push_back(raw[0] - '0');
    }
  }
  return data;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::Io, "error while reading " + path.string());
  return ss.str();
}

Dataset read_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path), path.string());
}

std::string format_dataset(const Dataset& data) {
  std::string out = data.labels ? "text,label\n" : "text\n";
  for (std::size_t i = 0; i < data.texts.size(); ++i) {
    out += csv_field(data.texts[i]);
    if (data.labels) out += "," + std::to_string((*data.labels)[i]);
    out.push_back('\n');
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  write_file_atomic(path, format_dataset(data));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) fail(ErrorKind::Io, "error while writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorKind::Io, "cannot move " + tmp.string() + " into place at " + path.string());
  }
}

}  // namespace vihsd
