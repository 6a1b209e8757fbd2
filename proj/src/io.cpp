#include "semshift/io.hpp"

#include "semshift/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace semshift {

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::vector<std::string> split_fields(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) fields.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

namespace {

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    fn(fields, lineno);
  }
}

int parse_label(const std::string& s, const std::filesystem::path& path, std::size_t lineno) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw DataError(path.string() + ":" + std::to_string(lineno) + ": label must be 0 or 1, got '" +
                  s + "'");
}

}  // namespace

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
  std::vector<std::string> words;
  for_each_line(path, [&](const std::vector<std::string>& f, std::size_t) { words.push_back(f[0]); });
  return words;
}

std::vector<std::pair<std::string, std::string>> read_word_pairs(
    const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for_each_line(path, [&](const std::vector<std::string>& f, std::size_t lineno) {
    if (f.size() < 2)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected two words");
    pairs.emplace_back(f[0], f[1]);
  });
  return pairs;
}

GoldLabels read_gold_labels(const std::filesystem::path& path) {
  GoldLabels gold;
  for_each_line(path, [&](const std::vector<std::string>& f, std::size_t lineno) {
    if (f.size() == 2) {
      gold[f[0]] = parse_label(f[1], path, lineno);
    } else if (f.size() == 3) {
      gold[f[0] + "/" + f[1]] = parse_label(f[2], path, lineno);
    } else {
      throw DataError(path.string() + ":" + std::to_string(lineno) +
                      ": expected 'word label' or 'wordA wordB label'");
    }
  });
  return gold;
}

std::string format_word_list(std::span<const std::string> words) {
  std::string out;
  for (const auto& w : words) {
    out += w;
    out += '\n';
  }
  return out;
}

}  // namespace semshift
