#pragma once

#include "semshift/evaluation.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semshift {

/// 9 significant digits, the precision of every numeric output.
std::string format_real(double value);

std::string read_text_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Splits on runs of spaces/tabs; strips a trailing CR.
std::vector<std::string> split_fields(std::string_view line);

/// One word per line (first field); blank lines ignored.
std::vector<std::string> read_word_list(const std::filesystem::path& path);
/// Two whitespace-separated words per line.
std::vector<std::pair<std::string, std::string>> read_word_pairs(
    const std::filesystem::path& path);
/// "word<TAB>label" or "wordA<TAB>wordB<TAB>label" (keyed as "wordA/wordB").
GoldLabels read_gold_labels(const std::filesystem::path& path);

std::string format_word_list(std::span<const std::string> words);

}  // namespace semshift
