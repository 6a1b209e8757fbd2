#include "semshift/embedding_store.hpp"

#include "semshift/errors.hpp"
#include "semshift/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_set>

namespace semshift {

EmbeddingTable::EmbeddingTable(std::vector<std::string> words, Matrix matrix,
                               std::unordered_map<std::string, std::int64_t> freq_rank)
    : words_(std::move(words)), matrix_(std::move(matrix)), freq_rank_(std::move(freq_rank)) {
  if (static_cast<Eigen::Index>(words_.size()) != matrix_.rows())
    throw DataError("embedding table has " + std::to_string(words_.size()) + " words but " +
                    std::to_string(matrix_.rows()) + " rows");
  if (matrix_.cols() < 1) throw DataError("embedding dimension must be at least 1");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second)
      throw DataError("duplicate word '" + words_[i] + "'");
    if (!matrix_.row(static_cast<Eigen::Index>(i)).allFinite())
      throw DataError("non-finite value in vector of '" + words_[i] + "'");
  }
}

std::optional<std::size_t> EmbeddingTable::index_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::int64_t> EmbeddingTable::rank_of(const std::string& word) const {
  auto it = freq_rank_.find(word);
  if (it == freq_rank_.end()) return std::nullopt;
  return it->second;
}

EmbeddingTable EmbeddingTable::with_matrix(Matrix matrix) const {
  return EmbeddingTable(words_, std::move(matrix), freq_rank_);
}

EmbeddingTable EmbeddingTable::with_frequency_counts(
    const std::unordered_map<std::string, double>& counts) const {
  std::vector<std::pair<std::string, double>> known;
  for (const auto& w : words_) {
    if (auto it = counts.find(w); it != counts.end()) known.emplace_back(w, it->second);
  }
  std::sort(known.begin(), known.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  std::unordered_map<std::string, std::int64_t> ranks;
  for (std::size_t i = 0; i < known.size(); ++i)
    ranks.emplace(known[i].first, static_cast<std::int64_t>(i + 1));
  return EmbeddingTable(words_, matrix_, std::move(ranks));
}

std::optional<std::size_t> AlignedPair::index_of(std::string_view word) const {
  auto it = std::lower_bound(words.begin(), words.end(), word,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == words.end() || *it != word) return std::nullopt;
  return static_cast<std::size_t>(it - words.begin());
}

std::vector<std::size_t> AlignedPair::indices_of(std::span<const std::string> requested) const {
  std::vector<std::size_t> out;
  std::vector<std::string> missing;
  out.reserve(requested.size());
  for (const auto& w : requested) {
    if (auto i = index_of(w)) {
      out.push_back(*i);
    } else {
      missing.push_back(w);
    }
  }
  if (!missing.empty()) {
    std::string msg = "words not in the common vocabulary:";
    for (const auto& w : missing) msg += " " + w;
    throw DataError(msg);
  }
  return out;
}

std::vector<std::string> AlignedPair::words_at(std::span<const std::size_t> indices) const {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(words.at(i));
  return out;
}

Normalization parse_normalization(std::string_view name) {
  if (name == "none") return Normalization::none;
  if (name == "l2") return Normalization::l2;
  if (name == "center_l2") return Normalization::center_l2;
  throw UsageError("unknown normalization '" + std::string(name) +
                   "' (expected none, l2 or center_l2)");
}

std::string_view to_string(Normalization mode) {
  switch (mode) {
    case Normalization::none: return "none";
    case Normalization::l2: return "l2";
    case Normalization::center_l2: return "center_l2";
  }
  return "none";
}

namespace {

double parse_double(std::string_view s, std::size_t lineno) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError("line " + std::to_string(lineno) + ": cannot parse number '" +
                    std::string(s) + "'");
  if (!std::isfinite(v))
    throw DataError("line " + std::to_string(lineno) + ": non-finite value '" + std::string(s) +
                    "'");
  return v;
}

bool is_integer(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

EmbeddingTable parse_word2vec_text(std::string_view text) {
  std::vector<std::string> words;
  std::vector<double> values;
  long dim = -1;
  long declared_rows = -1;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      if (fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) {
        declared_rows = std::stol(fields[0]);
        dim = std::stol(fields[1]);
        if (dim < 1) throw DataError("line 1: dimension must be at least 1");
        continue;
      }
    }
    long row_dim = static_cast<long>(fields.size()) - 1;
    if (row_dim < 1) throw DataError("line " + std::to_string(lineno) + ": no vector values");
    if (dim < 0) dim = row_dim;
    if (row_dim != dim)
      throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                      " values, found " + std::to_string(row_dim));
    words.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) values.push_back(parse_double(fields[j], lineno));
  }
  if (words.empty()) throw DataError("embedding file contains no vectors");
  if (declared_rows >= 0 && declared_rows != static_cast<long>(words.size()))
    throw DataError("header declares " + std::to_string(declared_rows) + " rows, found " +
                    std::to_string(words.size()));
  Matrix m = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(words.size()),
                                      static_cast<Eigen::Index>(dim));
  std::unordered_map<std::string, std::int64_t> ranks;
  ranks.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) ranks.emplace(words[i], static_cast<std::int64_t>(i + 1));
  return EmbeddingTable(std::move(words), std::move(m), std::move(ranks));
}

EmbeddingTable load_word2vec_text(const std::filesystem::path& path) {
  try {
    return parse_word2vec_text(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_word2vec_text(const EmbeddingTable& table) {
  std::string out = std::to_string(table.size()) + " " + std::to_string(table.dimension()) + "\n";
  const auto& m = table.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += table.words()[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out += ' ';
      out += format_real(m(i, j));
    }
    out += '\n';
  }
  return out;
}

void save_word2vec_text(const EmbeddingTable& table, const std::filesystem::path& path) {
  write_file_atomic(path, format_word2vec_text(table));
}

std::unordered_map<std::string, double> load_frequency_file(const std::filesystem::path& path) {
  std::unordered_map<std::string, double> counts;
  auto text = read_text_file(path);
  std::size_t pos = 0;
  std::size_t lineno = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    auto fields = split_fields(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    ++lineno;
    if (fields.empty()) continue;
    if (fields.size() != 2)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 'word<TAB>count'");
    counts[fields[0]] = parse_double(fields[1], lineno);
  }
  return counts;
}

AlignedPair intersect(const EmbeddingTable& ea, const EmbeddingTable& eb) {
  if (ea.dimension() != eb.dimension())
    throw DataError("dimension mismatch: " + std::to_string(ea.dimension()) + " vs " +
                    std::to_string(eb.dimension()));
  AlignedPair pair;
  for (const auto& w : ea.words())
    if (eb.contains(w)) pair.words.push_back(w);
  if (pair.words.empty()) throw DataError("the two vocabularies have no word in common");
  std::sort(pair.words.begin(), pair.words.end());

  const auto n = static_cast<Eigen::Index>(pair.words.size());
  pair.a.resize(n, ea.dimension());
  pair.b.resize(n, eb.dimension());
  bool any_rank = false;
  std::vector<std::int64_t> ranks(pair.words.size(), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& w = pair.words[static_cast<std::size_t>(i)];
    pair.a.row(i) = ea.matrix().row(static_cast<Eigen::Index>(*ea.index_of(w)));
    pair.b.row(i) = eb.matrix().row(static_cast<Eigen::Index>(*eb.index_of(w)));
    if (auto r = ea.rank_of(w)) {
      ranks[static_cast<std::size_t>(i)] = *r;
      any_rank = true;
    }
  }
  if (any_rank) pair.freq_rank = std::move(ranks);
  return pair;
}

Matrix normalize_rows(const Matrix& m, Normalization mode, std::span<const std::string> labels) {
  if (mode == Normalization::none) return m;
  Matrix out = m;
  if (mode == Normalization::center_l2) out.rowwise() -= out.colwise().mean();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm == 0.0) {
      std::string who = static_cast<std::size_t>(i) < labels.size()
                            ? "'" + labels[static_cast<std::size_t>(i)] + "'"
                            : "row " + std::to_string(i);
      throw DataError("cannot normalize zero vector of " + who);
    }
    out.row(i) /= norm;
  }
  return out;
}

EmbeddingTable normalize_rows(const EmbeddingTable& table, Normalization mode) {
  if (mode == Normalization::none) return table;
  return table.with_matrix(normalize_rows(table.matrix(), mode, table.words()));
}

AlignedPair normalize_rows(const AlignedPair& pair, Normalization mode) {
  AlignedPair out = pair;
  out.a = normalize_rows(pair.a, mode, pair.words);
  out.b = normalize_rows(pair.b, mode, pair.words);
  return out;
}

double cosine_distance(const Eigen::Ref<const RowVector>& u, const Eigen::Ref<const RowVector>& v) {
  if (u.size() != v.size())
    throw DataError("cosine distance of vectors with different dimensions");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw DataError("cosine distance of a zero vector");
  const double d = 1.0 - u.dot(v) / (nu * nv);
  return std::clamp(d, 0.0, 2.0);
}

}  // namespace semshift
