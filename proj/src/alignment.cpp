#include "semshift/alignment.hpp"

#include "semshift/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace semshift {

double orthogonality_error(const Matrix& q) {
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

nlohmann::json to_json(const OrthogonalTransform& transform) {
  const auto& q = transform.q;
  std::vector<double> flat(q.data(), q.data() + q.size());  // row-major storage
  return {{"dimension", q.rows()},
          {"landmarks", transform.landmarks},
          {"residual", transform.residual},
          {"Q", flat}};
}

OrthogonalTransform transform_from_json(const nlohmann::json& doc) {
  try {
    OrthogonalTransform t;
    const auto d = doc.at("dimension").get<Eigen::Index>();
    const auto flat = doc.at("Q").get<std::vector<double>>();
    if (d < 1 || static_cast<Eigen::Index>(flat.size()) != d * d)
      throw DataError("transform Q must hold dimension^2 values");
    t.q = Eigen::Map<const Matrix>(flat.data(), d, d);
    t.landmarks = doc.at("landmarks").get<std::vector<std::string>>();
    t.residual = doc.at("residual").get<double>();
    if (!t.q.allFinite()) throw DataError("transform Q has non-finite entries");
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed transform document: ") + e.what());
  }
}

Matrix orthogonal_procrustes(const Matrix& a_sub, const Matrix& b_sub) {
  if (a_sub.rows() != b_sub.rows() || a_sub.cols() != b_sub.cols())
    throw DataError("Procrustes inputs must have the same shape");
  if (a_sub.rows() < 1 || a_sub.cols() < 1) throw DataError("Procrustes needs at least one row");
  if (!a_sub.allFinite() || !b_sub.allFinite())
    throw NumericalError("Procrustes input contains non-finite values");

  const Eigen::MatrixXd cross = a_sub.transpose() * b_sub;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD did not converge");
  Matrix q = svd.matrixU() * svd.matrixV().transpose();
  if (!q.allFinite()) throw NumericalError("SVD produced non-finite factors");
  return q;
}

std::vector<std::string> select_landmarks_frequency(const AlignedPair& pair, double fraction,
                                                    FrequencyEnd end) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw UsageError("landmark fraction must lie in (0, 1]");
  if (pair.freq_rank.size() != pair.size())
    throw DataError("no frequency information for the common vocabulary");
  const auto missing = std::count(pair.freq_rank.begin(), pair.freq_rank.end(), 0);
  if (missing > 0)
    throw DataError("missing frequency rank for " + std::to_string(missing) + " common words");

  std::vector<std::size_t> order(pair.size());
  std::iota(order.begin(), order.end(), 0);
  const auto& rank = pair.freq_rank;
  const auto& words = pair.words;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (rank[x] != rank[y])
      return end == FrequencyEnd::top ? rank[x] < rank[y] : rank[x] > rank[y];
    return words[x] < words[y];
  });
  auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(pair.size()) - 1e-9));
  count = std::clamp<std::size_t>(count, 1, pair.size());
  order.resize(count);
  return pair.words_at(order);
}

AlignedPair align(const AlignedPair& pair, std::span<const std::size_t> landmark_rows) {
  if (landmark_rows.empty()) throw DataError("alignment needs at least one landmark");
  const auto d = pair.dimension();
  const auto k = static_cast<Eigen::Index>(landmark_rows.size());
  Matrix a_sub(k, d);
  Matrix b_sub(k, d);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto row = static_cast<Eigen::Index>(landmark_rows[static_cast<std::size_t>(i)]);
    a_sub.row(i) = pair.a.row(row);
    b_sub.row(i) = pair.b.row(row);
  }
  Matrix q = orthogonal_procrustes(a_sub, b_sub);

  AlignedPair out;
  out.words = pair.words;
  out.b = pair.b;
  out.freq_rank = pair.freq_rank;
  out.a = pair.a * q;

  OrthogonalTransform t;
  t.q = pair.transform ? Matrix(pair.transform->q * q) : q;
  t.landmarks = pair.words_at(landmark_rows);
  std::sort(t.landmarks.begin(), t.landmarks.end());
  t.landmarks.erase(std::unique(t.landmarks.begin(), t.landmarks.end()), t.landmarks.end());
  t.residual = (a_sub * q - b_sub).norm();
  out.transform = std::move(t);
  return out;
}

AlignedPair align(const AlignedPair& pair, std::span<const std::string> landmarks) {
  if (landmarks.empty()) throw DataError("alignment needs at least one landmark");
  std::vector<std::size_t> rows;
  try {
    rows = pair.indices_of(landmarks);
  } catch (const DataError& e) {
    throw DataError(std::string("unknown landmark: ") + e.what());
  }
  return align(pair, std::span<const std::size_t>(rows));
}

AlignedPair align_global(const AlignedPair& pair) {
  std::vector<std::size_t> rows(pair.size());
  std::iota(rows.begin(), rows.end(), 0);
  return align(pair, std::span<const std::size_t>(rows));
}

ShiftMagnitude shift_magnitude(const AlignedPair& aligned, std::size_t row) {
  if (!aligned.is_aligned()) throw UsageError("shift magnitude requires an aligned pair");
  if (row >= aligned.size()) throw DataError("row index out of range");
  const auto i = static_cast<Eigen::Index>(row);
  ShiftMagnitude s;
  s.euclidean = (aligned.a.row(i) - aligned.b.row(i)).norm();
  s.cosine = cosine_distance(aligned.a.row(i), aligned.b.row(i));
  return s;
}

ShiftMagnitude shift_magnitude(const AlignedPair& aligned, std::string_view word) {
  auto row = aligned.index_of(word);
  if (!row) throw DataError("unknown word '" + std::string(word) + "'");
  return shift_magnitude(aligned, *row);
}

std::vector<double> cosine_distances(const AlignedPair& pair) {
  std::vector<double> out(pair.size());
  for (std::size_t i = 0; i < pair.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out[i] = cosine_distance(pair.a.row(r), pair.b.row(r));
  }
  return out;
}

}  // namespace semshift
