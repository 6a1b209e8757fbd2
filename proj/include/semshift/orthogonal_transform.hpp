#pragma once

#include "semshift/types.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace semshift {

/// Orthogonal map fitted on a landmark subset. Rows of the source space are
/// mapped as `x -> x * q`.
struct OrthogonalTransform {
  Matrix q;
  std::vector<std::string> landmarks;
  /// Frobenius norm of (A_L q - B_L) over the landmark rows.
  double residual = 0.0;

  [[nodiscard]] Eigen::Index dimension() const { return q.rows(); }
};

/// ||q^T q - I||_F.
double orthogonality_error(const Matrix& q);

nlohmann::json to_json(const OrthogonalTransform& transform);
OrthogonalTransform transform_from_json(const nlohmann::json& doc);

}  // namespace semshift
