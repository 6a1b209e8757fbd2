#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace semshift {

/// Row-major so that one row is one word vector.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// All randomness in the library flows through explicitly seeded engines.
using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 42;

}  // namespace semshift
