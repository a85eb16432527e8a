#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>

namespace cohesim {

using Index = std::int64_t;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Subdomain tag. Plus is Omega+ (y > 0 in the rectangle generator).
enum class Side : int { Plus = 0, Minus = 1 };

inline constexpr int side_index(Side s) { return static_cast<int>(s); }

}  // namespace cohesim
