#pragma once

#include <Eigen/Dense>

#include <string>

#include "aplab/errors.hpp"

namespace aplab {

// Model storage is 32-bit, row-major. Accumulating operations (dot products,
// statistics) run in 64-bit and round back to storage precision.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using ArrayXX = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Mat = MatrixX<float>;
using Matd = MatrixX<double>;
using Vec = Eigen::VectorXf;
using Vecd = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXf;

inline void check_same_shape(const Mat& a, const Mat& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(where) + ": shapes " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

/// Matrix product with 64-bit accumulation, rounded back to 32-bit.
inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions " + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.rows()));
  return (a.cast<double>() * b.cast<double>()).cast<float>();
}

/// Adds a length-cols row vector to every row (the only broadcast we support).
inline void add_row_vector(Mat& m, const RowVec& bias) {
  if (m.cols() != bias.cols())
    throw ShapeError("add_row_vector: " + std::to_string(m.cols()) + " cols vs bias length " +
                     std::to_string(bias.cols()));
  m.rowwise() += bias;
}

}  // namespace aplab
