#pragma once

#include <random>
#include <vector>

#include "echotensor/tensor.hpp"

namespace echotensor::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  }
  return m;
}

// Dense random tensor with every entry nonzero.
inline SparseTensor3 random_tensor(Dims3 d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Entry> e;
  for (std::size_t k = 0; k < d.k; ++k) {
    for (std::size_t j = 0; j < d.j; ++j) {
      for (std::size_t i = 0; i < d.i; ++i) e.push_back({i, j, k, normal(rng)});
    }
  }
  return SparseTensor3(d, std::move(e));
}

// Tensor with roughly `density` of its entries set to random integers 1..5.
inline SparseTensor3 random_sparse_tensor(Dims3 d, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Entry> e;
  for (std::size_t i = 0; i < d.i; ++i) {
    for (std::size_t j = 0; j < d.j; ++j) {
      for (std::size_t k = 0; k < d.k; ++k) {
        if (u(rng) < density) e.push_back({i, j, k, static_cast<double>(1 + rng() % 5)});
      }
    }
  }
  return SparseTensor3(d, std::move(e));
}

// Orthonormal columns via QR of a Gaussian matrix.
inline Matrix random_orthonormal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rows, cols, rng));
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

}  // namespace echotensor::testing
