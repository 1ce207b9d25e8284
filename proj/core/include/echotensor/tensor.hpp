#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace echotensor {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Extents of a 3-mode tensor. Modes are numbered 1, 2, 3 in the public API.
struct Dims3 {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;

  std::size_t operator[](int mode) const;
  std::size_t product() const { return i * j * k; }
  friend bool operator==(const Dims3&, const Dims3&) = default;
};

struct Entry {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;
  double value = 0.0;
};

class DenseTensor3;

/// Coordinate-list 3-mode tensor, sorted lexicographically by (i, j, k).
///
/// Construction validates indices, rejects duplicate coordinates and
/// non-finite values, and drops explicit zeros.
class SparseTensor3 {
 public:
  SparseTensor3() = default;
  SparseTensor3(Dims3 dims, std::vector<Entry> entries);

  static SparseTensor3 from_dense(const DenseTensor3& dense);

  const Dims3& dims() const { return dims_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const Entry> entries() const { return entries_; }

  DenseTensor3 to_dense() const;

 private:
  Dims3 dims_{};
  std::vector<Entry> entries_;
};

/// Dense 3-mode tensor stored with i fastest, then j, then k. This is the
/// same element order as the mode-1 unfolding read column by column.
class DenseTensor3 {
 public:
  DenseTensor3() = default;
  explicit DenseTensor3(Dims3 dims);
  DenseTensor3(Dims3 dims, std::vector<double> data);

  const Dims3& dims() const { return dims_; }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[i + dims_.i * (j + dims_.j * k)];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[i + dims_.i * (j + dims_.j * k)];
  }

 private:
  Dims3 dims_{};
  std::vector<double> data_;
};

using CoreTensor = DenseTensor3;

// Result of a mode product on sparse input: dense when the predicted fill
// exceeds kDenseFillThreshold of the output size, sparse otherwise.
using Tensor3 = std::variant<SparseTensor3, DenseTensor3>;
inline constexpr double kDenseFillThreshold = 0.25;

DenseTensor3 to_dense(const Tensor3& t);

double frobenius_norm(const SparseTensor3& t);
double frobenius_norm(const DenseTensor3& t);
double frobenius_norm(const Matrix& m);

/// Mode-n unfolding. Output is dims[mode] x (product of the other two dims);
/// among the two remaining modes the lower-numbered index varies fastest
/// along the columns.
Matrix matricize(const SparseTensor3& t, int mode);
Matrix matricize(const DenseTensor3& t, int mode);

/// Inverse of matricize for the same mode and ordering.
DenseTensor3 refold(const Matrix& unfolded, int mode, Dims3 dims);

/// Column index of (i, j, k) inside the mode-n unfolding.
std::size_t unfolding_column(const Dims3& dims, int mode, std::size_t i, std::size_t j,
                             std::size_t k);

Tensor3 mode_n_product(const SparseTensor3& t, const Matrix& u, int mode);
DenseTensor3 mode_n_product(const DenseTensor3& t, const Matrix& u, int mode);

Matrix khatri_rao(const Matrix& x, const Matrix& y);
Matrix kronecker(const Matrix& x, const Matrix& y);

DenseTensor3 reconstruct_tucker(const CoreTensor& g, const Matrix& u, const Matrix& v,
                                const Matrix& w);
DenseTensor3 reconstruct_cp(const Matrix& u, const Matrix& v, const Matrix& w);

/// Matricized tensor times Khatri-Rao product, T_(mode) (C ⊙ B), where B and
/// C are the factors of the two other modes in increasing mode order. Runs
/// over the nonzeros only.
Matrix mttkrp(const SparseTensor3& t, const Matrix& u, const Matrix& v, const Matrix& w,
              int mode);

/// <T, [[U, V, W]]> evaluated over the nonzeros of T.
double cp_inner_product(const SparseTensor3& t, const Matrix& u, const Matrix& v,
                        const Matrix& w);

/// ||[[U, V, W]]||_F^2 via the Hadamard product of the factor Gram matrices.
double cp_norm_squared(const Matrix& u, const Matrix& v, const Matrix& w);

/// ||T - [[U, V, W]]||_F. Exact dense evaluation for small tensors, Gram
/// expansion otherwise.
double cp_residual_norm(const SparseTensor3& t, const Matrix& u, const Matrix& v,
                        const Matrix& w);

/// T_(mode) times the Kronecker product of the other two factors, i.e. the
/// mode-n unfolding of T multiplied by every factor except the one at
/// `mode` (transposed). Returns dims[mode] x (r_a * r_b).
Matrix project_except(const SparseTensor3& t, const Matrix& u, const Matrix& v,
                      const Matrix& w, int mode);

// Dense evaluation of residual norms is used below this many elements.
inline constexpr std::size_t kDenseResidualLimit = std::size_t{1} << 22;

}  // namespace echotensor
