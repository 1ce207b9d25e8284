#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "echotensor/tensor.hpp"

namespace echotensor {

struct TuckerFactors {
  CoreTensor core;
  Matrix u;  // I x r1, orthonormal columns
  Matrix v;  // J x r2
  Matrix w;  // K x r3
};

struct CpFactors {
  Matrix u;  // I x R
  Matrix v;  // J x R
  Matrix w;  // K x R
};

/// CP factors of the tensor plus the content-side factor B; U is shared by
/// the tensor and matrix terms.
struct CmtfFactors {
  Matrix u;  // I x R
  Matrix v;  // J x R
  Matrix w;  // K x R
  Matrix b;  // |V| x R

  Eigen::Index rank() const { return u.cols(); }
  double dot(const CmtfFactors& o) const;
  double squared_norm() const { return dot(*this); }
  double max_abs() const;
  // this += alpha * o
  void axpy(double alpha, const CmtfFactors& o);
  CmtfFactors scaled(double alpha) const;
  static CmtfFactors zeros_like(const CmtfFactors& shape);
};

enum class Optimizer { kNonlinearCg, kGradientDescent };

struct OptimOptions {
  int max_iters = 200;
  double tol_rel_change = 1e-6;
  double tol_grad_norm = 1e-8;
  std::uint64_t seed = 0;
  // Armijo backtracking: accept step a when f(x + a d) <= f(x) + c1 a g.d.
  double armijo_c1 = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 60;
  Optimizer optimizer = Optimizer::kNonlinearCg;
};

inline constexpr int kDefaultAlsSweeps = 200;
inline constexpr int kDefaultCmtfIters = 500;

enum class StopReason { kMaxIters, kRelativeChange, kGradientNorm, kExactFit, kStalled };
std::string to_string(StopReason r);

/// Objective trace of an iterative fit. `objective[0]` is the value at
/// initialization, then one value per sweep/iteration.
struct FitReport {
  std::vector<double> objective;
  std::vector<double> orthogonality_error;  // Tucker only, per sweep
  int iterations = 0;
  StopReason stop = StopReason::kMaxIters;
  double final_gradient_norm = 0.0;  // CMTF only
};

template <typename Factors>
struct FitResult {
  Factors factors;
  FitReport report;
};

using Ranks3 = std::array<std::size_t, 3>;

/// Leading `rank` left singular vectors of `a`, sign-normalized so the
/// largest-magnitude entry of each column is positive. If `a` has fewer
/// than `rank` nonzero singular values the basis is completed with
/// orthonormal vectors.
Matrix leading_left_singular_vectors(const Matrix& a, std::size_t rank);

/// Truncated higher-order SVD; core = T x1 U^T x2 V^T x3 W^T.
TuckerFactors hosvd(const SparseTensor3& t, Ranks3 ranks);

/// ||T - [[G; U, V, W]]||_F.
double tucker_residual_norm(const SparseTensor3& t, const TuckerFactors& f);

/// max over factors of ||X^T X - I||_max.
double orthogonality_error(const TuckerFactors& f);

/// Higher-order orthogonal iteration (TUCKALS3) started from the HOSVD.
FitResult<TuckerFactors> tucker_als(const SparseTensor3& t, Ranks3 ranks, const OptimOptions& opts);

/// CP-ALS with seeded Gaussian initialization. The objective is the
/// residual norm ||T - [[U, V, W]]||_F.
FitResult<CpFactors> cp_als(const SparseTensor3& t, std::size_t rank, const OptimOptions& opts);
FitResult<CpFactors> cp_als(const SparseTensor3& t, CpFactors init, const OptimOptions& opts);

/// 1 - ||T - T_hat|| / ||T||; defined as 1 for the zero tensor.
double cp_fit(const SparseTensor3& t, const CpFactors& f);

/// f = 1/2 ||T - [[U, V, W]]||^2 + 1/2 ||M - U B^T||^2.
double cmtf_objective(const SparseTensor3& t, const Matrix& m, const CmtfFactors& f);

/// Gradient of cmtf_objective with respect to (U, V, W, B).
CmtfFactors cmtf_gradient(const SparseTensor3& t, const Matrix& m, const CmtfFactors& f);

/// Seeded standard-normal factors scaled by 1/sqrt(R).
CmtfFactors cmtf_random_init(const SparseTensor3& t, const Matrix& m, std::size_t rank,
                             std::uint64_t seed);

/// First-order minimization of cmtf_objective (Polak-Ribiere nonlinear CG
/// with restarts and Armijo backtracking, or plain gradient descent).
FitResult<CmtfFactors> cmtf_fit(const SparseTensor3& t, const Matrix& m, std::size_t rank,
                                const OptimOptions& opts);
FitResult<CmtfFactors> cmtf_fit(const SparseTensor3& t, const Matrix& m, CmtfFactors init,
                                const OptimOptions& opts);

/// Worst entrywise discrepancy between an analytic gradient and central
/// differences of cmtf_objective, |a - n| / max(1, |a|, |n|).
double grad_check(const SparseTensor3& t, const Matrix& m, const CmtfFactors& f,
                  const CmtfFactors& analytic, double eps);
double grad_check(const SparseTensor3& t, const Matrix& m, const CmtfFactors& f, double eps);

enum class Entity { kNews, kUser, kCommunity };

Matrix extract_embeddings(const TuckerFactors& f, Entity e);
Matrix extract_embeddings(const CpFactors& f, Entity e);
Matrix extract_embeddings(const CmtfFactors& f, Entity e);

/// Plain NMF, M ~ W H with W (rows x rank), H (rank x cols), Lee-Seung
/// multiplicative updates on the squared loss.
struct NmfFactors {
  Matrix w;
  Matrix h;
};
FitResult<NmfFactors> nmf(const Matrix& m, std::size_t rank, const OptimOptions& opts);

}  // namespace echotensor
