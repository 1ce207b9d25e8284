#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SparseCore>

#include "echotensor/error.hpp"
#include "echotensor/factorization.hpp"

namespace echotensor {

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::kMaxIters:
      return "max_iters";
    case StopReason::kRelativeChange:
      return "relative_change";
    case StopReason::kGradientNorm:
      return "gradient_norm";
    case StopReason::kExactFit:
      return "exact_fit";
    case StopReason::kStalled:
      return "stalled";
  }
  return "unknown";
}

namespace {

// Gram-Schmidt (two passes) over `candidates`, skipping near-dependent
// columns, then completing with standard basis vectors up to `rank`.
Matrix orthonormalize_and_complete(const Matrix& candidates, std::size_t rank, Eigen::Index rows) {
  Matrix q(rows, static_cast<Eigen::Index>(rank));
  Eigen::Index filled = 0;
  auto try_add = [&](Vector x) {
    const double scale = x.norm();
    if (scale == 0.0) return;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index c = 0; c < filled; ++c) x -= q.col(c).dot(x) * q.col(c);
    }
    const double n = x.norm();
    if (n <= 1e-10 * scale) return;
    q.col(filled++) = x / n;
  };
  for (Eigen::Index c = 0; c < candidates.cols() && filled < q.cols(); ++c) try_add(candidates.col(c));
  for (Eigen::Index e = 0; e < rows && filled < q.cols(); ++e) try_add(Vector::Unit(rows, e));
  if (filled < q.cols()) throw NumericalError("could not complete an orthonormal basis");
  return q;
}

void normalize_signs(Matrix& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      if (std::abs(u(r, c)) > best + 1e-12) {
        best = std::abs(u(r, c));
        arg = r;
      }
    }
    if (u(arg, c) < 0) u.col(c) = -u.col(c);
  }
}

// Eigenvectors of a symmetric PSD matrix in decreasing eigenvalue order.
std::pair<Vector, Matrix> sorted_eigen(const Matrix& gram) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return {es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
}

// Leading left singular vectors of a sparse matrix via the smaller Gram.
Matrix leading_left_singular_vectors_sparse(const Eigen::SparseMatrix<double>& a, std::size_t rank) {
  const Eigen::Index rows = a.rows();
  Matrix basis;
  if (rows <= a.cols()) {
    const Matrix gram = Matrix(a * a.transpose());
    auto [vals, vecs] = sorted_eigen(gram);
    const double tol = std::max(vals.size() ? vals(0) : 0.0, 0.0) * 1e-24;
    Eigen::Index keep = 0;
    while (keep < vals.size() && keep < static_cast<Eigen::Index>(rank) && vals(keep) > tol) ++keep;
    basis = vecs.leftCols(keep);
  } else {
    const Matrix gram = Matrix(a.transpose() * a);
    auto [vals, vecs] = sorted_eigen(gram);
    const double tol = std::max(vals.size() ? vals(0) : 0.0, 0.0) * 1e-24;
    Eigen::Index keep = 0;
    while (keep < vals.size() && keep < static_cast<Eigen::Index>(rank) && vals(keep) > tol) ++keep;
    basis = Matrix(a * vecs.leftCols(keep));
    for (Eigen::Index c = 0; c < keep; ++c) basis.col(c) /= std::sqrt(vals(c));
  }
  Matrix q = orthonormalize_and_complete(basis, rank, rows);
  normalize_signs(q);
  return q;
}

Eigen::SparseMatrix<double> sparse_unfolding(const SparseTensor3& t, int mode) {
  const Dims3& d = t.dims();
  const auto rows = static_cast<Eigen::Index>(d[mode]);
  const auto cols = static_cast<Eigen::Index>(d.product() / std::max<std::size_t>(d[mode], 1));
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(t.nnz());
  for (const auto& e : t.entries()) {
    const std::size_t r = mode == 1 ? e.i : (mode == 2 ? e.j : e.k);
    trips.emplace_back(static_cast<Eigen::Index>(r),
                       static_cast<Eigen::Index>(unfolding_column(d, mode, e.i, e.j, e.k)), e.value);
  }
  Eigen::SparseMatrix<double> a(rows, cols);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

void check_ranks(const Dims3& d, const Ranks3& ranks) {
  for (int m = 1; m <= 3; ++m) {
    const std::size_t r = ranks[static_cast<std::size_t>(m - 1)];
    if (r < 1 || r > d[m]) {
      throw std::invalid_argument("Tucker rank " + std::to_string(r) + " for mode " +
                                  std::to_string(m) + " must lie in [1, " + std::to_string(d[m]) + "]");
    }
  }
}

CoreTensor project_core(const SparseTensor3& t, const Matrix& u, const Matrix& v, const Matrix& w) {
  const Matrix y3 = project_except(t, u, v, w, 3);
  const Matrix g3 = w.transpose() * y3;
  return refold(g3, 3,
                {static_cast<std::size_t>(u.cols()), static_cast<std::size_t>(v.cols()),
                 static_cast<std::size_t>(w.cols())});
}

}  // namespace

Matrix leading_left_singular_vectors(const Matrix& a, std::size_t rank) {
  if (rank > static_cast<std::size_t>(a.rows())) {
    throw std::invalid_argument("requested more singular vectors than rows");
  }
  Matrix basis;
  if (a.size() > 0) {
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    const double tol = (s.size() ? s(0) : 0.0) * 1e-13;
    Eigen::Index keep = 0;
    while (keep < s.size() && keep < static_cast<Eigen::Index>(rank) && s(keep) > tol) ++keep;
    basis = svd.matrixU().leftCols(keep);
  }
  Matrix q = orthonormalize_and_complete(basis, rank, a.rows());
  normalize_signs(q);
  return q;
}

TuckerFactors hosvd(const SparseTensor3& t, Ranks3 ranks) {
  const Dims3& d = t.dims();
  check_ranks(d, ranks);
  std::array<Matrix, 3> factors;
  for (int m = 1; m <= 3; ++m) {
    const std::size_t r = ranks[static_cast<std::size_t>(m - 1)];
    if (d.product() <= kDenseResidualLimit) {
      factors[static_cast<std::size_t>(m - 1)] = leading_left_singular_vectors(matricize(t, m), r);
    } else {
      factors[static_cast<std::size_t>(m - 1)] =
          leading_left_singular_vectors_sparse(sparse_unfolding(t, m), r);
    }
  }
  TuckerFactors f{CoreTensor{}, std::move(factors[0]), std::move(factors[1]), std::move(factors[2])};
  f.core = project_core(t, f.u, f.v, f.w);
  return f;
}

double tucker_residual_norm(const SparseTensor3& t, const TuckerFactors& f) {
  if (t.dims().product() <= kDenseResidualLimit) {
    DenseTensor3 z = reconstruct_tucker(f.core, f.u, f.v, f.w);
    for (const auto& e : t.entries()) z(e.i, e.j, e.k) -= e.value;
    return frobenius_norm(z);
  }
  // Orthonormal factors: ||Z|| = ||G|| and <T, Z> = <T x U^T x V^T x W^T, G>.
  const CoreTensor proj = project_core(t, f.u, f.v, f.w);
  double inner = 0.0;
  for (std::size_t n = 0; n < proj.data().size(); ++n) inner += proj.data()[n] * f.core.data()[n];
  const double tn = frobenius_norm(t);
  const double gn = frobenius_norm(f.core);
  return std::sqrt(std::max(tn * tn - 2.0 * inner + gn * gn, 0.0));
}

double orthogonality_error(const TuckerFactors& f) {
  double worst = 0.0;
  for (const Matrix* x : {&f.u, &f.v, &f.w}) {
    const Matrix gram = x->transpose() * *x;
    worst = std::max(worst, (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff());
  }
  return worst;
}

FitResult<TuckerFactors> tucker_als(const SparseTensor3& t, Ranks3 ranks, const OptimOptions& opts) {
  check_ranks(t.dims(), ranks);
  FitResult<TuckerFactors> out{hosvd(t, ranks), {}};
  TuckerFactors& f = out.factors;
  FitReport& rep = out.report;
  const double tnorm = frobenius_norm(t);
  rep.objective.push_back(tucker_residual_norm(t, f));
  for (int sweep = 1; sweep <= opts.max_iters; ++sweep) {
    f.u = leading_left_singular_vectors(project_except(t, f.u, f.v, f.w, 1), ranks[0]);
    f.v = leading_left_singular_vectors(project_except(t, f.u, f.v, f.w, 2), ranks[1]);
    const Matrix y3 = project_except(t, f.u, f.v, f.w, 3);
    f.w = leading_left_singular_vectors(y3, ranks[2]);
    f.core = refold(f.w.transpose() * y3, 3, {ranks[0], ranks[1], ranks[2]});

    const double obj = tucker_residual_norm(t, f);
    if (!std::isfinite(obj)) throw NumericalError("Tucker objective became non-finite");
    const double prev = rep.objective.back();
    rep.objective.push_back(obj);
    rep.orthogonality_error.push_back(orthogonality_error(f));
    rep.iterations = sweep;
    if (obj <= 1e-13 * tnorm || tnorm == 0.0) {
      rep.stop = StopReason::kExactFit;
      break;
    }
    if (std::abs(prev - obj) < opts.tol_rel_change * std::max(prev, std::numeric_limits<double>::min())) {
      rep.stop = StopReason::kRelativeChange;
      break;
    }
  }
  return out;
}

Matrix extract_embeddings(const TuckerFactors& f, Entity e) {
  return e == Entity::kNews ? f.u : (e == Entity::kUser ? f.v : f.w);
}

Matrix extract_embeddings(const CpFactors& f, Entity e) {
  return e == Entity::kNews ? f.u : (e == Entity::kUser ? f.v : f.w);
}

Matrix extract_embeddings(const CmtfFactors& f, Entity e) {
  return e == Entity::kNews ? f.u : (e == Entity::kUser ? f.v : f.w);
}

}  // namespace echotensor
