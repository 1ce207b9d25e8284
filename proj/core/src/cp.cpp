#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "echotensor/error.hpp"
#include "echotensor/factorization.hpp"

namespace echotensor {

namespace {

constexpr double kMaxCondition = 1e12;
constexpr double kRidge = 1e-12;

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * normal(rng);
  }
  return m;
}

// Solves X H = rhs for symmetric PSD H, adding a small ridge when H is
// singular or its condition estimate exceeds kMaxCondition.
Matrix solve_normal_equations(Matrix h, const Matrix& rhs) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0 || hi / lo > kMaxCondition) {
    const double scale = std::max(1.0, h.trace() / static_cast<double>(h.rows()));
    h.diagonal().array() += kRidge * scale;
  }
  return h.ldlt().solve(rhs.transpose()).transpose();
}

}  // namespace

FitResult<CpFactors> cp_als(const SparseTensor3& t, std::size_t rank, const OptimOptions& opts) {
  if (rank < 1) throw std::invalid_argument("CP rank must be at least 1");
  std::mt19937_64 rng(opts.seed);
  const auto r = static_cast<Eigen::Index>(rank);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rank));
  const Dims3& d = t.dims();
  CpFactors init;
  init.u = gaussian(static_cast<Eigen::Index>(d.i), r, scale, rng);
  init.v = gaussian(static_cast<Eigen::Index>(d.j), r, scale, rng);
  init.w = gaussian(static_cast<Eigen::Index>(d.k), r, scale, rng);
  return cp_als(t, std::move(init), opts);
}

FitResult<CpFactors> cp_als(const SparseTensor3& t, CpFactors init, const OptimOptions& opts) {
  FitResult<CpFactors> out{std::move(init), {}};
  CpFactors& f = out.factors;
  FitReport& rep = out.report;
  const double tnorm = frobenius_norm(t);
  rep.objective.push_back(cp_residual_norm(t, f.u, f.v, f.w));
  for (int sweep = 1; sweep <= opts.max_iters; ++sweep) {
    Matrix gu = f.u.transpose() * f.u;
    Matrix gv = f.v.transpose() * f.v;
    Matrix gw = f.w.transpose() * f.w;
    f.u = solve_normal_equations(gv.cwiseProduct(gw), mttkrp(t, f.u, f.v, f.w, 1));
    gu = f.u.transpose() * f.u;
    f.v = solve_normal_equations(gu.cwiseProduct(gw), mttkrp(t, f.u, f.v, f.w, 2));
    gv = f.v.transpose() * f.v;
    f.w = solve_normal_equations(gu.cwiseProduct(gv), mttkrp(t, f.u, f.v, f.w, 3));

    const double obj = cp_residual_norm(t, f.u, f.v, f.w);
    if (!std::isfinite(obj)) throw NumericalError("CP-ALS objective became non-finite");
    const double prev = rep.objective.back();
    rep.objective.push_back(obj);
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

double cp_fit(const SparseTensor3& t, const CpFactors& f) {
  const double tnorm = frobenius_norm(t);
  if (tnorm == 0.0) return 1.0;
  return 1.0 - cp_residual_norm(t, f.u, f.v, f.w) / tnorm;
}

}  // namespace echotensor
