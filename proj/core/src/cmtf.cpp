#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "echotensor/error.hpp"
#include "echotensor/factorization.hpp"

namespace echotensor {

double CmtfFactors::dot(const CmtfFactors& o) const {
  return u.cwiseProduct(o.u).sum() + v.cwiseProduct(o.v).sum() + w.cwiseProduct(o.w).sum() +
         b.cwiseProduct(o.b).sum();
}

double CmtfFactors::max_abs() const {
  double m = 0.0;
  for (const Matrix* x : {&u, &v, &w, &b}) {
    if (x->size()) m = std::max(m, x->cwiseAbs().maxCoeff());
  }
  return m;
}

void CmtfFactors::axpy(double alpha, const CmtfFactors& o) {
  u += alpha * o.u;
  v += alpha * o.v;
  w += alpha * o.w;
  b += alpha * o.b;
}

CmtfFactors CmtfFactors::scaled(double alpha) const {
  return {alpha * u, alpha * v, alpha * w, alpha * b};
}

CmtfFactors CmtfFactors::zeros_like(const CmtfFactors& s) {
  return {Matrix::Zero(s.u.rows(), s.u.cols()), Matrix::Zero(s.v.rows(), s.v.cols()),
          Matrix::Zero(s.w.rows(), s.w.cols()), Matrix::Zero(s.b.rows(), s.b.cols())};
}

namespace {

void check_shapes(const SparseTensor3& t, const Matrix& m, const CmtfFactors& f) {
  const Dims3& d = t.dims();
  const Eigen::Index r = f.u.cols();
  if (f.v.cols() != r || f.w.cols() != r || f.b.cols() != r) {
    throw std::invalid_argument("CMTF factors must share one column count");
  }
  if (static_cast<std::size_t>(m.rows()) != d.i) {
    throw std::invalid_argument("content matrix rows must equal the tensor's first dimension");
  }
  if (static_cast<std::size_t>(f.u.rows()) != d.i || static_cast<std::size_t>(f.v.rows()) != d.j ||
      static_cast<std::size_t>(f.w.rows()) != d.k || f.b.rows() != m.cols()) {
    throw std::invalid_argument("CMTF factor rows do not match data shapes");
  }
}

double matrix_residual_squared(const Matrix& m, const Matrix& u, const Matrix& b) {
  if (static_cast<std::size_t>(m.size()) <= kDenseResidualLimit) {
    return (m - u * b.transpose()).squaredNorm();
  }
  const double r2 = m.squaredNorm() - 2.0 * (u.transpose() * m * b).trace() +
                    ((u.transpose() * u).cwiseProduct(b.transpose() * b)).sum();
  return std::max(r2, 0.0);
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * normal(rng);
  }
  return m;
}

}  // namespace

double cmtf_objective(const SparseTensor3& t, const Matrix& m, const CmtfFactors& f) {
  check_shapes(t, m, f);
  const double tensor_res = cp_residual_norm(t, f.u, f.v, f.w);
  return 0.5 * tensor_res * tensor_res + 0.5 * matrix_residual_squared(m, f.u, f.b);
}

CmtfFactors cmtf_gradient(const SparseTensor3& t, const Matrix& m, const CmtfFactors& f) {
  check_shapes(t, m, f);
  const Matrix gu = f.u.transpose() * f.u;
  const Matrix gv = f.v.transpose() * f.v;
  const Matrix gw = f.w.transpose() * f.w;
  const Matrix gb = f.b.transpose() * f.b;
  CmtfFactors g;
  // (Z_(1) - T_(1)) (W ⊙ V) + (U B^T - M) B
  g.u = f.u * gv.cwiseProduct(gw) - mttkrp(t, f.u, f.v, f.w, 1) + f.u * gb - m * f.b;
  g.v = f.v * gu.cwiseProduct(gw) - mttkrp(t, f.u, f.v, f.w, 2);
  g.w = f.w * gu.cwiseProduct(gv) - mttkrp(t, f.u, f.v, f.w, 3);
  // (B U^T - M^T) U
  g.b = f.b * gu - m.transpose() * f.u;
  return g;
}

CmtfFactors cmtf_random_init(const SparseTensor3& t, const Matrix& m, std::size_t rank,
                             std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("CMTF rank must be at least 1");
  std::mt19937_64 rng(seed);
  const auto r = static_cast<Eigen::Index>(rank);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rank));
  const Dims3& d = t.dims();
  CmtfFactors f;
  f.u = gaussian(static_cast<Eigen::Index>(d.i), r, scale, rng);
  f.v = gaussian(static_cast<Eigen::Index>(d.j), r, scale, rng);
  f.w = gaussian(static_cast<Eigen::Index>(d.k), r, scale, rng);
  f.b = gaussian(m.cols(), r, scale, rng);
  return f;
}

FitResult<CmtfFactors> cmtf_fit(const SparseTensor3& t, const Matrix& m, std::size_t rank,
                                const OptimOptions& opts) {
  return cmtf_fit(t, m, cmtf_random_init(t, m, rank, opts.seed), opts);
}

FitResult<CmtfFactors> cmtf_fit(const SparseTensor3& t, const Matrix& m, CmtfFactors init,
                                const OptimOptions& opts) {
  check_shapes(t, m, init);
  FitResult<CmtfFactors> out{std::move(init), {}};
  CmtfFactors& x = out.factors;
  FitReport& rep = out.report;

  auto evaluate = [&](const CmtfFactors& at) {
    const double f = cmtf_objective(t, m, at);
    if (!std::isfinite(f)) {
      throw NumericalError("CMTF objective became non-finite at iteration " +
                           std::to_string(rep.iterations));
    }
    return f;
  };

  double f = evaluate(x);
  rep.objective.push_back(f);
  CmtfFactors g = cmtf_gradient(t, m, x);
  double gnorm = std::sqrt(g.squared_norm());
  rep.final_gradient_norm = gnorm;
  if (opts.max_iters <= 0) return out;

  const bool use_cg = opts.optimizer == Optimizer::kNonlinearCg;
  const Eigen::Index nvars = x.u.size() + x.v.size() + x.w.size() + x.b.size();
  CmtfFactors d = g.scaled(-1.0);
  double slope = -gnorm * gnorm;
  double step = 1.0 / std::max(1.0, gnorm);
  int since_restart = 0;

  if (f == 0.0) {
    rep.stop = StopReason::kExactFit;
    return out;
  }
  if (gnorm < opts.tol_grad_norm) {
    rep.stop = StopReason::kGradientNorm;
    return out;
  }

  for (int it = 1; it <= opts.max_iters; ++it) {
    if (slope >= 0.0) {
      d = g.scaled(-1.0);
      slope = -gnorm * gnorm;
      since_restart = 0;
    }

    // Armijo backtracking from the current trial step.
    auto try_step = [&](double a) {
      CmtfFactors trial = x;
      trial.axpy(a, d);
      return std::pair{evaluate(trial), std::move(trial)};
    };
    double a = step;
    auto [fa, xa] = try_step(a);
    int backtracks = 0;
    while (fa > f + opts.armijo_c1 * a * slope && backtracks < opts.max_backtracks) {
      a *= opts.backtrack_factor;
      std::tie(fa, xa) = try_step(a);
      ++backtracks;
    }
    if (fa > f + opts.armijo_c1 * a * slope) {
      if (since_restart > 0) {
        // Retry this iteration along steepest descent.
        slope = 1.0;
        --it;
        continue;
      }
      rep.stop = StopReason::kStalled;
      break;
    }
    if (backtracks == 0) {
      // First trial accepted: probe longer steps while they keep improving.
      for (int grow = 0; grow < 6; ++grow) {
        auto [fb, xb] = try_step(2.0 * a);
        if (!(fb < fa)) break;
        a *= 2.0;
        fa = fb;
        xa = std::move(xb);
      }
    }

    const double f_prev = f;
    x = std::move(xa);
    f = fa;
    CmtfFactors g_new = cmtf_gradient(t, m, x);
    const double gnorm_new = std::sqrt(g_new.squared_norm());
    rep.objective.push_back(f);
    rep.iterations = it;
    rep.final_gradient_norm = gnorm_new;

    if (f == 0.0) {
      rep.stop = StopReason::kExactFit;
      break;
    }
    if (gnorm_new < opts.tol_grad_norm) {
      rep.stop = StopReason::kGradientNorm;
      break;
    }
    if (f_prev - f < opts.tol_rel_change * std::max(f_prev, std::numeric_limits<double>::min())) {
      rep.stop = StopReason::kRelativeChange;
      break;
    }

    double beta = 0.0;
    ++since_restart;
    if (use_cg && since_restart < nvars) {
      // Polak-Ribiere+, with a Powell restart when successive gradients are
      // far from orthogonal.
      const double gg = gnorm * gnorm;
      const double cross = g_new.dot(g);
      beta = std::max(0.0, (gnorm_new * gnorm_new - cross) / gg);
      if (std::abs(cross) >= 0.2 * gnorm_new * gnorm_new) beta = 0.0;
    }
    if (beta == 0.0) since_restart = 0;
    CmtfFactors d_new = g_new.scaled(-1.0);
    d_new.axpy(beta, d);
    const double slope_new = g_new.dot(d_new);
    // Next trial step from the previous one, scaled by the slope ratio.
    step = slope_new < 0.0 ? std::min(a * slope / slope_new, 1e3 * a) : a;
    d = std::move(d_new);
    slope = slope_new;
    g = std::move(g_new);
    gnorm = gnorm_new;
  }
  return out;
}

double grad_check(const SparseTensor3& t, const Matrix& m, const CmtfFactors& f,
                  const CmtfFactors& analytic, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  CmtfFactors probe = f;
  double worst = 0.0;
  auto sweep = [&](Matrix CmtfFactors::*block) {
    Matrix& x = probe.*block;
    const Matrix& a = analytic.*block;
    if (a.rows() != x.rows() || a.cols() != x.cols()) {
      throw std::invalid_argument("analytic gradient shape mismatch");
    }
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double saved = x(r, c);
        x(r, c) = saved + eps;
        const double fp = cmtf_objective(t, m, probe);
        x(r, c) = saved - eps;
        const double fm = cmtf_objective(t, m, probe);
        x(r, c) = saved;
        const double numeric = (fp - fm) / (2.0 * eps);
        const double denom = std::max({1.0, std::abs(a(r, c)), std::abs(numeric)});
        worst = std::max(worst, std::abs(a(r, c) - numeric) / denom);
      }
    }
  };
  sweep(&CmtfFactors::u);
  sweep(&CmtfFactors::v);
  sweep(&CmtfFactors::w);
  sweep(&CmtfFactors::b);
  return worst;
}

double grad_check(const SparseTensor3& t, const Matrix& m, const CmtfFactors& f, double eps) {
  return grad_check(t, m, f, cmtf_gradient(t, m, f), eps);
}

}  // namespace echotensor
