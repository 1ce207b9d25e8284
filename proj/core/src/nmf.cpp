#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "echotensor/error.hpp"
#include "echotensor/factorization.hpp"

namespace echotensor {

FitResult<NmfFactors> nmf(const Matrix& m, std::size_t rank, const OptimOptions& opts) {
  if (rank < 1) throw std::invalid_argument("NMF rank must be at least 1");
  if ((m.array() < 0.0).any()) throw std::invalid_argument("NMF input must be nonnegative");
  const auto r = static_cast<Eigen::Index>(rank);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double mean = m.size() ? m.mean() : 0.0;
  const double scale = std::sqrt(std::max(mean, 1e-12) / static_cast<double>(rank));
  FitResult<NmfFactors> out;
  NmfFactors& f = out.factors;
  f.w.resize(m.rows(), r);
  f.h.resize(r, m.cols());
  for (Eigen::Index c = 0; c < r; ++c) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) f.w(i, c) = scale * uniform(rng);
  }
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index i = 0; i < r; ++i) f.h(i, c) = scale * uniform(rng);
  }
  constexpr double kFloor = 1e-12;
  FitReport& rep = out.report;
  rep.objective.push_back((m - f.w * f.h).norm());
  for (int it = 1; it <= opts.max_iters; ++it) {
    f.h.array() *= (f.w.transpose() * m).array() / ((f.w.transpose() * f.w) * f.h).array().max(kFloor);
    f.w.array() *= (m * f.h.transpose()).array() / (f.w * (f.h * f.h.transpose())).array().max(kFloor);
    const double obj = (m - f.w * f.h).norm();
    if (!std::isfinite(obj)) throw NumericalError("NMF objective became non-finite");
    const double prev = rep.objective.back();
    rep.objective.push_back(obj);
    rep.iterations = it;
    if (std::abs(prev - obj) < opts.tol_rel_change * std::max(prev, std::numeric_limits<double>::min())) {
      rep.stop = StopReason::kRelativeChange;
      break;
    }
  }
  return out;
}

}  // namespace echotensor
