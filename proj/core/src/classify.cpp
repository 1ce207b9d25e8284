#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "echotensor/evaluate.hpp"

namespace echotensor {

namespace {

// Fisher-Yates with an explicit modulo draw, so permutations depend only on
// the engine output sequence.
void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng() % i]);
  }
}

}  // namespace

double hinge_objective(const LinearModel& m, const Matrix& x, std::span<const int> y, double c) {
  const auto n = static_cast<double>(x.rows());
  const double lambda = 1.0 / (c * n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double s = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
    loss += std::max(0.0, 1.0 - s * (x.row(i).dot(m.weights) + m.bias));
  }
  return 0.5 * lambda * m.weights.squaredNorm() + loss / n;
}

LinearModel train_linear(const Matrix& x, std::span<const int> y, const SvmOptions& opts,
                         SvmTrace* trace) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw std::invalid_argument("feature rows and labels differ in count");
  }
  const auto pos = std::count(y.begin(), y.end(), 1);
  const auto neg = std::count(y.begin(), y.end(), 0);
  if (pos + neg != static_cast<long>(y.size())) throw std::invalid_argument("labels must be 0 or 1");
  if (pos == 0 || neg == 0) throw std::invalid_argument("training data contains a single class");
  if (opts.c <= 0.0 || opts.epochs < 1) throw std::invalid_argument("invalid SVM options");

  const std::size_t n = y.size();
  const double lambda = 1.0 / (opts.c * static_cast<double>(n));
  std::mt19937_64 rng(opts.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  Vector w = Vector::Zero(x.cols());
  double b = 0.0;
  Vector w_avg = w;
  double b_avg = 0.0;
  LinearModel best{w, 0.0};
  double best_obj = hinge_objective(best, x, y, opts.c);
  long t = 0;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t idx : order) {
      ++t;
      const double eta = opts.eta0 / std::sqrt(static_cast<double>(t));
      const auto i = static_cast<Eigen::Index>(idx);
      const double s = y[idx] == 1 ? 1.0 : -1.0;
      const bool violated = s * (x.row(i).dot(w) + b) < 1.0;
      w *= (1.0 - eta * lambda);
      if (violated) {
        w += eta * s * x.row(i).transpose();
        b += eta * s;
      }
      const double mix = 1.0 / static_cast<double>(t);
      w_avg += mix * (w - w_avg);
      b_avg += mix * (b - b_avg);
    }
    const LinearModel candidate{w_avg, b_avg};
    const double obj = hinge_objective(candidate, x, y, opts.c);
    if (obj < best_obj) {
      best_obj = obj;
      best = candidate;
    }
    if (trace) trace->objective.push_back(best_obj);
  }
  return best;
}

std::vector<int> predict(const LinearModel& m, const Matrix& x) {
  if (x.cols() != m.weights.size()) throw std::invalid_argument("feature dimension mismatch");
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = x.row(i).dot(m.weights) + m.bias >= 0.0 ? 1 : 0;
  }
  return out;
}

std::vector<std::size_t> FoldSplit::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (int f = 0; f < k; ++f) {
    if (f == fold) continue;
    const auto& idx = folds[static_cast<std::size_t>(f)];
    out.insert(out.end(), idx.begin(), idx.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FoldSplit kfold(std::size_t n, int k, std::uint64_t seed,
                std::optional<std::span<const int>> stratify_labels) {
  if (k < 1) throw std::invalid_argument("fold count must be positive");
  if (static_cast<std::size_t>(k) > n) {
    throw std::invalid_argument("fold count " + std::to_string(k) + " exceeds sample count " +
                                std::to_string(n));
  }
  std::mt19937_64 rng(seed);
  FoldSplit split;
  split.k = k;
  split.folds.resize(static_cast<std::size_t>(k));
  if (stratify_labels) {
    const auto labels = *stratify_labels;
    if (labels.size() != n) throw std::invalid_argument("label count differs from n");
    std::vector<int> classes(labels.begin(), labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    std::size_t next = 0;
    for (int cls : classes) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == cls) members.push_back(i);
      }
      shuffle(members, rng);
      for (std::size_t idx : members) {
        split.folds[next].push_back(idx);
        next = (next + 1) % static_cast<std::size_t>(k);
      }
    }
  } else {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    shuffle(perm, rng);
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < static_cast<std::size_t>(k); ++f) {
      const std::size_t len = base + (f < extra ? 1 : 0);
      split.folds[f].assign(perm.begin() + static_cast<long>(pos), perm.begin() + static_cast<long>(pos + len));
      pos += len;
    }
  }
  for (auto& f : split.folds) std::sort(f.begin(), f.end());
  return split;
}

Prf prf1(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) throw std::invalid_argument("label vectors differ in length");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (pred[i] == 1 && truth[i] == 1) ++tp;
    if (pred[i] == 1 && truth[i] != 1) ++fp;
    if (pred[i] != 1 && truth[i] == 1) ++fn;
  }
  Prf out;
  if (tp + fp > 0) out.precision = tp / (tp + fp);
  if (tp + fn > 0) out.recall = tp / (tp + fn);
  if (out.precision > 0 && out.recall > 0) {
    out.f1 = 2 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const auto n = static_cast<double>(std::max<Eigen::Index>(x.rows(), 1));
  s.mean = x.colwise().sum().transpose() / n;
  s.scale = Vector::Ones(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double var = (x.col(c).array() - s.mean(c)).square().sum() / n;
    if (var > 1e-24) s.scale(c) = std::sqrt(var);
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c) out.col(c) = (x.col(c).array() - mean(c)) / scale(c);
  return out;
}

}  // namespace echotensor
