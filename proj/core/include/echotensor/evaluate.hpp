#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "echotensor/tensor.hpp"

namespace echotensor {

// ---- classification -------------------------------------------------------

struct LinearModel {
  Vector weights;
  double bias = 0.0;
};

/// Hinge-loss linear classifier trained by averaged stochastic subgradient
/// descent on lambda/2 ||w||^2 + mean hinge, lambda = 1 / (c * n). The
/// returned model is the averaged iterate with the lowest training
/// objective over all epochs.
struct SvmOptions {
  double c = 1.0;
  int epochs = 100;
  double eta0 = 0.5;  // step size eta0 / sqrt(t)
  std::uint64_t seed = 0;
};

struct SvmTrace {
  std::vector<double> objective;  // best-so-far training objective per epoch
};

LinearModel train_linear(const Matrix& x, std::span<const int> y, const SvmOptions& opts,
                         SvmTrace* trace = nullptr);

/// 1 when w.x + b >= 0, else 0.
std::vector<int> predict(const LinearModel& m, const Matrix& x);

/// Hinge objective of `m` on (x, y) with the given regularization.
double hinge_objective(const LinearModel& m, const Matrix& x, std::span<const int> y, double c);

struct FoldSplit {
  int k = 0;
  std::vector<std::vector<std::size_t>> folds;  // held-out indices per fold

  std::vector<std::size_t> train_indices(int fold) const;
};

/// Seeded k-fold split. With labels, each class is dealt round-robin across
/// folds so class counts per fold differ by at most one.
FoldSplit kfold(std::size_t n, int k, std::uint64_t seed,
                std::optional<std::span<const int>> stratify_labels = std::nullopt);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision, recall and F1 of class 1. Zero denominators give 0.
Prf prf1(std::span<const int> truth, std::span<const int> pred);

/// z-score parameters estimated on training rows; constant columns keep
/// scale 1.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
};

// ---- clustering -----------------------------------------------------------

struct ClusterResult {
  std::vector<int> assignment;
  Matrix centroids;  // k x d
  double sse = 0.0;
  std::vector<double> sse_trace;  // after each Lloyd iteration
  int iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment is
/// a fixpoint or `max_iters` is reached.
ClusterResult kmeans(const Matrix& x, int k, std::uint64_t seed, int max_iters = 300);

/// Mean silhouette with Euclidean distance; members of singleton clusters
/// score 0.
double silhouette(const Matrix& x, std::span<const int> assignment);

/// Calinski-Harabasz index [B/(k-1)] / [W/(n-k)]; +infinity when W = 0.
double calinski_harabasz(const Matrix& x, std::span<const int> assignment);

// ---- recommendation -------------------------------------------------------

/// Neighbors of `target` by cosine similarity (target excluded, ties to the
/// lower user id), then news ranked by total share count among those
/// neighbors (ties to the lower news id). `news_user` is news x users.
std::vector<std::size_t> recommend(const Matrix& user_embeddings, std::size_t target,
                                   const Matrix& news_user, std::size_t num_neighbors,
                                   std::size_t k);

/// |top-k ∩ gold| / k.
double precision_at_k(std::span<const std::size_t> recommended,
                      const std::unordered_set<std::size_t>& gold, std::size_t k);

}  // namespace echotensor
