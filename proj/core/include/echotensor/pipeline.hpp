#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "echotensor/assembly.hpp"
#include "echotensor/evaluate.hpp"
#include "echotensor/factorization.hpp"
#include "echotensor/graph.hpp"
#include "echotensor/text.hpp"

namespace echotensor {

enum class Method { kCitDetect, kCimtDetect, kContentNmf, kContentNgram };

std::string to_string(Method m);
/// Throws std::invalid_argument on unknown names.
Method parse_method(const std::string& name);

struct RunConfig {
  std::filesystem::path news_path;
  std::filesystem::path shares_path;
  std::filesystem::path edges_path;
  Method method = Method::kCimtDetect;
  Ranks3 tucker_ranks = {45, 100, 5};
  std::size_t cmtf_rank = 45;
  std::size_t nmf_rank = 45;
  std::optional<int> communities;  // nullopt: modularity-maximizing level
  std::size_t min_community_size = 1;
  VocabOptions vocab;
  int folds = 5;
  bool stratify = true;
  double svm_c = 1.0;
  int svm_epochs = 100;
  int als_sweeps = kDefaultAlsSweeps;
  int cmtf_iters = kDefaultCmtfIters;
  std::size_t neighbors = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Dataset plus every derived matrix the methods consume.
struct Prepared {
  Dataset dataset;
  FilterResult communities;
  double modularity = 0.0;  // of the unfiltered partition
  Matrix news_user;
  Matrix user_community;
  SparseTensor3 tensor;
  Vocabulary vocab;
  Matrix content;
};

Prepared prepare(const RunConfig& cfg);
Prepared prepare(Dataset dataset, const RunConfig& cfg);

/// Tucker ranks clamped to the tensor dimensions.
Ranks3 effective_tucker_ranks(const RunConfig& cfg, const Dims3& dims);

struct Embedding {
  Matrix news;
  std::optional<Matrix> users;  // methods without a user mode leave this empty
  FitReport report;
  std::string stop;
};

Embedding embed(const Prepared& p, const RunConfig& cfg);

struct FoldMetrics {
  Prf prf;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

struct DetectSummary {
  std::vector<FoldMetrics> folds;
  MeanStd precision;
  MeanStd recall;
  MeanStd f1;
};

MeanStd mean_std(std::span<const double> xs);

/// Derives an independent stream seed from a master seed and an index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Stratified k-fold linear classification on `features`, standardized
/// with training-fold statistics. Requires k >= 2 and both classes in
/// every training fold.
DetectSummary cross_validate(const Matrix& features, std::span<const int> labels,
                             const RunConfig& cfg);

struct ClusterRun {
  std::uint64_t seed = 0;
  double silhouette = 0.0;
  double calinski_harabasz = 0.0;
};

struct ClusterSweepRow {
  int k = 0;
  std::vector<ClusterRun> runs;
  double mean_silhouette = 0.0;
  double mean_calinski_harabasz = 0.0;
};

/// k-means over k in [k_min, k_max] (capped at rows - 1), `runs` seeded runs
/// each.
std::vector<ClusterSweepRow> cluster_sweep(const Matrix& x, int k_min, int k_max, int runs,
                                           std::uint64_t seed);

struct UserRecommendation {
  std::size_t user = 0;
  std::vector<std::size_t> recommended;
  double p_at_1 = 0.0;
  double p_at_5 = 0.0;
};

struct RecommendationReport {
  std::vector<UserRecommendation> users;
  double mean_p_at_1 = 0.0;
  double mean_p_at_5 = 0.0;
};

/// For every user with at least one share: recommend from the
/// `num_neighbors` most similar users and score against the news that user
/// shared.
RecommendationReport evaluate_recommendations(const Matrix& user_embeddings,
                                              const Matrix& news_user,
                                              std::size_t num_neighbors);

}  // namespace echotensor
