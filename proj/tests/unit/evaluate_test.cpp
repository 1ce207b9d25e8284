#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "echotensor/evaluate.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

namespace echotensor {
namespace {

using testing::ch_oracle;
using testing::random_matrix;
using testing::silhouette_oracle;

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

// ---- classifier ------------------------------------------------------------------

TEST(TrainLinear, SeparableClustersFitPerfectly) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.2);
  Matrix x(40, 2);
  std::vector<int> y(40);
  for (Eigen::Index r = 0; r < 40; ++r) {
    const double c = r % 2 ? 1.0 : -1.0;
    x(r, 0) = c + noise(rng);
    x(r, 1) = c + noise(rng);
    y[r] = r % 2;
  }
  EXPECT_EQ(accuracy(predict(train_linear(x, y, {}), x), y), 1.0);
}

TEST(TrainLinear, ZeroFeaturesPredictMajority) {
  const Matrix x = Matrix::Zero(7, 3);
  const std::vector<int> y = {1, 1, 0, 1, 0, 1, 1};
  const auto pred = predict(train_linear(x, y, {}), x);
  for (int p : pred) EXPECT_EQ(p, 1);
  const std::vector<int> y0 = {0, 0, 1, 0, 0, 1, 0};
  for (int p : predict(train_linear(x, y0, {}), x)) EXPECT_EQ(p, 0);
}

TEST(TrainLinear, XorIsNotSeparable) {
  Matrix x(4, 2);
  x << 0, 0, 1, 1, 0, 1, 1, 0;
  const std::vector<int> y = {0, 0, 1, 1};
  // No sign pattern of w1*x1 + w2*x2 + b over a dense grid separates XOR.
  double best = 0.0;
  for (double w1 = -2; w1 <= 2; w1 += 0.25) {
    for (double w2 = -2; w2 <= 2; w2 += 0.25) {
      for (double b = -2; b <= 2; b += 0.125) {
        LinearModel m{Vector(2), b};
        m.weights << w1, w2;
        best = std::max(best, accuracy(predict(m, x), y));
      }
    }
  }
  EXPECT_EQ(best, 0.75);
  EXPECT_LE(accuracy(predict(train_linear(x, y, {}), x), y), 0.75);
}

TEST(TrainLinear, BestObjectiveTraceIsNonIncreasing) {
  std::mt19937_64 rng(2);
  const Matrix x = random_matrix(30, 4, rng);
  std::vector<int> y(30);
  for (int r = 0; r < 30; ++r) y[r] = x(r, 0) + 0.5 * x(r, 1) > 0;
  SvmTrace trace;
  const LinearModel m = train_linear(x, y, {}, &trace);
  ASSERT_EQ(trace.objective.size(), 100u);
  for (std::size_t e = 1; e < trace.objective.size(); ++e) EXPECT_LE(trace.objective[e], trace.objective[e - 1]);
  EXPECT_DOUBLE_EQ(hinge_objective(m, x, y, 1.0), trace.objective.back());
}

TEST(TrainLinear, RejectsBadInput) {
  const Matrix x = Matrix::Zero(3, 2);
  EXPECT_THROW(train_linear(x, std::vector<int>{1, 1, 1}, {}), std::invalid_argument);
  EXPECT_THROW(train_linear(x, std::vector<int>{0, 2, 1}, {}), std::invalid_argument);
  EXPECT_THROW(train_linear(x, std::vector<int>{0, 1}, {}), std::invalid_argument);
}

TEST(Predict, TieGoesToClassOne) {
  LinearModel m{Vector(2), 0.0};
  m.weights << 1, 0;
  Matrix x(3, 2);
  x << 2, 5, -2, 5, 0, 5;
  EXPECT_EQ(predict(m, x), (std::vector<int>{1, 0, 1}));
}

// ---- folds and metrics ------------------------------------------------------------------

std::vector<std::size_t> fold_sizes(const FoldSplit& s) {
  std::vector<std::size_t> out;
  for (const auto& f : s.folds) out.push_back(f.size());
  std::sort(out.rbegin(), out.rend());
  return out;
}

void expect_partition(const FoldSplit& s, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& f : s.folds) {
    for (std::size_t i : f) ++seen[i];
  }
  for (int c : seen) EXPECT_EQ(c, 1);
  for (int f = 0; f < s.k; ++f) {
    auto train = s.train_indices(f);
    EXPECT_EQ(train.size() + s.folds[f].size(), n);
    for (std::size_t i : s.folds[f]) EXPECT_EQ(std::count(train.begin(), train.end(), i), 0);
  }
}

TEST(Kfold, SizesAndPartition) {
  EXPECT_EQ(fold_sizes(kfold(10, 5, 0)), (std::vector<std::size_t>{2, 2, 2, 2, 2}));
  EXPECT_EQ(fold_sizes(kfold(11, 5, 0)), (std::vector<std::size_t>{3, 2, 2, 2, 2}));
  expect_partition(kfold(11, 5, 3), 11);
  EXPECT_THROW(kfold(3, 5, 0), std::invalid_argument);
  EXPECT_THROW(kfold(3, 0, 0), std::invalid_argument);
}

TEST(Kfold, StratifiedBalancesClasses) {
  const std::vector<int> y = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const FoldSplit s = kfold(12, 3, 9, std::span<const int>(y));
  expect_partition(s, 12);
  for (const auto& f : s.folds) {
    int pos = 0;
    for (std::size_t i : f) pos += y[i];
    EXPECT_EQ(pos, 2);
    EXPECT_EQ(f.size(), 4u);
  }
  std::mt19937_64 rng(4);
  std::vector<int> z(37);
  for (int& v : z) v = rng() % 3 == 0;
  const FoldSplit u = kfold(37, 5, 1, std::span<const int>(z));
  expect_partition(u, 37);
  std::vector<int> per_fold;
  for (const auto& f : u.folds) {
    int pos = 0;
    for (std::size_t i : f) pos += z[i];
    per_fold.push_back(pos);
  }
  EXPECT_LE(*std::max_element(per_fold.begin(), per_fold.end()) - *std::min_element(per_fold.begin(), per_fold.end()), 1);
}

TEST(Kfold, SeedChangesAssignmentDeterministically) {
  EXPECT_EQ(kfold(20, 4, 5).folds, kfold(20, 4, 5).folds);
  EXPECT_NE(kfold(20, 4, 5).folds, kfold(20, 4, 6).folds);
}

TEST(Prf1, Examples) {
  std::vector<int> truth(20, 0), pred(20, 0);
  for (int i = 0; i < 8; ++i) truth[i] = pred[i] = 1;  // TP 8
  pred[10] = pred[11] = 1;                              // FP 2
  truth[12] = truth[13] = 1;                            // FN 2
  const Prf p = prf1(truth, pred);
  EXPECT_DOUBLE_EQ(p.precision, 0.8);
  EXPECT_DOUBLE_EQ(p.recall, 0.8);
  EXPECT_DOUBLE_EQ(p.f1, 0.8);

  const Prf none = prf1(truth, std::vector<int>(20, 0));
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);

  const Prf perfect = prf1(truth, truth);
  EXPECT_EQ(perfect.f1, 1.0);

  // Joint permutation leaves the scores alone.
  std::vector<std::size_t> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  std::vector<int> t2(20), p2(20);
  for (std::size_t i = 0; i < 20; ++i) {
    t2[i] = truth[perm[i]];
    p2[i] = pred[perm[i]];
  }
  EXPECT_DOUBLE_EQ(prf1(t2, p2).f1, p.f1);
}

TEST(Standardizer, UsesTrainingStatistics) {
  Matrix x(4, 2);
  x << 1, 5, 3, 5, 5, 5, 7, 5;
  const Standardizer s = Standardizer::fit(x);
  EXPECT_DOUBLE_EQ(s.mean(0), 4.0);
  EXPECT_DOUBLE_EQ(s.scale(0), std::sqrt(5.0));
  EXPECT_EQ(s.scale(1), 1.0);
  const Matrix z = s.apply(x);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-15);
  EXPECT_EQ(z.col(1).squaredNorm(), 0.0);
}

// ---- clustering -------------------------------------------------------------------------

TEST(Kmeans, Examples) {
  Matrix x(4, 1);
  x << 0, 0.1, 10, 10.1;
  const ClusterResult two = kmeans(x, 2, 0);
  EXPECT_EQ(two.assignment[0], two.assignment[1]);
  EXPECT_EQ(two.assignment[2], two.assignment[3]);
  EXPECT_NE(two.assignment[0], two.assignment[2]);

  const ClusterResult all = kmeans(x, 4, 1);
  EXPECT_EQ(all.sse, 0.0);
  EXPECT_EQ(std::set<int>(all.assignment.begin(), all.assignment.end()).size(), 4u);

  const ClusterResult one = kmeans(x, 1, 2);
  EXPECT_NEAR(one.centroids(0, 0), 5.05, 1e-12);
  const double var = (x.array() - 5.05).square().mean();
  EXPECT_NEAR(one.sse, var * 4, 1e-9);
  EXPECT_THROW(kmeans(x, 5, 0), std::invalid_argument);
}

TEST(Kmeans, SseNonIncreasing) {
  std::mt19937_64 rng(5);
  const Matrix x = random_matrix(120, 3, rng);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ClusterResult r = kmeans(x, 6, seed);
    for (std::size_t s = 1; s < r.sse_trace.size(); ++s) EXPECT_LE(r.sse_trace[s], r.sse_trace[s - 1] + 1e-12);
    EXPECT_NEAR(r.sse, r.sse_trace.back(), 1e-12);
  }
}

TEST(Silhouette, Examples) {
  Matrix x(4, 1);
  x << 0, 0.1, 10, 10.1;
  const std::vector<int> a = {0, 0, 1, 1};
  // Hand evaluation: a = 0.1 for every point; b = 10.05 for the outer
  // points and 9.95 for the inner ones.
  const double want = 0.5 * (1 - 0.1 / 10.05) + 0.5 * (1 - 0.1 / 9.95);
  EXPECT_NEAR(silhouette(x, a), want, 1e-12);
  EXPECT_NEAR(silhouette(x, a), 0.98999975, 1e-8);

  Matrix two(2, 1);
  two << 0, 1;
  EXPECT_EQ(silhouette(two, std::vector<int>{0, 1}), 0.0);

  // Two clusters drawn from the same points.
  Matrix same(6, 1);
  same << 0, 1, 2, 0, 1, 2;
  EXPECT_LE(silhouette(same, std::vector<int>{0, 0, 0, 1, 1, 1}), 0.0);
  EXPECT_THROW(silhouette(x, std::vector<int>{0, 0, 0, 0}), std::invalid_argument);
}

TEST(CalinskiHarabasz, Examples) {
  Matrix x(4, 1);
  x << 0, 0.1, 10, 10.1;
  EXPECT_NEAR(calinski_harabasz(x, std::vector<int>{0, 0, 1, 1}), 20000.0, 1e-6);
  Matrix sym(4, 1);
  sym << -1, 1, -2, 2;
  EXPECT_EQ(calinski_harabasz(sym, std::vector<int>{0, 0, 1, 1}), 0.0);
  Matrix dup(4, 1);
  dup << 0, 0, 3, 3;
  EXPECT_TRUE(std::isinf(calinski_harabasz(dup, std::vector<int>{0, 0, 1, 1})));
}

TEST(ClusterIndices, MatchDirectDefinitions) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = random_matrix(50, 3, rng);
    std::vector<int> a(50);
    for (int i = 0; i < 50; ++i) a[i] = i % 4;
    std::shuffle(a.begin(), a.end(), rng);
    EXPECT_NEAR(silhouette(x, a), silhouette_oracle(x, a), 1e-9);
    EXPECT_NEAR(calinski_harabasz(x, a), ch_oracle(x, a), 1e-9 * ch_oracle(x, a));
  }
}

TEST(CalinskiHarabasz, PlantedBeatsPermutations) {
  std::mt19937_64 rng(7);
  Matrix x = random_matrix(60, 2, rng) * 0.3;
  std::vector<int> planted(60);
  for (int i = 0; i < 60; ++i) {
    planted[i] = i % 3;
    x(i, 0) += 6.0 * planted[i];
  }
  const double best = calinski_harabasz(x, planted);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> p = planted;
    std::shuffle(p.begin(), p.end(), rng);
    EXPECT_LE(calinski_harabasz(x, p), best);
  }
}

// ---- recommendation ----------------------------------------------------------------------

std::vector<std::size_t> recommend_oracle(const Matrix& e, std::size_t target, const Matrix& n,
                                          std::size_t neighbors, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> sims;
  for (Eigen::Index u = 0; u < e.rows(); ++u) {
    if (static_cast<std::size_t>(u) == target) continue;
    const double den = e.row(u).norm() * e.row(target).norm();
    sims.push_back({den > 0 ? e.row(u).dot(e.row(target)) / den : 0.0, u});
  }
  std::sort(sims.begin(), sims.end(), [](auto& l, auto& r) { return l.first != r.first ? l.first > r.first : l.second < r.second; });
  std::vector<std::pair<double, std::size_t>> freq;
  for (Eigen::Index i = 0; i < n.rows(); ++i) {
    double f = 0.0;
    for (std::size_t x = 0; x < std::min(neighbors, sims.size()); ++x) f += n(i, sims[x].second);
    if (f > 0) freq.push_back({f, i});
  }
  std::sort(freq.begin(), freq.end(), [](auto& l, auto& r) { return l.first != r.first ? l.first > r.first : l.second < r.second; });
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < std::min(k, freq.size()); ++x) out.push_back(freq[x].second);
  return out;
}

TEST(Recommend, Examples) {
  Matrix e(3, 2);
  e << 1, 0, 1, 0.1, -1, 0;
  Matrix n = Matrix::Zero(3, 3);  // news x users
  n(2, 1) = 1;                    // user 1 (nearest to 0) shared news 2
  n(0, 2) = 5;
  EXPECT_EQ(recommend(e, 0, n, 1, 1), (std::vector<std::size_t>{2}));

  n(0, 1) = 3;
  n(1, 1) = 1;
  n(2, 1) = 0;
  EXPECT_EQ(recommend(e, 0, n, 1, 5), (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(recommend(e, 0, Matrix::Zero(3, 3), 2, 5).empty());
}

TEST(Recommend, MatchesOracleAndScaleInvariant) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix e = random_matrix(15, 4, rng);
    Matrix n = Matrix::Zero(10, 15);
    for (Eigen::Index i = 0; i < 10; ++i) {
      for (Eigen::Index u = 0; u < 15; ++u) {
        if (rng() % 4 == 0) n(i, u) = static_cast<double>(1 + rng() % 3);
      }
    }
    const std::size_t target = rng() % 15;
    const auto got = recommend(e, target, n, 4, 5);
    EXPECT_EQ(got, recommend_oracle(e, target, n, 4, 5));
    EXPECT_EQ(recommend(e * 7.5, target, n, 4, 5), got);
  }
}

TEST(PrecisionAtK, Examples) {
  EXPECT_EQ(precision_at_k(std::vector<std::size_t>{0}, {0, 1}, 1), 1.0);
  EXPECT_DOUBLE_EQ(precision_at_k(std::vector<std::size_t>{0, 9, 1, 8, 7}, {0, 1}, 5), 0.4);
  EXPECT_EQ(precision_at_k(std::vector<std::size_t>{}, {0, 1}, 5), 0.0);
  EXPECT_DOUBLE_EQ(precision_at_k(std::vector<std::size_t>{0}, {0}, 5), 0.2);
  EXPECT_THROW(precision_at_k(std::vector<std::size_t>{0}, {0}, 0), std::invalid_argument);
}

}  // namespace
}  // namespace echotensor
