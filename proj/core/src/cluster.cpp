#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "echotensor/evaluate.hpp"

namespace echotensor {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Relabels arbitrary cluster ids to 0..k-1 in increasing id order.
std::vector<int> dense_labels(std::span<const int> assignment, int& k) {
  std::map<int, int> remap;
  for (int a : assignment) remap.emplace(a, 0);
  int next = 0;
  for (auto& [id, idx] : remap) idx = next++;
  k = next;
  std::vector<int> out(assignment.size());
  for (std::size_t i = 0; i < assignment.size(); ++i) out[i] = remap[assignment[i]];
  return out;
}

double assign(const Matrix& x, const Matrix& c, std::vector<int>& labels, Vector& dist) {
  double sse = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      const double d = (x.row(i) - c.row(j)).squaredNorm();
      if (d < bd) {
        bd = d;
        best = static_cast<int>(j);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist(i) = bd;
    sse += bd;
  }
  return sse;
}

}  // namespace

ClusterResult kmeans(const Matrix& x, int k, std::uint64_t seed, int max_iters) {
  const Eigen::Index n = x.rows();
  if (k < 1 || k > n) {
    throw std::invalid_argument("cluster count " + std::to_string(k) + " must lie in [1, " +
                                std::to_string(n) + "]");
  }
  std::mt19937_64 rng(seed);
  Matrix c(k, x.cols());
  c.row(0) = x.row(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n)));
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = (x.row(i) - c.row(0)).squaredNorm();
  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    }
    c.row(j) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) d2(i) = std::min(d2(i), (x.row(i) - c.row(j)).squaredNorm());
  }

  ClusterResult out;
  out.assignment.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  Vector dist(n);
  for (int it = 1; it <= max_iters; ++it) {
    assign(x, c, labels, dist);
    // An empty cluster takes the point farthest from its centroid among
    // clusters that can spare one.
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
    for (int j = 0; j < k; ++j) {
      if (sizes[static_cast<std::size_t>(j)] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] < 2) continue;
        if (far < 0 || dist(i) > dist(far)) far = i;
      }
      if (far < 0) break;
      --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = j;
      sizes[static_cast<std::size_t>(j)] = 1;
      dist(far) = 0.0;
    }
    const bool changed = labels != out.assignment;
    out.assignment = labels;
    Matrix sums = Matrix::Zero(k, x.cols());
    for (Eigen::Index i = 0; i < n; ++i) sums.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    for (int j = 0; j < k; ++j) {
      if (sizes[static_cast<std::size_t>(j)] > 0) c.row(j) = sums.row(j) / sizes[static_cast<std::size_t>(j)];
    }
    double sse = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) sse += (x.row(i) - c.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    out.sse_trace.push_back(sse);
    out.sse = sse;
    out.iterations = it;
    if (!changed) break;
  }
  out.centroids = c;
  return out;
}

double silhouette(const Matrix& x, std::span<const int> assignment) {
  if (static_cast<std::size_t>(x.rows()) != assignment.size()) {
    throw std::invalid_argument("assignment length differs from row count");
  }
  int k = 0;
  const std::vector<int> labels = dense_labels(assignment, k);
  if (k < 2) throw std::invalid_argument("silhouette needs at least two clusters");
  const std::size_t n = labels.size();
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (sizes[own] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[static_cast<std::size_t>(labels[j])] +=
          (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm();
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

double calinski_harabasz(const Matrix& x, std::span<const int> assignment) {
  if (static_cast<std::size_t>(x.rows()) != assignment.size()) {
    throw std::invalid_argument("assignment length differs from row count");
  }
  int k = 0;
  const std::vector<int> labels = dense_labels(assignment, k);
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (k < 2 || k >= n) throw std::invalid_argument("Calinski-Harabasz needs 2 <= k < n");
  const Vector mean = x.colwise().mean().transpose();
  Matrix cent = Matrix::Zero(k, x.cols());
  std::vector<double> sizes(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    cent.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] += 1.0;
  }
  double between = 0.0;
  for (int j = 0; j < k; ++j) {
    cent.row(j) /= sizes[static_cast<std::size_t>(j)];
    between += sizes[static_cast<std::size_t>(j)] * (cent.row(j).transpose() - mean).squaredNorm();
  }
  double within = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) within += (x.row(i) - cent.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  if (within == 0.0) return std::numeric_limits<double>::infinity();
  return (between / (k - 1)) / (within / static_cast<double>(n - k));
}

}  // namespace echotensor
