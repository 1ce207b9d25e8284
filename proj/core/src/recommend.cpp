#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "echotensor/evaluate.hpp"

namespace echotensor {

std::vector<std::size_t> recommend(const Matrix& user_embeddings, std::size_t target,
                                   const Matrix& news_user, std::size_t num_neighbors,
                                   std::size_t k) {
  const auto users = static_cast<std::size_t>(user_embeddings.rows());
  if (target >= users) throw std::invalid_argument("target user out of range");
  if (static_cast<std::size_t>(news_user.cols()) != users) {
    throw std::invalid_argument("share matrix columns must match the user count");
  }
  const auto t = static_cast<Eigen::Index>(target);
  const double tn = user_embeddings.row(t).norm();
  std::vector<std::pair<double, std::size_t>> sims;
  sims.reserve(users);
  for (std::size_t u = 0; u < users; ++u) {
    if (u == target) continue;
    const auto row = user_embeddings.row(static_cast<Eigen::Index>(u));
    const double un = row.norm();
    const double s = (tn > 0.0 && un > 0.0) ? row.dot(user_embeddings.row(t)) / (tn * un) : 0.0;
    sims.emplace_back(s, u);
  }
  std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  if (sims.size() > num_neighbors) sims.resize(num_neighbors);

  std::vector<std::pair<double, std::size_t>> scored;
  for (Eigen::Index news = 0; news < news_user.rows(); ++news) {
    double freq = 0.0;
    for (const auto& [sim, u] : sims) freq += news_user(news, static_cast<Eigen::Index>(u));
    if (freq > 0.0) scored.emplace_back(freq, static_cast<std::size_t>(news));
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].second);
  return out;
}

double precision_at_k(std::span<const std::size_t> recommended,
                      const std::unordered_set<std::size_t>& gold, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < recommended.size() && i < k; ++i) hits += gold.count(recommended[i]);
  return static_cast<double>(hits) / static_cast<double>(k);
}

}  // namespace echotensor
