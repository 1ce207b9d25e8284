#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "echotensor/graph.hpp"

namespace echotensor {

/// Planted echo-chamber generator. Users are split into contiguous
/// communities (dense inside, a handful of bridge edges between). Fake
/// news is shared at `fake_boost` times the base rate inside community 0
/// and at the base rate elsewhere; real news at `real_boost` times the base
/// rate everywhere. Text is drawn from one small shared vocabulary, so the
/// label signal lives only in who shares what.
struct SyntheticOptions {
  std::size_t num_news = 200;
  std::size_t num_users = 400;
  std::size_t num_communities = 2;
  double base_rate = 0.04;
  double fake_boost = 5.0;
  double real_boost = 3.0;
  std::size_t intra_degree = 8;
  std::size_t bridges = 3;
  std::size_t words_per_doc = 25;
  std::uint64_t seed = 0;
};

struct SyntheticNews {
  std::string id;
  std::string text;
  int label = 0;
};

struct SyntheticShare {
  std::size_t news = 0;
  std::size_t user = 0;
  std::size_t count = 1;
};

struct SyntheticData {
  std::vector<SyntheticNews> news;
  std::vector<std::string> user_ids;
  std::vector<int> planted_community;  // per user
  std::vector<Edge> edges;
  std::vector<SyntheticShare> shares;
};

SyntheticData gen_synthetic(const SyntheticOptions& opts);

/// Writes news.jsonl, shares.tsv and edges.tsv into `dir` (created if
/// missing), in the formats load_dataset reads.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

}  // namespace echotensor
