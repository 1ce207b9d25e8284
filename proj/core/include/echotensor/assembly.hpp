#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "echotensor/graph.hpp"
#include "echotensor/tensor.hpp"
#include "echotensor/text.hpp"

namespace echotensor {

struct NewsRecord {
  std::string id;
  std::string text;
  int label = 0;  // 1 = fake
};

struct ShareRecord {
  std::size_t news = 0;
  std::size_t user = 0;
  std::size_t count = 1;
};

/// Joined news, engagement and social-graph records. Users are the nodes
/// of the edge list; news rows and user columns follow first appearance.
struct Dataset {
  std::vector<NewsRecord> news;
  std::vector<std::string> user_ids;
  std::vector<ShareRecord> shares;
  UndirectedGraph graph;
  std::unordered_map<std::string, std::size_t> news_index;
  std::unordered_map<std::string, std::size_t> user_index;

  std::size_t num_news() const { return news.size(); }
  std::size_t num_users() const { return user_ids.size(); }
  std::vector<int> labels() const;
};

/// One `{"id", "text", "label"}` object per line.
std::vector<NewsRecord> read_news_jsonl(std::istream& in);

Dataset load_dataset(std::istream& news, std::istream& shares, std::istream& edges);
Dataset load_dataset(const std::filesystem::path& news_path,
                     const std::filesystem::path& shares_path,
                     const std::filesystem::path& edges_path);

/// N (news x users): share count of user j on news i.
Matrix news_user_matrix(const Dataset& d);

/// t_ijk = N_ij * C_jk, storing only nonzero products.
SparseTensor3 build_tensor(const Matrix& news_user, const Matrix& user_community);

Corpus make_corpus(const Dataset& d, const StopwordSet& stopwords);

}  // namespace echotensor
