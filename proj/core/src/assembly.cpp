#include "echotensor/assembly.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "echotensor/error.hpp"

namespace echotensor {

namespace {

std::string trim_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::ifstream open(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

}  // namespace

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(news.size());
  for (const auto& n : news) out.push_back(n.label);
  return out;
}

std::vector<NewsRecord> read_news_jsonl(std::istream& in) {
  std::vector<NewsRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_cr(std::move(line));
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "news line " + std::to_string(line_no) + ": ";
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + "invalid JSON (" + e.what() + ")");
    }
    if (!obj.is_object() || !obj.contains("id") || !obj.contains("text") || !obj.contains("label")) {
      throw DataError(where + "expected an object with id, text and label");
    }
    NewsRecord r;
    if (obj["id"].is_string()) {
      r.id = obj["id"].get<std::string>();
    } else if (obj["id"].is_number_integer()) {
      r.id = std::to_string(obj["id"].get<long long>());
    } else {
      throw DataError(where + "id must be a string");
    }
    if (!obj["text"].is_string()) throw DataError(where + "text must be a string");
    r.text = obj["text"].get<std::string>();
    if (!obj["label"].is_number_integer() ||
        (obj["label"].get<long long>() != 0 && obj["label"].get<long long>() != 1)) {
      throw DataError(where + "label must be 0 or 1");
    }
    r.label = static_cast<int>(obj["label"].get<long long>());
    if (!seen.insert(r.id).second) throw DataError(where + "duplicate news id '" + r.id + "'");
    out.push_back(std::move(r));
  }
  return out;
}

Dataset load_dataset(std::istream& news, std::istream& shares, std::istream& edges) {
  Dataset d;
  d.news = read_news_jsonl(news);
  for (std::size_t i = 0; i < d.news.size(); ++i) d.news_index.emplace(d.news[i].id, i);

  LabeledGraph lg = read_edge_list(edges);
  d.graph = std::move(lg.graph);
  d.user_ids = std::move(lg.ids);
  for (std::size_t u = 0; u < d.user_ids.size(); ++u) d.user_index.emplace(d.user_ids[u], u);

  std::set<std::pair<std::size_t, std::size_t>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(shares, line)) {
    ++line_no;
    line = trim_cr(std::move(line));
    if (line.empty()) continue;
    const std::string where = "shares line " + std::to_string(line_no) + ": ";
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1) {
      f.push_back(line.substr(start, tab - start));
    }
    f.push_back(line.substr(start));
    if (f.size() != 3) throw DataError(where + "expected 'news_id<TAB>user_id<TAB>count'");
    auto n = d.news_index.find(f[0]);
    if (n == d.news_index.end()) throw DataError(where + "unknown news id '" + f[0] + "'");
    auto u = d.user_index.find(f[1]);
    if (u == d.user_index.end()) throw DataError(where + "unknown user id '" + f[1] + "'");
    std::size_t count = 0;
    std::size_t used = 0;
    try {
      const long long c = std::stoll(f[2], &used);
      if (used != f[2].size() || c < 1) throw std::invalid_argument("count");
      count = static_cast<std::size_t>(c);
    } catch (const std::exception&) {
      throw DataError(where + "count must be a positive integer, got '" + f[2] + "'");
    }
    if (!seen.insert({n->second, u->second}).second) {
      throw DataError(where + "duplicate share of news '" + f[0] + "' by user '" + f[1] + "'");
    }
    d.shares.push_back({n->second, u->second, count});
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& news_path,
                     const std::filesystem::path& shares_path,
                     const std::filesystem::path& edges_path) {
  auto news = open(news_path);
  auto shares = open(shares_path);
  auto edges = open(edges_path);
  return load_dataset(news, shares, edges);
}

Matrix news_user_matrix(const Dataset& d) {
  Matrix n = Matrix::Zero(static_cast<Eigen::Index>(d.num_news()),
                          static_cast<Eigen::Index>(d.num_users()));
  for (const auto& s : d.shares) {
    n(static_cast<Eigen::Index>(s.news), static_cast<Eigen::Index>(s.user)) +=
        static_cast<double>(s.count);
  }
  return n;
}

SparseTensor3 build_tensor(const Matrix& news_user, const Matrix& user_community) {
  if (news_user.cols() != user_community.rows()) {
    throw std::invalid_argument("news-user columns must equal user-community rows");
  }
  std::vector<std::vector<std::pair<Eigen::Index, double>>> communities(
      static_cast<std::size_t>(user_community.rows()));
  for (Eigen::Index j = 0; j < user_community.rows(); ++j) {
    for (Eigen::Index k = 0; k < user_community.cols(); ++k) {
      if (user_community(j, k) != 0.0) {
        communities[static_cast<std::size_t>(j)].emplace_back(k, user_community(j, k));
      }
    }
  }
  std::vector<Entry> entries;
  for (Eigen::Index i = 0; i < news_user.rows(); ++i) {
    for (Eigen::Index j = 0; j < news_user.cols(); ++j) {
      const double nij = news_user(i, j);
      if (nij == 0.0) continue;
      for (const auto& [k, cjk] : communities[static_cast<std::size_t>(j)]) {
        entries.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                           static_cast<std::size_t>(k), nij * cjk});
      }
    }
  }
  return SparseTensor3({static_cast<std::size_t>(news_user.rows()),
                        static_cast<std::size_t>(news_user.cols()),
                        static_cast<std::size_t>(user_community.cols())},
                       std::move(entries));
}

Corpus make_corpus(const Dataset& d, const StopwordSet& stopwords) {
  std::vector<Document> docs;
  docs.reserve(d.news.size());
  for (const auto& n : d.news) docs.push_back({n.id, preprocess(n.text, stopwords)});
  return Corpus(std::move(docs));
}

}  // namespace echotensor
