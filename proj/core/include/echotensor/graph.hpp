#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "echotensor/tensor.hpp"

namespace echotensor {

// Undirected edge with a < b.
struct Edge {
  std::size_t a = 0;
  std::size_t b = 0;
  auto operator<=>(const Edge&) const = default;
};

class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  // Throws std::invalid_argument on self-loops, duplicates or ids out of range.
  UndirectedGraph(std::size_t num_nodes, std::vector<Edge> edges);

  std::size_t num_nodes() const { return adjacency_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  // Sorted lexicographically.
  std::span<const Edge> edges() const { return edges_; }
  std::span<const std::size_t> neighbors(std::size_t node) const { return adjacency_[node]; }
  std::size_t degree(std::size_t node) const { return adjacency_[node].size(); }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

inline constexpr int kUnassigned = -1;

/// Partition of graph nodes into communities. After small-community
/// filtering some nodes may be kUnassigned.
struct CommunityAssignment {
  std::vector<int> membership;
  int num_communities = 0;

  // Validates that ids are dense in [0, count) and every id is used.
  static CommunityAssignment from_membership(std::vector<int> membership);
  std::vector<std::vector<std::size_t>> members() const;
};

/// Q = sum_c [L_c / m - (d_c / 2m)^2]. Every node must be assigned and the
/// graph must have at least one edge.
double modularity(const UndirectedGraph& g, const CommunityAssignment& a);

/// Shortest-path edge betweenness over unordered node pairs; pairs joined by
/// several shortest paths split their unit of credit equally.
std::map<Edge, double> edge_betweenness(const UndirectedGraph& g);

/// Connected components labelled in order of their smallest node id.
CommunityAssignment connected_components(const UndirectedGraph& g);

struct DendrogramLevel {
  std::size_t removals = 0;  // edges removed before this partition appeared
  CommunityAssignment partition;
  double modularity = 0.0;  // evaluated on the original graph
};

struct Dendrogram {
  std::vector<Edge> removal_order;
  std::vector<DendrogramLevel> levels;
};

/// Divisive Girvan-Newman: repeatedly removes the edge of highest
/// betweenness (ties: lexicographically smallest edge) and records the
/// partition each time a component splits. With `stop_at` set, stops once
/// that many communities exist.
Dendrogram girvan_newman(const UndirectedGraph& g, std::optional<int> stop_at = std::nullopt);

struct CommunityTarget {
  std::optional<int> exact_k;  // nullopt: pick the level of maximum modularity

  static CommunityTarget automatic() { return {}; }
  static CommunityTarget exact(int k) { return {k}; }
};

CommunityAssignment detect_communities(const UndirectedGraph& g, CommunityTarget target);

struct FilterResult {
  CommunityAssignment assignment;
  std::size_t dropped_communities = 0;
  std::size_t unassigned_nodes = 0;
  std::optional<std::string> warning;  // set when nothing survives
};

/// Drops communities with fewer than `min_size` members; their nodes become
/// kUnassigned and the surviving ids are re-densified in their old order.
FilterResult filter_small_communities(const CommunityAssignment& a, std::size_t min_size);

/// Binary users x communities indicator matrix. Unassigned users get a
/// zero row.
Matrix community_matrix(const CommunityAssignment& a, std::size_t num_users);

/// Graph read from a TSV edge list with string ids.
struct LabeledGraph {
  UndirectedGraph graph;
  std::vector<std::string> ids;  // dense id -> original id, first-appearance order
  std::size_t collapsed_duplicates = 0;
};

/// Parses "user<TAB>user" lines; a line holding a single id declares an
/// isolated node. Reversed or repeated pairs collapse into one edge.
/// Self-loops and malformed lines throw DataError naming the line.
LabeledGraph read_edge_list(std::istream& in);
LabeledGraph read_edge_list(const std::filesystem::path& path);

}  // namespace echotensor
