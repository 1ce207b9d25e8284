#include "echotensor/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "echotensor/error.hpp"

namespace echotensor {

UndirectedGraph::UndirectedGraph(std::size_t num_nodes, std::vector<Edge> edges)
    : adjacency_(num_nodes) {
  for (auto& e : edges) {
    if (e.a == e.b) throw std::invalid_argument("self-loop on node " + std::to_string(e.a));
    if (e.a >= num_nodes || e.b >= num_nodes) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw std::invalid_argument("duplicate edge");
  }
  for (const auto& e : edges) {
    adjacency_[e.a].push_back(e.b);
    adjacency_[e.b].push_back(e.a);
  }
  for (auto& n : adjacency_) std::sort(n.begin(), n.end());
  edges_ = std::move(edges);
}

CommunityAssignment CommunityAssignment::from_membership(std::vector<int> membership) {
  int count = 0;
  for (int c : membership) {
    if (c < kUnassigned) throw std::invalid_argument("negative community id");
    count = std::max(count, c + 1);
  }
  std::vector<bool> used(static_cast<std::size_t>(count), false);
  for (int c : membership) {
    if (c >= 0) used[static_cast<std::size_t>(c)] = true;
  }
  if (std::find(used.begin(), used.end(), false) != used.end()) {
    throw std::invalid_argument("community ids are not dense");
  }
  return {std::move(membership), count};
}

std::vector<std::vector<std::size_t>> CommunityAssignment::members() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_communities));
  for (std::size_t n = 0; n < membership.size(); ++n) {
    if (membership[n] >= 0) out[static_cast<std::size_t>(membership[n])].push_back(n);
  }
  return out;
}

double modularity(const UndirectedGraph& g, const CommunityAssignment& a) {
  if (g.num_edges() == 0) throw std::invalid_argument("modularity of a graph without edges");
  if (a.membership.size() != g.num_nodes()) {
    throw std::invalid_argument("assignment does not cover every node");
  }
  const auto nc = static_cast<std::size_t>(a.num_communities);
  std::vector<double> intra(nc, 0.0), degree(nc, 0.0);
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    if (a.membership[n] < 0) throw std::invalid_argument("modularity with unassigned node");
    degree[static_cast<std::size_t>(a.membership[n])] += static_cast<double>(g.degree(n));
  }
  for (const auto& e : g.edges()) {
    if (a.membership[e.a] == a.membership[e.b]) intra[static_cast<std::size_t>(a.membership[e.a])] += 1.0;
  }
  const double m = static_cast<double>(g.num_edges());
  double q = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    const double share = degree[c] / (2.0 * m);
    q += intra[c] / m - share * share;
  }
  return q;
}

namespace {

// Mutable view of a graph with edge ids, used while edges are removed.
struct WorkGraph {
  struct Arc {
    std::size_t to;
    std::size_t edge;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<Arc>> adj;
  std::vector<bool> active;

  explicit WorkGraph(const UndirectedGraph& g)
      : edges(g.edges().begin(), g.edges().end()), adj(g.num_nodes()), active(edges.size(), true) {
    for (std::size_t id = 0; id < edges.size(); ++id) {
      adj[edges[id].a].push_back({edges[id].b, id});
      adj[edges[id].b].push_back({edges[id].a, id});
    }
  }

  std::vector<std::size_t> component_of(std::size_t start) const {
    std::vector<std::size_t> nodes{start};
    std::vector<bool> seen(adj.size(), false);
    seen[start] = true;
    for (std::size_t h = 0; h < nodes.size(); ++h) {
      for (const auto& arc : adj[nodes[h]]) {
        if (active[arc.edge] && !seen[arc.to]) {
          seen[arc.to] = true;
          nodes.push_back(arc.to);
        }
      }
    }
    return nodes;
  }

  // Brandes accumulation from every source in `sources`, adding to `score`.
  // Each unordered pair is counted twice (once per endpoint as source).
  void accumulate_betweenness(std::span<const std::size_t> sources,
                              std::vector<double>& score) const {
    const std::size_t n = adj.size();
    std::vector<double> sigma(n), delta(n);
    std::vector<long> dist(n, -1);
    std::vector<std::size_t> order;
    std::vector<std::vector<Arc>> preds(n);
    for (std::size_t s : sources) {
      order.clear();
      std::deque<std::size_t> queue{s};
      dist[s] = 0;
      sigma[s] = 1.0;
      while (!queue.empty()) {
        const std::size_t v = queue.front();
        queue.pop_front();
        order.push_back(v);
        for (const auto& arc : adj[v]) {
          if (!active[arc.edge]) continue;
          const std::size_t w = arc.to;
          if (dist[w] < 0) {
            dist[w] = dist[v] + 1;
            queue.push_back(w);
          }
          if (dist[w] == dist[v] + 1) {
            sigma[w] += sigma[v];
            preds[w].push_back({v, arc.edge});
          }
        }
      }
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::size_t w = *it;
        for (const auto& p : preds[w]) {
          const double c = sigma[p.to] / sigma[w] * (1.0 + delta[w]);
          score[p.edge] += c;
          delta[p.to] += c;
        }
      }
      for (std::size_t v : order) {
        sigma[v] = 0.0;
        delta[v] = 0.0;
        dist[v] = -1;
        preds[v].clear();
      }
    }
  }
};

CommunityAssignment label_components(const WorkGraph& wg) {
  std::vector<int> membership(wg.adj.size(), kUnassigned);
  int next = 0;
  for (std::size_t s = 0; s < wg.adj.size(); ++s) {
    if (membership[s] != kUnassigned) continue;
    for (std::size_t v : wg.component_of(s)) membership[v] = next;
    ++next;
  }
  return {std::move(membership), next};
}

}  // namespace

std::map<Edge, double> edge_betweenness(const UndirectedGraph& g) {
  WorkGraph wg(g);
  std::vector<double> score(wg.edges.size(), 0.0);
  std::vector<std::size_t> sources(g.num_nodes());
  for (std::size_t i = 0; i < sources.size(); ++i) sources[i] = i;
  wg.accumulate_betweenness(sources, score);
  std::map<Edge, double> out;
  for (std::size_t id = 0; id < wg.edges.size(); ++id) out[wg.edges[id]] = score[id] / 2.0;
  return out;
}

CommunityAssignment connected_components(const UndirectedGraph& g) {
  return label_components(WorkGraph(g));
}

Dendrogram girvan_newman(const UndirectedGraph& g, std::optional<int> stop_at) {
  WorkGraph wg(g);
  Dendrogram out;
  const bool has_edges = g.num_edges() > 0;
  auto record = [&](std::size_t removals) {
    DendrogramLevel level;
    level.removals = removals;
    level.partition = label_components(wg);
    level.modularity = has_edges ? modularity(g, level.partition) : 0.0;
    out.levels.push_back(std::move(level));
  };
  record(0);
  auto reached = [&] { return stop_at && out.levels.back().partition.num_communities >= *stop_at; };

  std::vector<double> score(wg.edges.size(), 0.0);
  {
    std::vector<std::size_t> all(g.num_nodes());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    wg.accumulate_betweenness(all, score);
  }
  std::size_t remaining = wg.edges.size();
  while (remaining > 0 && !reached()) {
    // Highest betweenness, lexicographically smallest edge among ties. Edge
    // ids follow lexicographic edge order, so the first maximum wins.
    std::size_t best = wg.edges.size();
    for (std::size_t id = 0; id < wg.edges.size(); ++id) {
      if (!wg.active[id]) continue;
      if (best == wg.edges.size()) {
        best = id;
        continue;
      }
      const double tol = 1e-9 * std::max(1.0, std::abs(score[best]));
      if (score[id] > score[best] + tol) best = id;
    }
    const Edge removed = wg.edges[best];
    wg.active[best] = false;
    --remaining;
    out.removal_order.push_back(removed);

    const auto comp_a = wg.component_of(removed.a);
    const bool split = std::find(comp_a.begin(), comp_a.end(), removed.b) == comp_a.end();
    std::vector<std::size_t> affected = comp_a;
    if (split) {
      const auto comp_b = wg.component_of(removed.b);
      affected.insert(affected.end(), comp_b.begin(), comp_b.end());
    }
    std::vector<bool> in_affected(g.num_nodes(), false);
    for (std::size_t v : affected) in_affected[v] = true;
    for (std::size_t id = 0; id < wg.edges.size(); ++id) {
      if (in_affected[wg.edges[id].a]) score[id] = 0.0;
    }
    wg.accumulate_betweenness(affected, score);
    if (split) record(out.removal_order.size());
  }
  return out;
}

CommunityAssignment detect_communities(const UndirectedGraph& g, CommunityTarget target) {
  if (g.num_nodes() == 0) throw std::invalid_argument("community detection on an empty graph");
  if (target.exact_k) {
    const int k = *target.exact_k;
    if (k < 1 || static_cast<std::size_t>(k) > g.num_nodes()) {
      throw std::invalid_argument("cannot form " + std::to_string(k) + " communities from " +
                                  std::to_string(g.num_nodes()) + " nodes");
    }
    const Dendrogram d = girvan_newman(g, k);
    for (const auto& level : d.levels) {
      if (level.partition.num_communities == k) return level.partition;
    }
    throw std::invalid_argument("no dendrogram level has exactly " + std::to_string(k) +
                                " communities (graph starts with " +
                                std::to_string(d.levels.front().partition.num_communities) +
                                " components)");
  }
  const Dendrogram d = girvan_newman(g);
  const DendrogramLevel* best = &d.levels.front();
  // Levels whose Q only differs by rounding count as ties; the earlier wins.
  for (const auto& level : d.levels) {
    if (level.modularity > best->modularity + 1e-12) best = &level;
  }
  return best->partition;
}

FilterResult filter_small_communities(const CommunityAssignment& a, std::size_t min_size) {
  if (min_size < 1) throw std::invalid_argument("min_size must be at least 1");
  std::vector<std::size_t> sizes(static_cast<std::size_t>(a.num_communities), 0);
  for (int c : a.membership) {
    if (c >= 0) ++sizes[static_cast<std::size_t>(c)];
  }
  std::vector<int> remap(sizes.size(), kUnassigned);
  int next = 0;
  FilterResult out;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (sizes[c] >= min_size) {
      remap[c] = next++;
    } else {
      ++out.dropped_communities;
    }
  }
  out.assignment.num_communities = next;
  out.assignment.membership.reserve(a.membership.size());
  for (int c : a.membership) {
    const int m = c >= 0 ? remap[static_cast<std::size_t>(c)] : kUnassigned;
    if (m == kUnassigned) ++out.unassigned_nodes;
    out.assignment.membership.push_back(m);
  }
  if (next == 0) {
    out.warning = "no community has at least " + std::to_string(min_size) +
                  " members; every node is unassigned";
  }
  return out;
}

Matrix community_matrix(const CommunityAssignment& a, std::size_t num_users) {
  if (a.membership.size() > num_users) {
    throw std::invalid_argument("assignment references node ids beyond num_users");
  }
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(num_users), a.num_communities);
  for (std::size_t n = 0; n < a.membership.size(); ++n) {
    const int m = a.membership[n];
    if (m >= a.num_communities) throw std::invalid_argument("community id out of range");
    if (m >= 0) c(static_cast<Eigen::Index>(n), m) = 1.0;
  }
  return c;
}

LabeledGraph read_edge_list(std::istream& in) {
  LabeledGraph out;
  std::unordered_map<std::string, std::size_t> index;
  auto intern = [&](const std::string& id) {
    auto [it, inserted] = index.try_emplace(id, out.ids.size());
    if (inserted) out.ids.push_back(id);
    return it->second;
  };
  std::set<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const std::string first = line.substr(0, tab);
    if (first.empty()) throw DataError("edges line " + std::to_string(line_no) + ": empty user id");
    if (tab == std::string::npos) {
      intern(first);
      continue;
    }
    const std::string second = line.substr(tab + 1);
    if (second.empty() || second.find('\t') != std::string::npos) {
      throw DataError("edges line " + std::to_string(line_no) +
                      ": expected 'user_id<TAB>user_id'");
    }
    if (first == second) {
      throw DataError("edges line " + std::to_string(line_no) + ": self-loop on '" + first + "'");
    }
    const std::size_t a = intern(first);
    const std::size_t b = intern(second);
    if (!edges.insert({std::min(a, b), std::max(a, b)}).second) ++out.collapsed_duplicates;
  }
  out.graph = UndirectedGraph(out.ids.size(), {edges.begin(), edges.end()});
  return out;
}

LabeledGraph read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_edge_list(in);
}

}  // namespace echotensor
