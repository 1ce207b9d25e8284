#include "echotensor/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "echotensor/error.hpp"

namespace echotensor {

namespace {

constexpr std::array<const char*, 40> kWords = {
    "river",  "garden", "window", "coffee", "market", "yellow", "silver", "planet",
    "ticket", "mirror", "pocket", "candle", "forest", "bridge", "castle", "rocket",
    "pencil", "butter", "carpet", "dragon", "meadow", "harbor", "violin", "marble",
    "island", "copper", "saddle", "lantern", "orchard", "velvet", "pillow", "tunnel",
    "walnut", "falcon", "glacier", "mosaic", "canyon", "ember",  "quartz", "willow"};

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string padded(char prefix, std::size_t n, std::size_t total) {
  const int width = static_cast<int>(std::to_string(total > 0 ? total - 1 : 0).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, n);
  return buf;
}

}  // namespace

SyntheticData gen_synthetic(const SyntheticOptions& o) {
  if (o.num_communities < 1 || o.num_users < 2 * o.num_communities) {
    throw std::invalid_argument("need at least two users per community");
  }
  if (o.base_rate <= 0.0 || o.base_rate * std::max(o.fake_boost, o.real_boost) > 1.0) {
    throw std::invalid_argument("share probabilities must lie in (0, 1]");
  }
  std::mt19937_64 rng(o.seed);
  SyntheticData d;

  d.planted_community.resize(o.num_users);
  std::vector<std::vector<std::size_t>> members(o.num_communities);
  for (std::size_t u = 0; u < o.num_users; ++u) {
    d.user_ids.push_back(padded('u', u, o.num_users));
    const std::size_t c = u * o.num_communities / o.num_users;
    d.planted_community[u] = static_cast<int>(c);
    members[c].push_back(u);
  }

  std::set<Edge> edges;
  auto add = [&](std::size_t a, std::size_t b) {
    if (a == b) return false;
    return edges.insert({std::min(a, b), std::max(a, b)}).second;
  };
  for (const auto& m : members) {
    // A ring keeps every community connected; random chords densify it.
    for (std::size_t i = 0; i < m.size(); ++i) add(m[i], m[(i + 1) % m.size()]);
    const std::size_t target = std::min(m.size() * o.intra_degree / 2, m.size() * (m.size() - 1) / 2);
    std::size_t have = m.size() > 2 ? m.size() : 1;
    for (std::size_t guard = 0; have < target && guard < 100 * target; ++guard) {
      if (add(m[rng() % m.size()], m[rng() % m.size()])) ++have;
    }
  }
  if (o.num_communities > 1) {
    for (std::size_t placed = 0, guard = 0; placed < o.bridges && guard < 1000; ++guard) {
      const std::size_t a = rng() % o.num_users;
      const std::size_t b = rng() % o.num_users;
      if (d.planted_community[a] != d.planted_community[b] && add(a, b)) ++placed;
    }
  }
  d.edges.assign(edges.begin(), edges.end());

  for (std::size_t n = 0; n < o.num_news; ++n) {
    SyntheticNews rec;
    rec.id = padded('n', n, o.num_news);
    rec.label = static_cast<int>(n % 2);
    for (std::size_t w = 0; w < o.words_per_doc; ++w) {
      if (w) rec.text += ' ';
      rec.text += kWords[rng() % kWords.size()];
    }
    d.news.push_back(std::move(rec));
  }

  for (std::size_t n = 0; n < o.num_news; ++n) {
    const bool fake = d.news[n].label == 1;
    for (std::size_t u = 0; u < o.num_users; ++u) {
      const bool inside = d.planted_community[u] == 0;
      const double boost = fake ? (inside ? o.fake_boost : 1.0) : o.real_boost;
      if (uniform01(rng) < o.base_rate * boost) {
        d.shares.push_back({n, u, 1 + static_cast<std::size_t>(rng() % 2)});
      }
    }
  }
  return d;
}

void write_synthetic(const SyntheticData& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("news.jsonl");
    for (const auto& n : d.news) {
      out << nlohmann::json{{"id", n.id}, {"text", n.text}, {"label", n.label}}.dump() << '\n';
    }
  }
  {
    auto out = open("shares.tsv");
    for (const auto& s : d.shares) {
      out << d.news[s.news].id << '\t' << d.user_ids[s.user] << '\t' << s.count << '\n';
    }
  }
  {
    auto out = open("edges.tsv");
    std::vector<bool> seen(d.user_ids.size(), false);
    for (const auto& e : d.edges) {
      out << d.user_ids[e.a] << '\t' << d.user_ids[e.b] << '\n';
      seen[e.a] = seen[e.b] = true;
    }
    for (std::size_t u = 0; u < seen.size(); ++u) {
      if (!seen[u]) out << d.user_ids[u] << '\n';
    }
  }
}

}  // namespace echotensor
