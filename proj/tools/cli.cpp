#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "echotensor/error.hpp"
#include "echotensor/io.hpp"
#include "echotensor/pipeline.hpp"
#include "echotensor/synthetic.hpp"

namespace echotensor::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// ---- flags ----------------------------------------------------------------

struct Flags {
  // global
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config;
  std::string out_dir = ".";
  std::optional<int> jobs;
  // dataset
  std::optional<std::string> data_dir;
  std::optional<std::string> news, shares, edges;
  // model
  std::optional<std::string> method;
  std::optional<std::string> communities;
  std::optional<std::size_t> min_size;
  std::optional<std::vector<std::size_t>> tucker_ranks;
  std::optional<std::size_t> cmtf_rank;
  std::optional<std::size_t> nmf_rank;
  std::optional<std::size_t> vocab_cap;
  std::optional<bool> unigrams;
  std::optional<int> folds;
  std::optional<double> svm_c;
  std::optional<int> svm_epochs;
  std::optional<int> als_sweeps;
  std::optional<int> cmtf_iters;
  std::optional<std::size_t> neighbors;
  // command-specific
  std::optional<std::string> sweep;
  std::optional<std::string> embeddings;
  std::optional<std::string> tensor;
  std::optional<std::string> content;
  std::optional<std::string> news_ids;
  std::optional<std::string> user_ids;
  int k_min = 2;
  int k_max = 10;
  int runs = 10;
  SyntheticOptions synthetic;
};

void add_dataset_flags(CLI::App* app, Flags& f) {
  app->add_option("--data-dir", f.data_dir, "Directory holding news.jsonl, shares.tsv, edges.tsv");
  app->add_option("--news", f.news, "News JSONL (id, text, label)");
  app->add_option("--shares", f.shares, "Shares TSV (news_id, user_id, count)");
  app->add_option("--edges", f.edges, "Social graph edge list TSV");
}

void add_community_flags(CLI::App* app, Flags& f) {
  app->add_option("--communities", f.communities, "Community count, or 'auto' for maximum modularity");
  app->add_option("--min-size", f.min_size, "Drop communities smaller than this");
}

void add_model_flags(CLI::App* app, Flags& f) {
  add_community_flags(app, f);
  app->add_option("--method", f.method, "citdetect | cimtdetect | content-nmf | content-ngram");
  app->add_option("--tucker-ranks", f.tucker_ranks, "Tucker ranks: news user community")->expected(3);
  app->add_option("--cmtf-rank", f.cmtf_rank, "CMTF rank");
  app->add_option("--nmf-rank", f.nmf_rank, "NMF rank");
  app->add_option("--vocab-cap", f.vocab_cap, "Maximum vocabulary size");
  app->add_option("--unigrams", f.unigrams, "Let unigrams compete with bigrams (true/false)");
  app->add_option("--als-sweeps", f.als_sweeps, "Maximum ALS sweeps");
  app->add_option("--cmtf-iters", f.cmtf_iters, "Maximum CMTF optimizer iterations");
}

// ---- config ---------------------------------------------------------------

Json config_to_json(const RunConfig& c) {
  Json j;
  j["news"] = c.news_path.generic_string();
  j["shares"] = c.shares_path.generic_string();
  j["edges"] = c.edges_path.generic_string();
  j["method"] = to_string(c.method);
  j["tucker_ranks"] = c.tucker_ranks;
  j["cmtf_rank"] = c.cmtf_rank;
  j["nmf_rank"] = c.nmf_rank;
  if (c.communities) {
    j["communities"] = *c.communities;
  } else {
    j["communities"] = "auto";
  }
  j["min_community_size"] = c.min_community_size;
  j["vocab"] = {{"n", c.vocab.n}, {"cap", c.vocab.cap}, {"include_unigrams", c.vocab.include_unigrams}};
  j["folds"] = c.folds;
  j["stratify"] = c.stratify;
  j["svm_c"] = c.svm_c;
  j["svm_epochs"] = c.svm_epochs;
  j["als_sweeps"] = c.als_sweeps;
  j["cmtf_iters"] = c.cmtf_iters;
  j["neighbors"] = c.neighbors;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  return j;
}

std::optional<int> parse_communities(const Json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "auto") return std::nullopt;
    std::size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || k < 1) throw std::invalid_argument("communities must be 'auto' or a positive integer");
    return k;
  }
  if (v.is_number_integer() && v.get<long long>() >= 1) return v.get<int>();
  throw std::invalid_argument("communities must be 'auto' or a positive integer");
}

void set_data_dir(RunConfig& c, const fs::path& dir) {
  c.news_path = dir / "news.jsonl";
  c.shares_path = dir / "shares.tsv";
  c.edges_path = dir / "edges.tsv";
}

void apply_json(RunConfig& c, const Json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "data_dir") set_data_dir(c, v.get<std::string>());
    }
    for (const auto& [key, v] : j.items()) {
      if (key == "data_dir") continue;
      if (key == "news") c.news_path = v.get<std::string>();
      else if (key == "shares") c.shares_path = v.get<std::string>();
      else if (key == "edges") c.edges_path = v.get<std::string>();
      else if (key == "method") c.method = parse_method(v.get<std::string>());
      else if (key == "tucker_ranks") c.tucker_ranks = v.get<Ranks3>();
      else if (key == "cmtf_rank") c.cmtf_rank = v.get<std::size_t>();
      else if (key == "nmf_rank") c.nmf_rank = v.get<std::size_t>();
      else if (key == "communities") c.communities = parse_communities(v);
      else if (key == "min_community_size") c.min_community_size = v.get<std::size_t>();
      else if (key == "vocab") {
        for (const auto& [vk, vv] : v.items()) {
          if (vk == "n") c.vocab.n = vv.get<std::size_t>();
          else if (vk == "cap") c.vocab.cap = vv.get<std::size_t>();
          else if (vk == "include_unigrams") c.vocab.include_unigrams = vv.get<bool>();
          else throw std::invalid_argument("unknown vocab key '" + vk + "'");
        }
      }
      else if (key == "folds") c.folds = v.get<int>();
      else if (key == "stratify") c.stratify = v.get<bool>();
      else if (key == "svm_c") c.svm_c = v.get<double>();
      else if (key == "svm_epochs") c.svm_epochs = v.get<int>();
      else if (key == "als_sweeps") c.als_sweeps = v.get<int>();
      else if (key == "cmtf_iters") c.cmtf_iters = v.get<int>();
      else if (key == "neighbors") c.neighbors = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "jobs") c.jobs = v.get<int>();
      else throw std::invalid_argument("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

// Config file first, then flags; flags win.
RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw DataError("cannot open config " + *f.config);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("config " + *f.config + ": " + e.what());
    }
    apply_json(c, j);
  }
  if (f.data_dir) set_data_dir(c, *f.data_dir);
  if (f.news) c.news_path = *f.news;
  if (f.shares) c.shares_path = *f.shares;
  if (f.edges) c.edges_path = *f.edges;
  if (f.method) c.method = parse_method(*f.method);
  if (f.communities) c.communities = parse_communities(Json(*f.communities));
  if (f.min_size) c.min_community_size = *f.min_size;
  if (f.tucker_ranks) std::copy_n(f.tucker_ranks->begin(), 3, c.tucker_ranks.begin());
  if (f.cmtf_rank) c.cmtf_rank = *f.cmtf_rank;
  if (f.nmf_rank) c.nmf_rank = *f.nmf_rank;
  if (f.vocab_cap) c.vocab.cap = *f.vocab_cap;
  if (f.unigrams) c.vocab.include_unigrams = *f.unigrams;
  if (f.folds) c.folds = *f.folds;
  if (f.svm_c) c.svm_c = *f.svm_c;
  if (f.svm_epochs) c.svm_epochs = *f.svm_epochs;
  if (f.als_sweeps) c.als_sweeps = *f.als_sweeps;
  if (f.cmtf_iters) c.cmtf_iters = *f.cmtf_iters;
  if (f.neighbors) c.neighbors = *f.neighbors;
  if (f.seed) c.seed = *f.seed;
  if (f.jobs) c.jobs = *f.jobs;
  if (c.jobs < 1) throw std::invalid_argument("--jobs must be at least 1");
  return c;
}

void require_dataset(const RunConfig& c) {
  if (c.news_path.empty() || c.shares_path.empty() || c.edges_path.empty()) {
    throw std::invalid_argument("dataset required: pass --data-dir or --news, --shares and --edges");
  }
}

// ---- output helpers ---------------------------------------------------------

Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

Json mean_std_json(const MeanStd& m) { return {{"mean", number(m.mean)}, {"std", number(m.std)}}; }

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Json header(const std::string& command, const RunConfig& c) {
  Json j;
  j["command"] = command;
  j["seed"] = c.seed;
  j["config"] = config_to_json(c);
  return j;
}

void write_diagnostics(const fs::path& path, const FitReport& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t i = 0; i < r.objective.size(); ++i) {
    Json line{{"iteration", i}, {"objective", number(r.objective[i])}};
    if (i >= 1 && i - 1 < r.orthogonality_error.size()) {
      line["orthogonality_error"] = number(r.orthogonality_error[i - 1]);
    }
    out << line.dump() << '\n';
  }
  out << Json{{"stop", to_string(r.stop)},
              {"iterations", r.iterations},
              {"final_gradient_norm", number(r.final_gradient_norm)}}
             .dump()
      << '\n';
}

Json fit_summary(const Embedding& e) {
  Json j{{"iterations", e.report.iterations}, {"stop", e.stop}};
  if (!e.report.objective.empty()) j["final_objective"] = number(e.report.objective.back());
  return j;
}

std::vector<std::string> news_ids(const Dataset& d) {
  std::vector<std::string> ids;
  for (const auto& n : d.news) ids.push_back(n.id);
  return ids;
}

void write_embeddings_for(const fs::path& dir, const Embedding& e, const std::vector<std::string>& news,
                          const std::vector<std::string>& users) {
  write_embeddings(dir / "news_embeddings.csv", Embeddings{news, e.news});
  if (e.users) write_embeddings(dir / "user_embeddings.csv", Embeddings{users, *e.users});
}

// Rows of `e` reordered to `ids`; every id must be present.
Matrix align_embeddings(const Embeddings& e, const std::vector<std::string>& ids, const std::string& what) {
  std::map<std::string, Eigen::Index> row;
  for (std::size_t r = 0; r < e.ids.size(); ++r) row.emplace(e.ids[r], static_cast<Eigen::Index>(r));
  Matrix out(static_cast<Eigen::Index>(ids.size()), e.values.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = row.find(ids[i]);
    if (it == row.end()) throw DataError("embeddings have no row for " + what + " '" + ids[i] + "'");
    out.row(static_cast<Eigen::Index>(i)) = e.values.row(it->second);
  }
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::vector<std::string> index_ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
}

Json communities_json(const RunConfig& c, const std::vector<std::string>& ids, const FilterResult& fr,
                      double q) {
  Json j = header("communities", c);
  j["num_communities"] = fr.assignment.num_communities;
  j["modularity"] = number(q);
  j["dropped_communities"] = fr.dropped_communities;
  Json groups = Json::array();
  for (const auto& members : fr.assignment.members()) {
    Json m = Json::array();
    for (std::size_t u : members) m.push_back(ids[u]);
    groups.push_back(m);
  }
  j["communities"] = groups;
  j["user_index"] = ids;  // dense node id -> original user id
  Json unassigned = Json::array();
  for (std::size_t u = 0; u < fr.assignment.membership.size(); ++u) {
    if (fr.assignment.membership[u] == kUnassigned) unassigned.push_back(ids[u]);
  }
  j["unassigned"] = unassigned;
  if (fr.warning) j["warning"] = *fr.warning;
  return j;
}

// ---- commands ---------------------------------------------------------------

int cmd_communities(const Flags& f, std::ostream& out, std::ostream& err) {
  RunConfig c = resolve(f);
  if (c.edges_path.empty()) throw std::invalid_argument("--edges or --data-dir is required");
  const LabeledGraph lg = read_edge_list(c.edges_path);
  if (lg.graph.num_edges() == 0) throw DataError("social graph contains no edges");
  const CommunityTarget target = c.communities ? CommunityTarget::exact(*c.communities) : CommunityTarget::automatic();
  const CommunityAssignment found = detect_communities(lg.graph, target);
  const double q = modularity(lg.graph, found);
  const FilterResult fr = filter_small_communities(found, std::max<std::size_t>(c.min_community_size, 1));
  write_json(fs::path(f.out_dir) / "communities.json", communities_json(c, lg.ids, fr, q));
  out << "communities: " << fr.assignment.num_communities << "\nmodularity: " << format_double(q) << '\n';
  if (fr.warning) {
    err << "warning: " << *fr.warning << '\n';
    return kDataError;
  }
  return kOk;
}

int cmd_build_tensor(const Flags& f, std::ostream& out, std::ostream&) {
  RunConfig c = resolve(f);
  require_dataset(c);
  RunConfig with_text = c;
  with_text.method = Method::kCimtDetect;  // always emit the content matrix
  const Prepared p = prepare(with_text);
  const fs::path dir = f.out_dir;
  write_coo(dir / "tensor.coo", p.tensor);
  write_csv(dir / "content.csv", p.content);
  write_lines(dir / "vocab.txt", p.vocab.terms());
  write_lines(dir / "news_ids.txt", news_ids(p.dataset));
  write_lines(dir / "user_ids.txt", p.dataset.user_ids);
  write_json(dir / "communities.json", communities_json(c, p.dataset.user_ids, p.communities, p.modularity));
  Json j = header("build-tensor", c);
  const Dims3& d = p.tensor.dims();
  j["dims"] = {d.i, d.j, d.k};
  j["nnz"] = p.tensor.nnz();
  j["vocab_size"] = p.vocab.size();
  j["num_communities"] = p.communities.assignment.num_communities;
  j["modularity"] = number(p.modularity);
  write_json(dir / "build.json", j);
  out << "tensor " << d.i << "x" << d.j << "x" << d.k << ", nnz " << p.tensor.nnz() << ", vocab "
      << p.vocab.size() << '\n';
  return kOk;
}

int cmd_factorize(const Flags& f, std::ostream& out, std::ostream&) {
  RunConfig c = resolve(f);
  const fs::path dir = f.out_dir;
  Embedding e;
  std::vector<std::string> nids, uids;
  if (f.tensor) {
    Prepared p;
    p.tensor = read_coo(fs::path(*f.tensor));
    const bool needs_content = c.method == Method::kCimtDetect || c.method == Method::kContentNmf ||
                               c.method == Method::kContentNgram;
    if (needs_content) {
      if (!f.content) throw std::invalid_argument("--content is required for method " + to_string(c.method));
      p.content = read_csv(fs::path(*f.content));
    }
    e = embed(p, c);
    nids = f.news_ids ? read_lines(*f.news_ids) : index_ids(static_cast<std::size_t>(e.news.rows()));
    const std::size_t users = p.tensor.dims().j;
    uids = f.user_ids ? read_lines(*f.user_ids) : index_ids(users);
    if (nids.size() != static_cast<std::size_t>(e.news.rows()) || uids.size() != users) {
      throw DataError("id files do not match the tensor dimensions");
    }
  } else {
    require_dataset(c);
    const Prepared p = prepare(c);
    e = embed(p, c);
    nids = news_ids(p.dataset);
    uids = p.dataset.user_ids;
  }
  write_embeddings_for(dir, e, nids, uids);
  write_diagnostics(dir / "diagnostics.jsonl", e.report);
  Json j = header("factorize", c);
  j["method"] = to_string(c.method);
  j["fit"] = fit_summary(e);
  write_json(dir / "factorize.json", j);
  out << to_string(c.method) << ": " << e.report.iterations << " iterations, stop " << e.stop << '\n';
  return kOk;
}

struct SweepPlan {
  std::string parameter;
  std::vector<std::size_t> values;
};

SweepPlan parse_sweep(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || s.substr(0, eq) != "news-dim") {
    throw std::invalid_argument("--sweep expects news-dim=a,b,c");
  }
  SweepPlan plan{"news-dim", {}};
  std::stringstream ss(s.substr(eq + 1));
  for (std::string tok; std::getline(ss, tok, ',');) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || v < 1) throw std::invalid_argument("--sweep value '" + tok + "' is not a positive integer");
    plan.values.push_back(static_cast<std::size_t>(v));
  }
  if (plan.values.empty()) throw std::invalid_argument("--sweep needs at least one value");
  return plan;
}

void set_news_dim(RunConfig& c, std::size_t dim) {
  switch (c.method) {
    case Method::kCitDetect:
      c.tucker_ranks[0] = dim;
      break;
    case Method::kCimtDetect:
      c.cmtf_rank = dim;
      break;
    case Method::kContentNmf:
      c.nmf_rank = dim;
      break;
    case Method::kContentNgram:
      throw std::invalid_argument("content-ngram has no news embedding dimension to sweep");
  }
}

Json detect_metrics(const DetectSummary& s) {
  Json j;
  j["precision"] = mean_std_json(s.precision);
  j["recall"] = mean_std_json(s.recall);
  j["f1"] = mean_std_json(s.f1);
  Json folds = Json::array();
  for (std::size_t k = 0; k < s.folds.size(); ++k) {
    const auto& m = s.folds[k];
    folds.push_back({{"fold", k},
                     {"train", m.train_size},
                     {"test", m.test_size},
                     {"precision", number(m.prf.precision)},
                     {"recall", number(m.prf.recall)},
                     {"f1", number(m.prf.f1)}});
  }
  j["per_fold"] = folds;
  return j;
}

int cmd_detect(const Flags& f, std::ostream& out, std::ostream&) {
  RunConfig c = resolve(f);
  require_dataset(c);
  if (c.folds < 2) throw std::invalid_argument("--folds must be at least 2 for cross-validation");
  const fs::path dir = f.out_dir;
  Json j = header("detect", c);
  j["method"] = to_string(c.method);
  j["folds"] = c.folds;

  if (f.embeddings) {
    if (f.sweep) throw std::invalid_argument("--sweep cannot be combined with --embeddings");
    const Dataset d = load_dataset(c.news_path, c.shares_path, c.edges_path);
    const Matrix x = align_embeddings(read_embeddings(fs::path(*f.embeddings)), news_ids(d), "news");
    const DetectSummary s = cross_validate(x, d.labels(), c);
    j["embeddings"] = *f.embeddings;
    j.update(detect_metrics(s));
    write_json(dir / "metrics.json", j);
    out << "f1 " << format_double(s.f1.mean) << " +- " << format_double(s.f1.std) << '\n';
    return kOk;
  }

  const Prepared p = prepare(c);
  const std::vector<int> labels = p.dataset.labels();
  j["communities"] = {{"count", p.communities.assignment.num_communities}, {"modularity", number(p.modularity)}};
  j["tensor"] = {{"dims", {p.tensor.dims().i, p.tensor.dims().j, p.tensor.dims().k}}, {"nnz", p.tensor.nnz()}};

  if (f.sweep) {
    const SweepPlan plan = parse_sweep(*f.sweep);
    Json rows = Json::array();
    for (std::size_t v : plan.values) {
      RunConfig rc = c;
      set_news_dim(rc, v);
      const Embedding e = embed(p, rc);
      const DetectSummary s = cross_validate(e.news, labels, rc);
      Json row{{"news_dim", v}};
      row.update(detect_metrics(s));
      row["fit"] = fit_summary(e);
      rows.push_back(row);
      out << "news-dim " << v << ": f1 " << format_double(s.f1.mean) << " +- " << format_double(s.f1.std) << '\n';
    }
    j["sweep"] = {{"parameter", plan.parameter}, {"rows", rows}};
    write_json(dir / "metrics.json", j);
    return kOk;
  }

  const Embedding e = embed(p, c);
  const DetectSummary s = cross_validate(e.news, labels, c);
  j.update(detect_metrics(s));
  j["fit"] = fit_summary(e);
  write_json(dir / "metrics.json", j);
  write_embeddings_for(dir, e, news_ids(p.dataset), p.dataset.user_ids);
  write_diagnostics(dir / "diagnostics.jsonl", e.report);
  out << to_string(c.method) << " f1 " << format_double(s.f1.mean) << " +- " << format_double(s.f1.std)
      << " (precision " << format_double(s.precision.mean) << ", recall " << format_double(s.recall.mean)
      << ")\n";
  return kOk;
}

int cmd_cluster_eval(const Flags& f, std::ostream& out, std::ostream&) {
  RunConfig c = resolve(f);
  Matrix x;
  Json j = header("cluster-eval", c);
  if (f.embeddings) {
    x = read_embeddings(fs::path(*f.embeddings)).values;
    j["embeddings"] = *f.embeddings;
  } else {
    require_dataset(c);
    x = embed(prepare(c), c).news;
    j["method"] = to_string(c.method);
  }
  if (x.rows() < 3) throw DataError("cluster evaluation needs at least 3 embedded points");
  const auto rows = cluster_sweep(x, f.k_min, f.k_max, f.runs, c.seed);
  Json by_k = Json::object();
  for (const auto& r : rows) {
    Json runs = Json::array();
    for (const auto& run : r.runs) {
      runs.push_back({{"seed", run.seed},
                      {"silhouette", number(run.silhouette)},
                      {"calinski_harabasz", number(run.calinski_harabasz)}});
    }
    by_k[std::to_string(r.k)] = {{"runs", runs},
                                 {"mean_silhouette", number(r.mean_silhouette)},
                                 {"mean_calinski_harabasz", number(r.mean_calinski_harabasz)}};
    out << "k=" << r.k << " silhouette " << format_double(r.mean_silhouette) << " CH "
        << format_double(r.mean_calinski_harabasz) << '\n';
  }
  j["k"] = by_k;
  write_json(fs::path(f.out_dir) / "cluster_report.json", j);
  return kOk;
}

int cmd_recommend(const Flags& f, std::ostream& out, std::ostream&) {
  RunConfig c = resolve(f);
  require_dataset(c);
  Json j = header("recommend", c);
  Matrix users;
  Dataset d;
  if (f.embeddings) {
    d = load_dataset(c.news_path, c.shares_path, c.edges_path);
    users = align_embeddings(read_embeddings(fs::path(*f.embeddings)), d.user_ids, "user");
    j["embeddings"] = *f.embeddings;
  } else {
    Prepared p = prepare(c);
    Embedding e = embed(p, c);
    if (!e.users) throw DataError("method " + to_string(c.method) + " produces no user embeddings");
    users = std::move(*e.users);
    d = std::move(p.dataset);
    j["method"] = to_string(c.method);
  }
  const RecommendationReport rep = evaluate_recommendations(users, news_user_matrix(d), c.neighbors);
  j["neighbors"] = c.neighbors;
  j["users_evaluated"] = rep.users.size();
  j["mean_p_at_1"] = number(rep.mean_p_at_1);
  j["mean_p_at_5"] = number(rep.mean_p_at_5);
  Json per_user = Json::array();
  for (const auto& r : rep.users) {
    Json rec = Json::array();
    for (std::size_t n : r.recommended) rec.push_back(d.news[n].id);
    per_user.push_back({{"user", d.user_ids[r.user]},
                        {"recommended", rec},
                        {"p_at_1", number(r.p_at_1)},
                        {"p_at_5", number(r.p_at_5)}});
  }
  j["users"] = per_user;
  write_json(fs::path(f.out_dir) / "recommend_report.json", j);
  out << "P@1 " << format_double(rep.mean_p_at_1) << ", P@5 " << format_double(rep.mean_p_at_5) << " over "
      << rep.users.size() << " users\n";
  return kOk;
}

int cmd_gen_synthetic(const Flags& f, std::ostream& out, std::ostream&) {
  SyntheticOptions o = f.synthetic;
  o.seed = f.seed.value_or(0);
  const SyntheticData d = gen_synthetic(o);
  write_synthetic(d, f.out_dir);
  Json j;
  j["command"] = "gen-synthetic";
  j["seed"] = o.seed;
  j["options"] = {{"num_news", o.num_news},       {"num_users", o.num_users},
                  {"num_communities", o.num_communities}, {"base_rate", o.base_rate},
                  {"fake_boost", o.fake_boost},   {"real_boost", o.real_boost},
                  {"intra_degree", o.intra_degree}, {"bridges", o.bridges},
                  {"words_per_doc", o.words_per_doc}};
  j["edges"] = d.edges.size();
  j["shares"] = d.shares.size();
  write_json(fs::path(f.out_dir) / "synthetic.json", j);
  out << "wrote " << d.news.size() << " news, " << d.user_ids.size() << " users, " << d.edges.size()
      << " edges, " << d.shares.size() << " shares to " << f.out_dir << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Echo-chamber aware fake news detection via coupled tensor factorization", "echotensor"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", f.seed, "Master random seed");
  app.add_option("--config", f.config, "JSON run configuration (flags override it)");
  app.add_option("--out-dir", f.out_dir, "Directory for output artifacts");
  app.add_option("--jobs", f.jobs, "Parallel cross-validation folds");

  auto* communities = app.add_subcommand("communities", "Detect and filter user communities");
  communities->add_option("--edges", f.edges, "Social graph edge list TSV");
  communities->add_option("--data-dir", f.data_dir, "Directory holding edges.tsv");
  add_community_flags(communities, f);

  auto* build = app.add_subcommand("build-tensor", "Assemble the news-user-community tensor and content matrix");
  add_dataset_flags(build, f);
  add_community_flags(build, f);
  build->add_option("--vocab-cap", f.vocab_cap, "Maximum vocabulary size");
  build->add_option("--unigrams", f.unigrams, "Let unigrams compete with bigrams (true/false)");

  auto* factorize = app.add_subcommand("factorize", "Compute news and user embeddings");
  add_dataset_flags(factorize, f);
  add_model_flags(factorize, f);
  factorize->add_option("--tensor", f.tensor, "COO tensor written by build-tensor");
  factorize->add_option("--content", f.content, "Content matrix CSV written by build-tensor");
  factorize->add_option("--news-ids", f.news_ids, "News ids, one per line");
  factorize->add_option("--user-ids", f.user_ids, "User ids, one per line");

  auto* detect = app.add_subcommand("detect", "Cross-validated fake news classification");
  add_dataset_flags(detect, f);
  add_model_flags(detect, f);
  detect->add_option("--folds", f.folds, "Cross-validation folds (>= 2)");
  detect->add_option("--svm-c", f.svm_c, "Linear SVM regularization constant");
  detect->add_option("--svm-epochs", f.svm_epochs, "Linear SVM epochs");
  detect->add_option("--sweep", f.sweep, "Parameter sweep, e.g. news-dim=5,10,20");
  detect->add_option("--embeddings", f.embeddings, "Precomputed news embeddings CSV");

  auto* cluster = app.add_subcommand("cluster-eval", "K-means cohort analysis of news embeddings");
  add_dataset_flags(cluster, f);
  add_model_flags(cluster, f);
  cluster->add_option("--embeddings", f.embeddings, "Precomputed embeddings CSV");
  cluster->add_option("--k-min", f.k_min, "Smallest k")->capture_default_str();
  cluster->add_option("--k-max", f.k_max, "Largest k")->capture_default_str();
  cluster->add_option("--runs", f.runs, "Seeded runs per k")->capture_default_str();

  auto* rec = app.add_subcommand("recommend", "Neighbor-based news recommendation with Precision@k");
  add_dataset_flags(rec, f);
  add_model_flags(rec, f);
  rec->add_option("--embeddings", f.embeddings, "Precomputed user embeddings CSV");
  rec->add_option("--neighbors", f.neighbors, "Neighborhood size");

  auto* gen = app.add_subcommand("gen-synthetic", "Write a planted echo-chamber dataset");
  gen->add_option("--num-news", f.synthetic.num_news)->capture_default_str();
  gen->add_option("--num-users", f.synthetic.num_users)->capture_default_str();
  gen->add_option("--num-communities", f.synthetic.num_communities)->capture_default_str();
  gen->add_option("--base-rate", f.synthetic.base_rate)->capture_default_str();
  gen->add_option("--fake-boost", f.synthetic.fake_boost)->capture_default_str();
  gen->add_option("--real-boost", f.synthetic.real_boost)->capture_default_str();
  gen->add_option("--bridges", f.synthetic.bridges)->capture_default_str();

  std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    fs::create_directories(f.out_dir);
    if (*communities) return cmd_communities(f, out, err);
    if (*build) return cmd_build_tensor(f, out, err);
    if (*factorize) return cmd_factorize(f, out, err);
    if (*detect) return cmd_detect(f, out, err);
    if (*cluster) return cmd_cluster_eval(f, out, err);
    if (*rec) return cmd_recommend(f, out, err);
    if (*gen) return cmd_gen_synthetic(f, out, err);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace echotensor::cli
