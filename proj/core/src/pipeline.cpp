#include "echotensor/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "echotensor/error.hpp"

namespace echotensor {

std::string to_string(Method m) {
  switch (m) {
    case Method::kCitDetect:
      return "citdetect";
    case Method::kCimtDetect:
      return "cimtdetect";
    case Method::kContentNmf:
      return "content-nmf";
    case Method::kContentNgram:
      return "content-ngram";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::kCitDetect, Method::kCimtDetect, Method::kContentNmf, Method::kContentNgram}) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected citdetect, cimtdetect, content-nmf or content-ngram)");
}

Prepared prepare(const RunConfig& cfg) {
  return prepare(load_dataset(cfg.news_path, cfg.shares_path, cfg.edges_path), cfg);
}

Prepared prepare(Dataset dataset, const RunConfig& cfg) {
  Prepared p;
  p.dataset = std::move(dataset);
  const Dataset& d = p.dataset;
  if (d.num_news() == 0) throw DataError("dataset contains no news");
  if (d.graph.num_edges() == 0) throw DataError("social graph contains no edges");

  const CommunityTarget target =
      cfg.communities ? CommunityTarget::exact(*cfg.communities) : CommunityTarget::automatic();
  const CommunityAssignment found = detect_communities(d.graph, target);
  p.modularity = modularity(d.graph, found);
  p.communities = filter_small_communities(found, std::max<std::size_t>(cfg.min_community_size, 1));
  if (p.communities.assignment.num_communities == 0) {
    throw DataError(p.communities.warning.value_or("no community survived filtering"));
  }

  p.news_user = news_user_matrix(d);
  p.user_community = community_matrix(p.communities.assignment, d.num_users());
  p.tensor = build_tensor(p.news_user, p.user_community);

  if (cfg.method == Method::kCimtDetect || cfg.method == Method::kContentNmf ||
      cfg.method == Method::kContentNgram) {
    const Corpus corpus = make_corpus(d, default_stopwords());
    p.vocab = build_vocab(corpus, cfg.vocab);
    if (p.vocab.empty()) throw DataError("vocabulary is empty after preprocessing");
    p.content = count_matrix(corpus, p.vocab);
  }
  return p;
}

Ranks3 effective_tucker_ranks(const RunConfig& cfg, const Dims3& dims) {
  Ranks3 r = cfg.tucker_ranks;
  for (int m = 1; m <= 3; ++m) {
    auto& x = r[static_cast<std::size_t>(m - 1)];
    x = std::clamp<std::size_t>(x, 1, std::max<std::size_t>(dims[m], 1));
  }
  return r;
}

Embedding embed(const Prepared& p, const RunConfig& cfg) {
  Embedding e;
  OptimOptions opts;
  opts.seed = cfg.seed;
  switch (cfg.method) {
    case Method::kCitDetect: {
      opts.max_iters = cfg.als_sweeps;
      auto fit = tucker_als(p.tensor, effective_tucker_ranks(cfg, p.tensor.dims()), opts);
      e.news = extract_embeddings(fit.factors, Entity::kNews);
      e.users = extract_embeddings(fit.factors, Entity::kUser);
      e.report = std::move(fit.report);
      break;
    }
    case Method::kCimtDetect: {
      opts.max_iters = cfg.cmtf_iters;
      auto fit = cmtf_fit(p.tensor, p.content, cfg.cmtf_rank, opts);
      e.news = extract_embeddings(fit.factors, Entity::kNews);
      e.users = extract_embeddings(fit.factors, Entity::kUser);
      e.report = std::move(fit.report);
      break;
    }
    case Method::kContentNmf: {
      opts.max_iters = cfg.cmtf_iters;
      auto fit = nmf(p.content, cfg.nmf_rank, opts);
      e.news = std::move(fit.factors.w);
      e.report = std::move(fit.report);
      break;
    }
    case Method::kContentNgram:
      e.news = p.content;
      e.report.stop = StopReason::kExactFit;
      break;
  }
  e.stop = to_string(e.report.stop);
  for (Eigen::Index i = 0; i < e.news.size(); ++i) {
    if (!std::isfinite(e.news.data()[i])) throw NumericalError("news embedding contains non-finite values");
  }
  return e;
}

MeanStd mean_std(std::span<const double> xs) {
  MeanStd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(var / static_cast<double>(xs.size()));
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

Matrix take_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

std::vector<int> take(std::span<const int> y, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(y[r]);
  return out;
}

}  // namespace

DetectSummary cross_validate(const Matrix& features, std::span<const int> labels,
                             const RunConfig& cfg) {
  if (cfg.folds < 2) throw std::invalid_argument("cross-validation requires at least 2 folds");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw std::invalid_argument("feature rows and labels differ in count");
  }
  const FoldSplit split =
      cfg.stratify ? kfold(labels.size(), cfg.folds, cfg.seed, labels) : kfold(labels.size(), cfg.folds, cfg.seed);

  DetectSummary s;
  s.folds.resize(static_cast<std::size_t>(cfg.folds));
  auto run_fold = [&](int f) {
    const auto test = split.folds[static_cast<std::size_t>(f)];
    const auto train = split.train_indices(f);
    const std::vector<int> ytrain = take(labels, train);
    if (std::count(ytrain.begin(), ytrain.end(), 1) == 0 || std::count(ytrain.begin(), ytrain.end(), 0) == 0) {
      throw DataError("training fold " + std::to_string(f) + " contains a single class");
    }
    const Matrix xtrain = take_rows(features, train);
    const Standardizer z = Standardizer::fit(xtrain);
    SvmOptions svm;
    svm.c = cfg.svm_c;
    svm.epochs = cfg.svm_epochs;
    svm.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(f));
    const LinearModel m = train_linear(z.apply(xtrain), ytrain, svm);
    const std::vector<int> pred = predict(m, z.apply(take_rows(features, test)));
    auto& out = s.folds[static_cast<std::size_t>(f)];
    out.prf = prf1(take(labels, test), pred);
    out.train_size = train.size();
    out.test_size = test.size();
  };

  const int jobs = std::clamp(cfg.jobs, 1, cfg.folds);
  if (jobs == 1) {
    for (int f = 0; f < cfg.folds; ++f) run_fold(f);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.folds));
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        for (int f = w; f < cfg.folds; f += jobs) {
          try {
            run_fold(f);
          } catch (...) {
            errors[static_cast<std::size_t>(f)] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<double> p, r, f1;
  for (const auto& f : s.folds) {
    p.push_back(f.prf.precision);
    r.push_back(f.prf.recall);
    f1.push_back(f.prf.f1);
  }
  s.precision = mean_std(p);
  s.recall = mean_std(r);
  s.f1 = mean_std(f1);
  return s;
}

std::vector<ClusterSweepRow> cluster_sweep(const Matrix& x, int k_min, int k_max, int runs,
                                           std::uint64_t seed) {
  if (k_min < 2) throw std::invalid_argument("cluster sweep starts at k >= 2");
  if (runs < 1) throw std::invalid_argument("cluster sweep needs at least one run");
  k_max = std::min<int>(k_max, static_cast<int>(x.rows()) - 1);
  std::vector<ClusterSweepRow> rows;
  for (int k = k_min; k <= k_max; ++k) {
    ClusterSweepRow row;
    row.k = k;
    for (int r = 0; r < runs; ++r) {
      ClusterRun run;
      run.seed = derive_seed(seed, static_cast<std::uint64_t>(k) * 1000 + static_cast<std::uint64_t>(r));
      const ClusterResult c = kmeans(x, k, run.seed);
      run.silhouette = silhouette(x, c.assignment);
      run.calinski_harabasz = calinski_harabasz(x, c.assignment);
      row.mean_silhouette += run.silhouette / runs;
      row.mean_calinski_harabasz += run.calinski_harabasz / runs;
      row.runs.push_back(run);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

RecommendationReport evaluate_recommendations(const Matrix& user_embeddings,
                                              const Matrix& news_user,
                                              std::size_t num_neighbors) {
  if (news_user.cols() != user_embeddings.rows()) {
    throw std::invalid_argument("user embeddings must have one row per user");
  }
  RecommendationReport rep;
  for (Eigen::Index u = 0; u < user_embeddings.rows(); ++u) {
    std::unordered_set<std::size_t> gold;
    for (Eigen::Index n = 0; n < news_user.rows(); ++n) {
      if (news_user(n, u) > 0.0) gold.insert(static_cast<std::size_t>(n));
    }
    if (gold.empty()) continue;
    UserRecommendation r;
    r.user = static_cast<std::size_t>(u);
    r.recommended = recommend(user_embeddings, r.user, news_user, num_neighbors, 5);
    r.p_at_1 = precision_at_k(r.recommended, gold, 1);
    r.p_at_5 = precision_at_k(r.recommended, gold, 5);
    rep.mean_p_at_1 += r.p_at_1;
    rep.mean_p_at_5 += r.p_at_5;
    rep.users.push_back(std::move(r));
  }
  if (!rep.users.empty()) {
    rep.mean_p_at_1 /= static_cast<double>(rep.users.size());
    rep.mean_p_at_5 /= static_cast<double>(rep.users.size());
  }
  return rep;
}

}  // namespace echotensor
