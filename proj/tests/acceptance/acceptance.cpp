// Acceptance runner: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any required criterion fails.
//
//   echotensor_acceptance --cli <path to echotensor> --work-dir <scratch dir>
//
// The optional real-data check reads ECHOTENSOR_FAKENEWSNET_DIR, which must
// hold buzzfeed/ and politifact/ subdirectories in the news.jsonl /
// shares.tsv / edges.tsv layout.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <json.hpp>

#include "echotensor/assembly.hpp"
#include "echotensor/evaluate.hpp"
#include "echotensor/factorization.hpp"
#include "echotensor/graph.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace echotensor;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  enum Status { kPass, kFail, kSkip } status = kFail;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)}; }

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

bool non_increasing(const std::vector<double>& obj, double rel_slack) {
  for (std::size_t s = 1; s < obj.size(); ++s) {
    if (obj[s] > obj[s - 1] * (1 + rel_slack)) return false;
  }
  return true;
}

// ---- 1 ----------------------------------------------------------------------------

Outcome gradient_check() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const SparseTensor3 t = testing::random_tensor({4, 3, 2}, rng);
    const Matrix m = testing::random_matrix(4, 5, rng);
    const CmtfFactors f{testing::random_matrix(4, 2, rng), testing::random_matrix(3, 2, rng),
                        testing::random_matrix(2, 2, rng), testing::random_matrix(5, 2, rng)};
    worst = std::max(worst, grad_check(t, m, f, 1e-6));
  }
  const double secs = seconds_since(t0);
  return pass_if(worst < 1e-5 && secs < 5.0,
                 "20 instances, max relative error " + fmt(worst) + " (< 1e-5), " + fmt(secs) + " s (< 5 s)");
}

// ---- 2 ----------------------------------------------------------------------------

Outcome cp_recovery() {
  std::mt19937_64 rng(2002);
  const DenseTensor3 truth = reconstruct_cp(testing::random_matrix(20, 3, rng), testing::random_matrix(15, 3, rng),
                                            testing::random_matrix(10, 3, rng));
  const SparseTensor3 t = SparseTensor3::from_dense(truth);
  OptimOptions opts;
  opts.max_iters = 200;
  const auto fit = cp_als(t, 3, opts);
  const double f = cp_fit(t, fit.factors);
  const bool mono = non_increasing(fit.report.objective, 1e-12);
  return pass_if(f >= 0.999 && fit.report.iterations <= 200 && mono,
                 "fit " + fmt(f) + " (>= 0.999) after " + std::to_string(fit.report.iterations) +
                     " sweeps; objective non-increasing: " + (mono ? "yes" : "no"));
}

// ---- 3 ----------------------------------------------------------------------------

Outcome tucker_exactness() {
  std::mt19937_64 rng(3003);
  const SparseTensor3 t = testing::random_tensor({6, 5, 4}, rng);
  OptimOptions opts;
  opts.tol_rel_change = 0.0;
  opts.max_iters = 10;
  const auto fit = tucker_als(t, {6, 5, 4}, opts);
  const double rel = tucker_residual_norm(t, fit.factors) / frobenius_norm(t);
  double worst_orth = 0.0;
  for (double e : fit.report.orthogonality_error) worst_orth = std::max(worst_orth, e);
  const bool every_sweep = fit.report.orthogonality_error.size() == static_cast<std::size_t>(fit.report.iterations);
  return pass_if(rel <= 1e-10 && worst_orth <= 1e-10 && every_sweep,
                 "relative error " + fmt(rel) + " (<= 1e-10); worst orthogonality over " +
                     std::to_string(fit.report.iterations) + " sweeps " + fmt(worst_orth) + " (<= 1e-10)");
}

// ---- 4 ----------------------------------------------------------------------------

Outcome cmtf_recovery() {
  std::mt19937_64 rng(4004);
  const Matrix u = testing::random_matrix(20, 3, rng), v = testing::random_matrix(15, 3, rng),
               w = testing::random_matrix(6, 3, rng), b = testing::random_matrix(30, 3, rng);
  const SparseTensor3 t = SparseTensor3::from_dense(reconstruct_cp(u, v, w));
  const Matrix m = u * b.transpose();
  OptimOptions opts;
  opts.max_iters = 500;
  const auto fit = cmtf_fit(t, m, 3, opts);
  const double scale = std::pow(frobenius_norm(t), 2) + m.squaredNorm();
  const double obj = fit.report.objective.back();
  return pass_if(obj <= 1e-6 * scale && fit.report.iterations <= 500,
                 "objective " + fmt(obj) + " <= " + fmt(1e-6 * scale) + " after " +
                     std::to_string(fit.report.iterations) + " iterations (stop: " + to_string(fit.report.stop) + ")");
}

// ---- 5 ----------------------------------------------------------------------------

Outcome assembly_oracle() {
  std::mt19937_64 rng(5005);
  std::size_t mismatches = 0;
  std::size_t entries = 0;
  for (int pair = 0; pair < 50; ++pair) {
    const auto n_rows = static_cast<Eigen::Index>(3 + rng() % 8);
    const auto n_users = static_cast<Eigen::Index>(2 + rng() % 9);
    const auto n_comm = static_cast<Eigen::Index>(1 + rng() % 4);
    Matrix n = Matrix::Zero(n_rows, n_users);
    for (Eigen::Index i = 0; i < n_rows; ++i) {
      for (Eigen::Index j = 0; j < n_users; ++j) {
        if (rng() % 3 == 0) n(i, j) = static_cast<double>(1 + rng() % 6);
      }
    }
    Matrix c = Matrix::Zero(n_users, n_comm);
    for (Eigen::Index j = 0; j < n_users; ++j) {
      const auto k = static_cast<Eigen::Index>(rng() % (n_comm + 1));  // k == n_comm: unassigned
      if (k < n_comm) c(j, k) = 1;
    }
    const SparseTensor3 t = build_tensor(n, c);
    const DenseTensor3 dense = t.to_dense();
    std::size_t nnz = 0;
    for (Eigen::Index i = 0; i < n_rows; ++i) {
      for (Eigen::Index j = 0; j < n_users; ++j) {
        for (Eigen::Index k = 0; k < n_comm; ++k) {
          const double want = n(i, j) * c(j, k);
          nnz += want != 0.0;
          ++entries;
          if (dense(i, j, k) != want) ++mismatches;
        }
      }
    }
    if (t.nnz() != nnz) ++mismatches;
  }
  return pass_if(mismatches == 0,
                 "50 pairs, " + std::to_string(entries) + " entries, " + std::to_string(mismatches) + " mismatches");
}

// ---- 6 ----------------------------------------------------------------------------

Outcome community_detection() {
  const UndirectedGraph g = testing::two_triangles();
  const CommunityAssignment a = detect_communities(g, CommunityTarget::automatic());
  const double q = modularity(g, a);
  const bool triangles = a.membership == std::vector<int>{0, 0, 0, 1, 1, 1};
  std::size_t graphs = 0;
  std::size_t bad = 0;
  for (const UndirectedGraph& fg : testing::small_connected_fixtures()) {
    ++graphs;
    const testing::Replay r = testing::replay_dendrogram(fg, girvan_newman(fg));
    const CommunityAssignment fa = detect_communities(fg, CommunityTarget::automatic());
    const double best = r.modularity[r.best_level];
    if (!r.removals_match || std::abs(modularity(fg, fa) - best) > 1e-12) ++bad;
  }
  return pass_if(triangles && std::abs(q - 0.357142857) <= 1e-9 && bad == 0,
                 std::string("two triangles recovered: ") + (triangles ? "yes" : "no") + ", Q " + fmt(q) +
                     "; replay oracle disagreements " + std::to_string(bad) + "/" + std::to_string(graphs));
}

// ---- 7 ----------------------------------------------------------------------------

Outcome metric_oracles() {
  std::mt19937_64 rng(7007);
  double worst_sil = 0.0;
  double worst_ch = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = testing::random_matrix(50, 3, rng);
    std::vector<int> a(50);
    for (int i = 0; i < 50; ++i) a[i] = i % (2 + trial);
    std::shuffle(a.begin(), a.end(), rng);
    worst_sil = std::max(worst_sil, std::abs(silhouette(x, a) - testing::silhouette_oracle(x, a)));
    worst_ch = std::max(worst_ch, std::abs(calinski_harabasz(x, a) - testing::ch_oracle(x, a)));
  }
  Matrix line(4, 1);
  line << 0, 0.1, 10, 10.1;
  const std::vector<int> natural = {0, 0, 1, 1};
  const double sil = silhouette(line, natural);
  const double ch = calinski_harabasz(line, natural);
  // Per-point values are 1 - 0.1/10.05 (outer) and 1 - 0.1/9.95 (inner).
  // The hand value 0.99003 quoted alongside this fixture is an arithmetic
  // slip: the mean is 0.98999975, which is what gets asserted.
  const double derived = 0.5 * (1 - 0.1 / 10.05) + 0.5 * (1 - 0.1 / 9.95);
  const bool fixture = std::abs(sil - derived) <= 1e-12 && std::abs(ch - 20000.0) <= 1e-9 * 20000.0;
  return pass_if(worst_sil <= 1e-9 && worst_ch <= 1e-9 && fixture,
                 "oracle gaps silhouette " + fmt(worst_sil) + ", CH " + fmt(worst_ch) + " (<= 1e-9); 1D fixture silhouette " +
                     fmt(sil, 10) + " (derived 0.98999975, hand value 0.99003 is a slip), CH " + fmt(ch));
}

// ---- CLI-driven criteria -------------------------------------------------------------

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

int run_cli(const fs::path& cli, const std::vector<std::string>& args, const fs::path& log) {
  std::string cmd = quote(cli.string());
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " > " + quote(log.string()) + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct EndToEnd {
  Outcome detection;
  Outcome determinism;
};

EndToEnd planted_signal(const fs::path& cli, const fs::path& work) {
  EndToEnd r;
  const fs::path data = work / "synthetic";
  const fs::path run = work / "detect";
  fs::remove_all(work);
  fs::create_directories(work);
  if (run_cli(cli, {"--seed", "7", "--out-dir", data.string(), "gen-synthetic", "--num-news", "200", "--num-users",
                    "400", "--num-communities", "2", "--fake-boost", "5"},
              work / "gen.log") != 0) {
    r.detection = {Outcome::kFail, "gen-synthetic failed: " + slurp(work / "gen.log")};
    r.determinism = {Outcome::kFail, "no data"};
    return r;
  }
  const std::vector<std::string> detect = {"--seed", "7", "--out-dir", run.string(), "detect", "--data-dir",
                                           data.string(), "--method", "cimtdetect", "--folds", "5"};
  const auto t0 = Clock::now();
  const int rc = run_cli(cli, detect, work / "detect.log");
  const double secs = seconds_since(t0);
  if (rc != 0) {
    r.detection = {Outcome::kFail, "detect exited " + std::to_string(rc) + ": " + slurp(work / "detect.log")};
    r.determinism = {Outcome::kFail, "no first run"};
    return r;
  }
  const std::string first = slurp(run / "metrics.json");
  const double f1 = nlohmann::json::parse(first)["f1"]["mean"].get<double>();
  r.detection = pass_if(f1 >= 0.9 && secs < 60.0, "mean F1 " + fmt(f1) + " (>= 0.9), " + fmt(secs) + " s (< 60 s)");

  const int rc2 = run_cli(cli, detect, work / "detect2.log");
  const std::string second = slurp(run / "metrics.json");
  r.determinism = pass_if(rc2 == 0 && first == second,
                          "repeat run metrics.json " + std::string(first == second ? "byte-identical" : "differs") + " (" +
                              std::to_string(first.size()) + " bytes)");
  return r;
}

// ---- 10 (optional) ---------------------------------------------------------------------

struct RealDataset {
  std::string name;
  std::size_t news;
  std::size_t users;
  int communities;
  int cmtf_rank;
  double f1_mean;
  double f1_std;
};

Outcome real_data(const fs::path& cli, const fs::path& work) {
  const char* root = std::getenv("ECHOTENSOR_FAKENEWSNET_DIR");
  if (!root || !fs::exists(fs::path(root) / "buzzfeed" / "news.jsonl") ||
      !fs::exists(fs::path(root) / "politifact" / "news.jsonl")) {
    return {Outcome::kSkip, "ECHOTENSOR_FAKENEWSNET_DIR not set or dataset files absent"};
  }
  const std::vector<RealDataset> sets = {{"buzzfeed", 182, 15257, 16, 45, 0.813, 0.078},
                                         {"politifact", 240, 23865, 81, 75, 0.818, 0.069}};
  bool ok = true;
  std::string detail;
  for (const auto& s : sets) {
    const fs::path data = fs::path(root) / s.name;
    const fs::path out = work / ("real_" + s.name);
    const int rc = run_cli(cli,
                           {"--seed", "0", "--out-dir", out.string(), "detect", "--data-dir", data.string(), "--method",
                            "cimtdetect", "--folds", "5", "--communities", std::to_string(s.communities), "--min-size",
                            "5", "--cmtf-rank", std::to_string(s.cmtf_rank)},
                           work / ("real_" + s.name + ".log"));
    if (rc != 0) {
      ok = false;
      detail += s.name + ": detect exited " + std::to_string(rc) + "; ";
      continue;
    }
    const auto j = nlohmann::json::parse(slurp(out / "metrics.json"));
    const double f1 = j["f1"]["mean"].get<double>();
    const double lo = s.f1_mean - 2 * s.f1_std, hi = s.f1_mean + 2 * s.f1_std;
    const bool in_band = f1 >= lo && f1 <= hi;
    ok = ok && in_band;
    detail += s.name + ": " + std::to_string(j["tensor"]["dims"][0].get<std::size_t>()) + " news (expected " +
              std::to_string(s.news) + "), F1 " + fmt(f1) + " in [" + fmt(lo) + ", " + fmt(hi) + "]: " +
              (in_band ? "yes" : "no") + "; ";
  }
  return pass_if(ok, detail + "informational, does not affect exit status");
}

}  // namespace

int main(int argc, char** argv) {
  fs::path cli;
  fs::path work = fs::temp_directory_path() / "echotensor_acceptance";
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") cli = argv[i + 1];
    else if (flag == "--work-dir") work = argv[i + 1];
  }
  if (cli.empty() || !fs::exists(cli)) {
    std::cerr << "usage: echotensor_acceptance --cli <echotensor binary> [--work-dir <dir>]\n";
    return 2;
  }

  int failures = 0;
  auto report = [&](int id, const std::string& name, const Outcome& o, bool required = true) {
    const char* tag = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kSkip ? "SKIP" : "FAIL";
    std::cout << tag << "  [" << id << "] " << name << ": " << o.detail << std::endl;
    if (required && o.status == Outcome::kFail) ++failures;
  };
  auto guarded = [](auto&& fn) -> Outcome {
    try {
      return fn();
    } catch (const std::exception& e) {
      return {Outcome::kFail, std::string("exception: ") + e.what()};
    }
  };

  report(1, "CMTF gradient vs central differences", guarded(gradient_check));
  report(2, "CP-ALS exact rank-3 recovery", guarded(cp_recovery));
  report(3, "Tucker full-rank exactness and orthogonality", guarded(tucker_exactness));
  report(4, "CMTF coupled recovery", guarded(cmtf_recovery));
  report(5, "tensor assembly vs triple loop", guarded(assembly_oracle));
  report(6, "Girvan-Newman communities and replay oracle", guarded(community_detection));
  report(7, "silhouette and Calinski-Harabasz oracles", guarded(metric_oracles));
  EndToEnd e2e;
  try {
    e2e = planted_signal(cli, work);
  } catch (const std::exception& ex) {
    e2e.detection = e2e.determinism = {Outcome::kFail, std::string("exception: ") + ex.what()};
  }
  report(8, "planted echo-chamber detection via CLI", e2e.detection);
  report(9, "repeat run determinism", e2e.determinism);
  report(10, "FakeNewsNet F1 band (optional)", guarded([&] { return real_data(cli, work); }), false);

  std::cout << (failures == 0 ? "all required criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
