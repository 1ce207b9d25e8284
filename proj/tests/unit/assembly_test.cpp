#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "echotensor/assembly.hpp"
#include "echotensor/error.hpp"
#include "helpers.hpp"

namespace echotensor {
namespace {

Dataset small_dataset(const std::string& shares) {
  std::istringstream news(R"({"id": "n0", "text": "alpha beta", "label": 1}
{"id": "n1", "text": "gamma delta", "label": 0}
)");
  std::istringstream sh(shares);
  std::istringstream edges("u0\tu1\nu2\n");
  return load_dataset(news, sh, edges);
}

TEST(LoadDataset, Cardinalities) {
  const Dataset d = small_dataset("n0\tu0\t1\nn1\tu2\t2\n");
  EXPECT_EQ(d.num_news(), 2u);
  EXPECT_EQ(d.num_users(), 3u);
  EXPECT_EQ(d.shares.size(), 2u);
  EXPECT_EQ(d.graph.num_edges(), 1u);
  EXPECT_EQ(d.labels(), (std::vector<int>{1, 0}));
  EXPECT_EQ(d.user_index.at("u2"), 2u);
}

TEST(LoadDataset, ErrorsNameTheLine) {
  try {
    small_dataset("n0\tu0\t1\nn1\tghost\t1\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(small_dataset("n0\tu0\t1\nn0\tu0\t2\n"), DataError);
  EXPECT_THROW(small_dataset("n0\tu0\t0\n"), DataError);
  EXPECT_THROW(small_dataset("n9\tu0\t1\n"), DataError);
  std::istringstream bad_news("{\"id\": \"n0\", \"text\": \"x\", \"label\": 2}\n");
  EXPECT_THROW(read_news_jsonl(bad_news), DataError);
}

TEST(LoadDataset, EmptySharesGiveZeroMatrix) {
  const Dataset d = small_dataset("");
  const Matrix n = news_user_matrix(d);
  EXPECT_EQ(n.rows(), 2);
  EXPECT_EQ(n.cols(), 3);
  EXPECT_EQ(n.squaredNorm(), 0.0);
}

TEST(NewsUserMatrix, SingleShare) {
  const Matrix n = news_user_matrix(small_dataset("n0\tu0\t3\n"));
  EXPECT_EQ(n(0, 0), 3.0);
  EXPECT_EQ(n.sum(), 3.0);
}

TEST(NewsUserMatrix, MatchesRecordAccumulation) {
  std::mt19937_64 rng(12);
  Dataset d;
  for (int i = 0; i < 6; ++i) d.news.push_back({"n" + std::to_string(i), "", i % 2});
  for (int j = 0; j < 5; ++j) d.user_ids.push_back("u" + std::to_string(j));
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (rng() % 3 == 0) d.shares.push_back({i, j, 1 + rng() % 4});
    }
  }
  Matrix want = Matrix::Zero(6, 5);
  for (const ShareRecord& s : d.shares) want(s.news, s.user) += static_cast<double>(s.count);
  EXPECT_EQ(news_user_matrix(d), want);
}

TEST(BuildTensor, Examples) {
  Matrix n = Matrix::Zero(2, 2);
  n(0, 1) = 2;
  n(1, 0) = 4;
  Matrix c = Matrix::Zero(2, 2);
  c(1, 0) = 1;  // user 0 unassigned
  const SparseTensor3 t = build_tensor(n, c);
  EXPECT_EQ(t.dims(), (Dims3{2, 2, 2}));
  ASSERT_EQ(t.nnz(), 1u);
  EXPECT_EQ(t.entries()[0].i, 0u);
  EXPECT_EQ(t.entries()[0].j, 1u);
  EXPECT_EQ(t.entries()[0].k, 0u);
  EXPECT_EQ(t.entries()[0].value, 2.0);
  EXPECT_THROW(build_tensor(n, Matrix::Zero(3, 2)), std::invalid_argument);
}

TEST(BuildTensor, MatchesTripleLoopAndInvariants) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix n = Matrix::Zero(5, 4);
    for (Eigen::Index i = 0; i < 5; ++i) {
      for (Eigen::Index j = 0; j < 4; ++j) {
        if (rng() % 2) n(i, j) = static_cast<double>(1 + rng() % 5);
      }
    }
    Matrix c = Matrix::Zero(4, 3);
    for (Eigen::Index j = 0; j < 4; ++j) {
      const auto k = static_cast<Eigen::Index>(rng() % 4);
      if (k < 3) c(j, k) = 1;
    }
    const DenseTensor3 dense = build_tensor(n, c).to_dense();
    std::size_t expected_nnz = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        for (std::size_t k = 0; k < 3; ++k) {
          const double v = n(i, j) * c(j, k);
          EXPECT_EQ(dense(i, j, k), v);
          expected_nnz += v != 0.0;
        }
      }
    }
    EXPECT_EQ(build_tensor(n, c).nnz(), expected_nnz);
    // Mode-1 row sums equal N row sums over assigned users.
    const Matrix t1 = matricize(build_tensor(n, c), 1);
    const Matrix assigned_n = n * c.rowwise().sum().asDiagonal();
    for (Eigen::Index i = 0; i < 5; ++i) EXPECT_EQ(t1.row(i).sum(), assigned_n.row(i).sum());
  }
}

TEST(LoadDataset, ShareOrderDoesNotChangeTensor) {
  const Dataset a = small_dataset("n0\tu0\t1\nn1\tu2\t2\nn0\tu1\t1\n");
  const Dataset b = small_dataset("n0\tu1\t1\nn0\tu0\t1\nn1\tu2\t2\n");
  const Matrix c = Matrix::Identity(3, 3);
  EXPECT_EQ(build_tensor(news_user_matrix(a), c).entries().size(),
            build_tensor(news_user_matrix(b), c).entries().size());
  const DenseTensor3 ta = build_tensor(news_user_matrix(a), c).to_dense();
  const DenseTensor3 tb = build_tensor(news_user_matrix(b), c).to_dense();
  EXPECT_TRUE(std::ranges::equal(ta.data(), tb.data()));
}

}  // namespace
}  // namespace echotensor
