#include "echotensor/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

namespace echotensor {

namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw std::invalid_argument("tensor mode must be 1, 2 or 3, got " + std::to_string(mode));
  }
}

// The two modes other than `mode`, in increasing order.
std::pair<int, int> other_modes(int mode) {
  switch (mode) {
    case 1:
      return {2, 3};
    case 2:
      return {1, 3};
    default:
      return {1, 2};
  }
}

std::size_t coord(const Entry& e, int mode) {
  return mode == 1 ? e.i : (mode == 2 ? e.j : e.k);
}

const Matrix& pick(int mode, const Matrix& u, const Matrix& v, const Matrix& w) {
  return mode == 1 ? u : (mode == 2 ? v : w);
}

void check_cp_factors(const Dims3& dims, const Matrix& u, const Matrix& v, const Matrix& w) {
  if (u.cols() != v.cols() || u.cols() != w.cols()) {
    throw std::invalid_argument("CP factors must have equal column counts");
  }
  if (static_cast<std::size_t>(u.rows()) != dims.i ||
      static_cast<std::size_t>(v.rows()) != dims.j ||
      static_cast<std::size_t>(w.rows()) != dims.k) {
    throw std::invalid_argument("CP factor row counts do not match tensor dims");
  }
}

}  // namespace

std::size_t Dims3::operator[](int mode) const {
  check_mode(mode);
  return mode == 1 ? i : (mode == 2 ? j : k);
}

SparseTensor3::SparseTensor3(Dims3 dims, std::vector<Entry> entries) : dims_(dims) {
  std::erase_if(entries, [](const Entry& e) { return e.value == 0.0; });
  for (const auto& e : entries) {
    if (e.i >= dims.i || e.j >= dims.j || e.k >= dims.k) {
      throw std::invalid_argument("tensor entry (" + std::to_string(e.i) + "," +
                                  std::to_string(e.j) + "," + std::to_string(e.k) +
                                  ") outside dims");
    }
    if (!std::isfinite(e.value)) {
      throw std::invalid_argument("tensor entry value is not finite");
    }
  }
  auto key = [](const Entry& e) { return std::tie(e.i, e.j, e.k); };
  std::sort(entries.begin(), entries.end(),
            [&](const Entry& a, const Entry& b) { return key(a) < key(b); });
  auto dup = std::adjacent_find(entries.begin(), entries.end(),
                                [&](const Entry& a, const Entry& b) { return key(a) == key(b); });
  if (dup != entries.end()) {
    throw std::invalid_argument("duplicate tensor coordinate (" + std::to_string(dup->i) + "," +
                                std::to_string(dup->j) + "," + std::to_string(dup->k) + ")");
  }
  entries_ = std::move(entries);
}

SparseTensor3 SparseTensor3::from_dense(const DenseTensor3& dense) {
  const Dims3& d = dense.dims();
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < d.i; ++i) {
    for (std::size_t j = 0; j < d.j; ++j) {
      for (std::size_t k = 0; k < d.k; ++k) {
        const double x = dense(i, j, k);
        if (x != 0.0) entries.push_back({i, j, k, x});
      }
    }
  }
  return SparseTensor3(d, std::move(entries));
}

DenseTensor3 SparseTensor3::to_dense() const {
  DenseTensor3 out(dims_);
  for (const auto& e : entries_) out(e.i, e.j, e.k) = e.value;
  return out;
}

DenseTensor3::DenseTensor3(Dims3 dims) : dims_(dims), data_(dims.product(), 0.0) {}

DenseTensor3::DenseTensor3(Dims3 dims, std::vector<double> data)
    : dims_(dims), data_(std::move(data)) {
  if (data_.size() != dims_.product()) {
    throw std::invalid_argument("dense tensor data length does not match dims");
  }
  for (double x : data_) {
    if (!std::isfinite(x)) throw std::invalid_argument("dense tensor value is not finite");
  }
}

DenseTensor3 to_dense(const Tensor3& t) {
  return std::visit(
      [](const auto& x) -> DenseTensor3 {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, SparseTensor3>) {
          return x.to_dense();
        } else {
          return x;
        }
      },
      t);
}

double frobenius_norm(const SparseTensor3& t) {
  double s = 0.0;
  for (const auto& e : t.entries()) s += e.value * e.value;
  return std::sqrt(s);
}

double frobenius_norm(const DenseTensor3& t) {
  double s = 0.0;
  for (double x : t.data()) s += x * x;
  return std::sqrt(s);
}

double frobenius_norm(const Matrix& m) { return m.norm(); }

std::size_t unfolding_column(const Dims3& dims, int mode, std::size_t i, std::size_t j,
                             std::size_t k) {
  switch (mode) {
    case 1:
      return j + dims.j * k;
    case 2:
      return i + dims.i * k;
    case 3:
      return i + dims.i * j;
    default:
      check_mode(mode);
      return 0;
  }
}

Matrix matricize(const SparseTensor3& t, int mode) {
  check_mode(mode);
  const Dims3& d = t.dims();
  const std::size_t rows = d[mode];
  const std::size_t cols = d.product() / std::max<std::size_t>(rows, 1);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (const auto& e : t.entries()) {
    out(static_cast<Eigen::Index>(coord(e, mode)),
        static_cast<Eigen::Index>(unfolding_column(d, mode, e.i, e.j, e.k))) = e.value;
  }
  return out;
}

Matrix matricize(const DenseTensor3& t, int mode) {
  check_mode(mode);
  const Dims3& d = t.dims();
  const auto I = static_cast<Eigen::Index>(d.i);
  const auto J = static_cast<Eigen::Index>(d.j);
  const auto K = static_cast<Eigen::Index>(d.k);
  Eigen::Map<const Matrix> flat(t.data().data(), I, J * K);
  if (mode == 1) return flat;
  if (mode == 3) return Eigen::Map<const Matrix>(t.data().data(), I * J, K).transpose();
  Matrix out(J, I * K);
  for (Eigen::Index k = 0; k < K; ++k) {
    out.middleCols(k * I, I) = flat.middleCols(k * J, J).transpose();
  }
  return out;
}

DenseTensor3 refold(const Matrix& unfolded, int mode, Dims3 dims) {
  check_mode(mode);
  if (static_cast<std::size_t>(unfolded.rows()) != dims[mode] ||
      static_cast<std::size_t>(unfolded.rows() * unfolded.cols()) != dims.product()) {
    throw std::invalid_argument("refold: matrix shape does not match dims");
  }
  DenseTensor3 out(dims);
  for (std::size_t i = 0; i < dims.i; ++i) {
    for (std::size_t j = 0; j < dims.j; ++j) {
      for (std::size_t k = 0; k < dims.k; ++k) {
        const std::size_t row = mode == 1 ? i : (mode == 2 ? j : k);
        out(i, j, k) = unfolded(static_cast<Eigen::Index>(row),
                                static_cast<Eigen::Index>(unfolding_column(dims, mode, i, j, k)));
      }
    }
  }
  return out;
}

DenseTensor3 mode_n_product(const DenseTensor3& t, const Matrix& u, int mode) {
  check_mode(mode);
  const Dims3& d = t.dims();
  if (static_cast<std::size_t>(u.cols()) != d[mode]) {
    throw std::invalid_argument("mode_n_product: matrix columns must equal dims[mode]");
  }
  Dims3 od = d;
  const auto R = u.rows();
  (mode == 1 ? od.i : (mode == 2 ? od.j : od.k)) = static_cast<std::size_t>(R);
  DenseTensor3 out(od);
  const auto I = static_cast<Eigen::Index>(d.i);
  const auto J = static_cast<Eigen::Index>(d.j);
  const auto K = static_cast<Eigen::Index>(d.k);
  if (mode == 1) {
    Eigen::Map<const Matrix> x(t.data().data(), I, J * K);
    Eigen::Map<Matrix>(out.data().data(), R, J * K).noalias() = u * x;
  } else if (mode == 2) {
    for (Eigen::Index k = 0; k < K; ++k) {
      Eigen::Map<const Matrix> slice(t.data().data() + k * I * J, I, J);
      Eigen::Map<Matrix>(out.data().data() + k * I * R, I, R).noalias() = slice * u.transpose();
    }
  } else {
    Eigen::Map<const Matrix> x(t.data().data(), I * J, K);
    Eigen::Map<Matrix>(out.data().data(), I * J, R).noalias() = x * u.transpose();
  }
  return out;
}

Tensor3 mode_n_product(const SparseTensor3& t, const Matrix& u, int mode) {
  check_mode(mode);
  const Dims3& d = t.dims();
  if (static_cast<std::size_t>(u.cols()) != d[mode]) {
    throw std::invalid_argument("mode_n_product: matrix columns must equal dims[mode]");
  }
  Dims3 od = d;
  const auto R = static_cast<std::size_t>(u.rows());
  (mode == 1 ? od.i : (mode == 2 ? od.j : od.k)) = R;

  // Fibers along `mode`, keyed by the two remaining coordinates.
  const auto [ma, mb] = other_modes(mode);
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const Entry*>> fibers;
  for (const auto& e : t.entries()) fibers[{coord(e, ma), coord(e, mb)}].push_back(&e);

  const double predicted = static_cast<double>(fibers.size() * R);
  const double size = static_cast<double>(od.product());
  auto place = [mode](std::size_t r, std::size_t a, std::size_t b) -> std::array<std::size_t, 3> {
    if (mode == 1) return {r, a, b};
    if (mode == 2) return {a, r, b};
    return {a, b, r};
  };

  if (size > 0 && predicted > kDenseFillThreshold * size) {
    DenseTensor3 out(od);
    for (const auto& [key, entries] : fibers) {
      for (const Entry* e : entries) {
        const auto col = static_cast<Eigen::Index>(coord(*e, mode));
        for (std::size_t r = 0; r < R; ++r) {
          const auto [x, y, z] = place(r, key.first, key.second);
          out(x, y, z) += u(static_cast<Eigen::Index>(r), col) * e->value;
        }
      }
    }
    return out;
  }

  std::vector<Entry> out;
  Vector acc(static_cast<Eigen::Index>(R));
  for (const auto& [key, entries] : fibers) {
    acc.setZero();
    for (const Entry* e : entries) acc += u.col(static_cast<Eigen::Index>(coord(*e, mode))) * e->value;
    for (std::size_t r = 0; r < R; ++r) {
      const double x = acc(static_cast<Eigen::Index>(r));
      if (x == 0.0) continue;
      const auto [a, b, c] = place(r, key.first, key.second);
      out.push_back({a, b, c, x});
    }
  }
  return SparseTensor3(od, std::move(out));
}

Matrix khatri_rao(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) {
    throw std::invalid_argument("khatri_rao: column counts differ");
  }
  Matrix out(x.rows() * y.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index a = 0; a < x.rows(); ++a) {
      out.col(c).segment(a * y.rows(), y.rows()) = x(a, c) * y.col(c);
    }
  }
  return out;
}

Matrix kronecker(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index a = 0; a < x.rows(); ++a) {
    for (Eigen::Index b = 0; b < x.cols(); ++b) {
      out.block(a * y.rows(), b * y.cols(), y.rows(), y.cols()) = x(a, b) * y;
    }
  }
  return out;
}

DenseTensor3 reconstruct_tucker(const CoreTensor& g, const Matrix& u, const Matrix& v,
                                const Matrix& w) {
  const Dims3& r = g.dims();
  if (static_cast<std::size_t>(u.cols()) != r.i || static_cast<std::size_t>(v.cols()) != r.j ||
      static_cast<std::size_t>(w.cols()) != r.k) {
    throw std::invalid_argument("reconstruct_tucker: factor columns must match core dims");
  }
  return mode_n_product(mode_n_product(mode_n_product(g, u, 1), v, 2), w, 3);
}

DenseTensor3 reconstruct_cp(const Matrix& u, const Matrix& v, const Matrix& w) {
  if (u.cols() != v.cols() || u.cols() != w.cols()) {
    throw std::invalid_argument("reconstruct_cp: factor column counts differ");
  }
  const Dims3 d{static_cast<std::size_t>(u.rows()), static_cast<std::size_t>(v.rows()),
                static_cast<std::size_t>(w.rows())};
  DenseTensor3 out(d);
  // Mode-1 unfolding of the model is U (W ⊙ V)^T.
  Eigen::Map<Matrix>(out.data().data(), u.rows(), v.rows() * w.rows()).noalias() =
      u * khatri_rao(w, v).transpose();
  return out;
}

Matrix mttkrp(const SparseTensor3& t, const Matrix& u, const Matrix& v, const Matrix& w,
              int mode) {
  check_mode(mode);
  check_cp_factors(t.dims(), u, v, w);
  const Matrix& self = pick(mode, u, v, w);
  const auto [ma, mb] = other_modes(mode);
  const Matrix& a = pick(ma, u, v, w);
  const Matrix& b = pick(mb, u, v, w);
  Matrix out = Matrix::Zero(self.rows(), self.cols());
  for (const auto& e : t.entries()) {
    out.row(static_cast<Eigen::Index>(coord(e, mode))) +=
        e.value * a.row(static_cast<Eigen::Index>(coord(e, ma)))
                      .cwiseProduct(b.row(static_cast<Eigen::Index>(coord(e, mb))));
  }
  return out;
}

double cp_inner_product(const SparseTensor3& t, const Matrix& u, const Matrix& v,
                        const Matrix& w) {
  check_cp_factors(t.dims(), u, v, w);
  double s = 0.0;
  for (const auto& e : t.entries()) {
    s += e.value * (u.row(static_cast<Eigen::Index>(e.i))
                        .cwiseProduct(v.row(static_cast<Eigen::Index>(e.j)))
                        .cwiseProduct(w.row(static_cast<Eigen::Index>(e.k))))
                       .sum();
  }
  return s;
}

double cp_norm_squared(const Matrix& u, const Matrix& v, const Matrix& w) {
  const Matrix h = (u.transpose() * u).cwiseProduct(v.transpose() * v).cwiseProduct(w.transpose() * w);
  return h.sum();
}

double cp_residual_norm(const SparseTensor3& t, const Matrix& u, const Matrix& v,
                        const Matrix& w) {
  check_cp_factors(t.dims(), u, v, w);
  if (t.dims().product() <= kDenseResidualLimit) {
    DenseTensor3 z = reconstruct_cp(u, v, w);
    for (const auto& e : t.entries()) z(e.i, e.j, e.k) -= e.value;
    return frobenius_norm(z);
  }
  const double tn = frobenius_norm(t);
  const double r2 = tn * tn - 2.0 * cp_inner_product(t, u, v, w) + cp_norm_squared(u, v, w);
  return std::sqrt(std::max(r2, 0.0));
}

Matrix project_except(const SparseTensor3& t, const Matrix& u, const Matrix& v,
                      const Matrix& w, int mode) {
  check_mode(mode);
  const Dims3& d = t.dims();
  if (static_cast<std::size_t>(u.rows()) != d.i || static_cast<std::size_t>(v.rows()) != d.j ||
      static_cast<std::size_t>(w.rows()) != d.k) {
    throw std::invalid_argument("project_except: factor rows do not match tensor dims");
  }
  const auto [ma, mb] = other_modes(mode);
  const Matrix& a = pick(ma, u, v, w);
  const Matrix& b = pick(mb, u, v, w);
  const Eigen::Index ra = a.cols();
  const Eigen::Index rb = b.cols();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(d[mode]), ra * rb);
  for (const auto& e : t.entries()) {
    const auto row = static_cast<Eigen::Index>(coord(e, mode));
    const auto ar = a.row(static_cast<Eigen::Index>(coord(e, ma)));
    const auto br = b.row(static_cast<Eigen::Index>(coord(e, mb)));
    for (Eigen::Index c = 0; c < rb; ++c) {
      const double s = e.value * br(c);
      if (s == 0.0) continue;
      out.row(row).segment(c * ra, ra) += s * ar;
    }
  }
  return out;
}

}  // namespace echotensor
