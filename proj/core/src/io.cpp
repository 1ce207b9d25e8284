#include "echotensor/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "echotensor/error.hpp"

namespace echotensor {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      parts.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  parts.push_back(std::move(cur));
  return parts;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double x = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  while (first != last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc() || ptr != last) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  }
  return x;
}

std::size_t parse_index(const std::string& s, std::size_t line_no) {
  std::size_t x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line_no) + ": cannot parse index '" + s + "'");
  }
  return x;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void write_coo(std::ostream& out, const SparseTensor3& t) {
  const Dims3& d = t.dims();
  out << "# dims " << d.i << ' ' << d.j << ' ' << d.k << '\n';
  for (const auto& e : t.entries()) {
    out << e.i << '\t' << e.j << '\t' << e.k << '\t' << format_double(e.value) << '\n';
  }
}

SparseTensor3 read_coo(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  Dims3 dims{};
  bool have_dims = false;
  std::vector<Entry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_dims) {
      std::istringstream hs(line);
      std::string hash, word;
      if (!(hs >> hash >> word >> dims.i >> dims.j >> dims.k) || hash != "#" || word != "dims") {
        throw DataError("line " + std::to_string(line_no) + ": expected '# dims I J K' header");
      }
      have_dims = true;
      continue;
    }
    const auto parts = split(line, '\t');
    if (parts.size() != 4) {
      throw DataError("line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
    }
    entries.push_back({parse_index(parts[0], line_no), parse_index(parts[1], line_no),
                       parse_index(parts[2], line_no), parse_double(parts[3], line_no)});
  }
  if (!have_dims) throw DataError("COO input is missing the '# dims' header");
  try {
    return SparseTensor3(dims, std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid COO tensor: ") + e.what());
  }
}

void write_coo(const std::filesystem::path& path, const SparseTensor3& t) {
  auto out = open_out(path);
  write_coo(out, t);
}

SparseTensor3 read_coo(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_coo(in);
}

void write_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

Matrix read_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& f : split(line, ',')) row.push_back(parse_double(f, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError("line " + std::to_string(line_no) + ": ragged CSV row");
    }
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

void write_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  write_csv(out, m);
}

Matrix read_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_csv(in);
}

void write_embeddings(std::ostream& out, const Embeddings& e) {
  if (e.ids.size() != static_cast<std::size_t>(e.values.rows())) {
    throw std::invalid_argument("embedding ids and rows differ in count");
  }
  out << "entity_id";
  for (Eigen::Index c = 0; c < e.values.cols(); ++c) out << ",dim_" << c;
  out << '\n';
  for (Eigen::Index r = 0; r < e.values.rows(); ++r) {
    out << e.ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < e.values.cols(); ++c) out << ',' << format_double(e.values(r, c));
    out << '\n';
  }
}

Embeddings read_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("embedding file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  if (header.empty() || header.front() != "entity_id") {
    throw DataError("line 1: embedding header must start with 'entity_id'");
  }
  const std::size_t dim = header.size() - 1;
  Embeddings e;
  std::vector<double> flat;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() != dim + 1) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(dim + 1) + " fields");
    }
    e.ids.push_back(parts[0]);
    for (std::size_t c = 1; c < parts.size(); ++c) flat.push_back(parse_double(parts[c], line_no));
  }
  e.values.resize(static_cast<Eigen::Index>(e.ids.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < e.ids.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      e.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * dim + c];
    }
  }
  return e;
}

void write_embeddings(const std::filesystem::path& path, const Embeddings& e) {
  auto out = open_out(path);
  write_embeddings(out, e);
}

Embeddings read_embeddings(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_embeddings(in);
}

}  // namespace echotensor
