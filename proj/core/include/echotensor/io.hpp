#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "echotensor/tensor.hpp"

namespace echotensor {

// COO text: "# dims I J K" header, then "i\tj\tk\tvalue" per nonzero,
// zero-based indices, LF line endings.
void write_coo(std::ostream& out, const SparseTensor3& t);
SparseTensor3 read_coo(std::istream& in);
void write_coo(const std::filesystem::path& path, const SparseTensor3& t);
SparseTensor3 read_coo(const std::filesystem::path& path);

// Headerless CSV, one matrix row per line.
void write_csv(std::ostream& out, const Matrix& m);
Matrix read_csv(std::istream& in);
void write_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_csv(const std::filesystem::path& path);

// Embedding table: header "entity_id,dim_0,...,dim_{d-1}", then one row per
// entity. `ids` must have one element per matrix row.
struct Embeddings {
  std::vector<std::string> ids;
  Matrix values;
};
void write_embeddings(std::ostream& out, const Embeddings& e);
Embeddings read_embeddings(std::istream& in);
void write_embeddings(const std::filesystem::path& path, const Embeddings& e);
Embeddings read_embeddings(const std::filesystem::path& path);

// Shortest round-trippable decimal form of a double.
std::string format_double(double x);

}  // namespace echotensor
