#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "echotensor/tensor.hpp"

namespace echotensor {

using Tokens = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;

/// Bundled English stopword list (lowercase).
const StopwordSet& default_stopwords();
inline constexpr std::string_view kStopwordListVersion = "en-2024.1";

/// Lowercases, drops URL-shaped whitespace tokens ("scheme://..." or
/// "www."-prefixed), splits the rest on non-alphanumeric boundaries and
/// removes stopwords. Bytes >= 0x80 count as word characters so UTF-8
/// words stay intact.
Tokens preprocess(std::string_view text, const StopwordSet& stopwords);

struct Document {
  std::string id;
  Tokens tokens;
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> docs);  // throws on duplicate ids

  std::size_t size() const { return docs_.size(); }
  const std::vector<Document>& docs() const { return docs_; }

 private:
  std::vector<Document> docs_;
};

struct VocabOptions {
  std::size_t n = 2;
  std::size_t cap = 10000;
  bool include_unigrams = false;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> terms, std::size_t n = 2,
                      bool include_unigrams = false);

  std::size_t n() const { return n_; }
  bool include_unigrams() const { return include_unigrams_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<std::string>& terms() const { return terms_; }
  // Column id of `term`, or -1.
  long find(const std::string& term) const;

 private:
  std::size_t n_ = 2;
  bool include_unigrams_ = false;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Space-joined n-grams of `tokens`, in order.
std::vector<std::string> ngrams(const Tokens& tokens, std::size_t n);

/// Ranks n-grams by total corpus frequency (ties lexicographic) and keeps
/// the top `cap`. With include_unigrams, order-1 terms compete in the same
/// ranking.
Vocabulary build_vocab(const Corpus& corpus, const VocabOptions& opts);
Vocabulary build_vocab(const Corpus& corpus, std::size_t n, std::size_t cap);

/// Raw n-gram counts, docs x |V|.
Matrix count_matrix(const Corpus& corpus, const Vocabulary& vocab);

}  // namespace echotensor
