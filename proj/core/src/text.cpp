#include "echotensor/text.hpp"

#include <algorithm>
#include <stdexcept>

namespace echotensor {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool is_url(std::string_view token) {
  return token.find("://") != std::string_view::npos || token.starts_with("www.");
}

}  // namespace

Tokens preprocess(std::string_view text, const StopwordSet& stopwords) {
  std::string lower(text);
  for (char& c : lower) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  Tokens out;
  std::size_t pos = 0;
  while (pos < lower.size()) {
    while (pos < lower.size() && is_space(static_cast<unsigned char>(lower[pos]))) ++pos;
    std::size_t end = pos;
    while (end < lower.size() && !is_space(static_cast<unsigned char>(lower[end]))) ++end;
    const std::string_view chunk(lower.data() + pos, end - pos);
    pos = end;
    if (chunk.empty() || is_url(chunk)) continue;
    std::size_t i = 0;
    while (i < chunk.size()) {
      while (i < chunk.size() && !is_word_byte(static_cast<unsigned char>(chunk[i]))) ++i;
      std::size_t j = i;
      while (j < chunk.size() && is_word_byte(static_cast<unsigned char>(chunk[j]))) ++j;
      if (j > i) {
        std::string word(chunk.substr(i, j - i));
        if (!stopwords.contains(word)) out.push_back(std::move(word));
      }
      i = j;
    }
  }
  return out;
}

Corpus::Corpus(std::vector<Document> docs) {
  std::unordered_set<std::string> seen;
  for (const auto& d : docs) {
    if (!seen.insert(d.id).second) throw std::invalid_argument("duplicate document id '" + d.id + "'");
  }
  docs_ = std::move(docs);
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::size_t n, bool include_unigrams)
    : n_(n), include_unigrams_(include_unigrams), terms_(std::move(terms)) {
  if (n_ < 1) throw std::invalid_argument("n-gram order must be at least 1");
  for (std::size_t c = 0; c < terms_.size(); ++c) {
    if (!index_.emplace(terms_[c], c).second) {
      throw std::invalid_argument("duplicate vocabulary term '" + terms_[c] + "'");
    }
  }
}

long Vocabulary::find(const std::string& term) const {
  auto it = index_.find(term);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

std::vector<std::string> ngrams(const Tokens& tokens, std::size_t n) {
  std::vector<std::string> out;
  if (n == 0 || tokens.size() < n) return out;
  out.reserve(tokens.size() - n + 1);
  for (std::size_t s = 0; s + n <= tokens.size(); ++s) {
    std::string g = tokens[s];
    for (std::size_t t = 1; t < n; ++t) {
      g.push_back(' ');
      g += tokens[s + t];
    }
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

template <typename Fn>
void for_each_term(const Tokens& tokens, std::size_t n, bool include_unigrams, Fn&& fn) {
  for (auto& g : ngrams(tokens, n)) fn(g);
  if (include_unigrams && n != 1) {
    for (const auto& t : tokens) fn(t);
  }
}

}  // namespace

Vocabulary build_vocab(const Corpus& corpus, const VocabOptions& opts) {
  if (opts.n < 1) throw std::invalid_argument("n-gram order must be at least 1");
  if (opts.cap < 1) throw std::invalid_argument("vocabulary cap must be at least 1");
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& doc : corpus.docs()) {
    for_each_term(doc.tokens, opts.n, opts.include_unigrams,
                  [&](const std::string& g) { ++freq[g]; });
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > opts.cap) ranked.resize(opts.cap);
  std::vector<std::string> terms;
  terms.reserve(ranked.size());
  for (auto& [term, count] : ranked) terms.push_back(std::move(term));
  return Vocabulary(std::move(terms), opts.n, opts.include_unigrams);
}

Vocabulary build_vocab(const Corpus& corpus, std::size_t n, std::size_t cap) {
  return build_vocab(corpus, VocabOptions{n, cap, false});
}

Matrix count_matrix(const Corpus& corpus, const Vocabulary& vocab) {
  if (vocab.empty()) throw std::invalid_argument("count_matrix needs a nonempty vocabulary");
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(corpus.size()),
                          static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for_each_term(corpus.docs()[d].tokens, vocab.n(), vocab.include_unigrams(),
                  [&](const std::string& g) {
                    const long c = vocab.find(g);
                    if (c >= 0) m(static_cast<Eigen::Index>(d), c) += 1.0;
                  });
  }
  return m;
}

}  // namespace echotensor
