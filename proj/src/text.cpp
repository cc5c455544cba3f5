#include "knet/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

namespace knet {

namespace {

bool word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

// English function words; no stemming is applied anywhere.
const std::unordered_set<std::string_view>& stopwords() {
  static const std::unordered_set<std::string_view> words = {
      "a",       "about",   "above",  "after",   "again",   "against", "all",     "also",    "am",
      "an",      "and",     "any",    "are",     "as",      "at",      "be",      "because", "been",
      "before",  "being",   "below",  "between", "both",    "but",     "by",      "can",     "could",
      "did",     "do",      "does",   "doing",   "down",    "during",  "each",    "few",     "for",
      "from",    "further", "had",    "has",     "have",    "having",  "he",      "her",     "here",
      "hers",    "herself", "him",    "himself", "his",     "how",     "however", "if",      "in",
      "into",    "is",      "it",     "its",     "itself",  "may",     "me",      "might",   "more",
      "most",    "must",    "my",     "myself",  "no",      "nor",     "not",     "of",      "off",
      "on",      "once",    "one",    "only",    "or",      "other",   "ought",   "our",     "ours",
      "ourselves", "out",   "over",   "own",     "same",    "she",     "should",  "since",   "so",
      "some",    "such",    "than",   "that",    "the",     "their",   "theirs",  "them",    "themselves",
      "then",    "there",   "these",  "they",    "this",    "those",   "through", "thus",    "to",
      "too",     "under",   "until",  "up",      "upon",    "us",      "used",    "very",    "was",
      "we",      "were",    "what",   "when",    "where",   "whether", "which",   "while",   "who",
      "whom",    "why",     "will",   "with",    "within",  "without", "would",   "you",     "your",
      "yours",   "yourself", "yourselves", "known", "often", "many",  "called",  "two",     "first",
      "well",    "within",  "among",  "although", "several", "via",   "etc"};
  return words;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t code_points = 0;
  auto flush = [&] {
    if (code_points >= 2) tokens.push_back(current);
    current.clear();
    code_points = 0;
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (word_byte(c)) {
      current += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
      if ((c & 0xC0) != 0x80) ++code_points;  // continuation bytes do not start a code point
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

bool is_stopword(std::string_view token) { return stopwords().count(token) > 0; }

TfidfModel compute_tfidf(std::span<const std::vector<std::string>> documents) {
  TfidfModel model;
  std::map<std::string, int> df;
  for (const auto& doc : documents) {
    std::vector<std::string> unique(doc.begin(), doc.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (const auto& t : unique) ++df[t];
  }
  std::map<std::string, int> id;
  for (const auto& [term, count] : df) {
    id.emplace(term, static_cast<int>(model.vocab.size()));
    model.vocab.push_back(term);
  }
  const double D = static_cast<double>(documents.size());
  const auto V = static_cast<Eigen::Index>(model.vocab.size());
  for (const auto& doc : documents) {
    std::map<int, double> freq;
    for (const auto& t : doc) freq[id.at(t)] += 1.0;
    SparseVec v(V);
    for (const auto& [term, f] : freq) {
      const double w = f * std::log2(D / df.at(model.vocab[term]));
      if (w > 0.0) v.insertBack(term) = w;
    }
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    model.vectors.push_back(std::move(v));
  }
  return model;
}

double cosine_similarity(const SparseVec& u, const SparseVec& v) {
  if (u.nonZeros() == 0 || v.nonZeros() == 0) return 0.0;
  const double denom = u.norm() * v.norm();
  if (denom == 0.0) return 0.0;
  return std::clamp(u.dot(v) / denom, 0.0, 1.0);
}

}  // namespace knet
