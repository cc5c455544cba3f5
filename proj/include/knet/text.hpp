#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

namespace knet {

using SparseVec = Eigen::SparseVector<double>;

/// Lowercased word tokens. Words are maximal runs of ASCII letters/digits and
/// non-ASCII UTF-8 bytes; tokens shorter than two code points are dropped.
std::vector<std::string> tokenize(std::string_view text);

bool is_stopword(std::string_view token);

struct TfidfModel {
  std::vector<std::string> vocab;  // sorted, unique
  std::vector<SparseVec> vectors;  // one per document, unit norm or empty
};

/// weight(i, j) = freq(i, j) * log2(D / df(i)), then each document scaled to
/// unit Euclidean norm. Terms present in every document get weight 0 and are
/// not stored.
TfidfModel compute_tfidf(std::span<const std::vector<std::string>> documents);

/// dot(u, v) / (|u| |v|), clamped to [0, 1]; 0 when either vector is empty.
double cosine_similarity(const SparseVec& u, const SparseVec& v);

}  // namespace knet
