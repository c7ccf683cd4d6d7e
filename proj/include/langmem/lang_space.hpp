#pragma once

#include <Eigen/Dense>

#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "langmem/similarity.hpp"

// Language-specific subspace identification over per-language mean
// embeddings, projection into that subspace, and cosine similarity between
// the projected languages.
namespace langmem::lang_space {

/// Mean embeddings of one hidden layer. Column `l` of `means` is the mean
/// sentence embedding of `languages[l]`.
struct LayerEmbeddings {
  int layer = 0;
  std::vector<std::string> languages;
  Eigen::MatrixXd means;  // d x |L|

  Eigen::Index dim() const { return means.rows(); }
  void validate() const;
};

/// Output of the two-step low-rank decomposition
/// M ~= mu * 1^T + basis * coords^T.
struct SubspaceModel {
  Eigen::VectorXd mu;      // language-agnostic component, length d
  Eigen::MatrixXd basis;   // d x r, orthonormal columns
  Eigen::MatrixXd coords;  // |L| x r
  int rank = 0;

  Eigen::Index dim() const { return basis.rows(); }
  Eigen::MatrixXd reconstruct() const;
};

inline constexpr int kDefaultRank = 1;

Eigen::VectorXd mean_embedding(std::span<const Eigen::VectorXd> sentence_vectors,
                               Eigen::Index dim);

/// Requires 1 <= rank < min(d, |L|).
///
/// Step 1 centres the columns on their mean and keeps the top-`rank` SVD,
/// giving a low-rank approximation M'. Step 2 replaces the mean by the offset
/// mu = (M'^+)^T 1 / ||(M'^+)^T 1||^2, which is orthogonal to the residual
/// M' - mu 1^T, and takes the top-`rank` SVD of that residual. When M'^T x = 1
/// has no exact solution the offset cannot be made orthogonal; the column mean
/// is kept instead so the reconstruction stays at M'.
///
/// Each basis column is sign-normalized so its largest-magnitude entry is
/// positive; `coords` is flipped to match.
SubspaceModel identify_subspace(const LayerEmbeddings& embeddings, int rank = kDefaultRank);

/// Frobenius norm of M - (mu 1^T + basis coords^T).
double reconstruction_error(const LayerEmbeddings& embeddings, const SubspaceModel& model);

/// basis * (basis^T * embedding).
Eigen::VectorXd project_language(const SubspaceModel& model, const Eigen::VectorXd& embedding);

/// Cosine similarity of every pair of projected language means.
SimilarityMatrix similarity_matrix(const SubspaceModel& model, const LayerEmbeddings& embeddings);

/// Pearson correlation over the strict upper triangles of two similarity
/// matrices, restricted to their shared languages (in `a`'s order).
double matrix_correlation(const SimilarityMatrix& a, const SimilarityMatrix& b);

/// Parses embedding JSON-lines. Records either carry a per-language mean
/// ({"language","layer","dim","vector"}) or a per-sentence vector with an
/// additional "sentence_id"; sentence records are averaged per
/// (language, layer). Languages keep first-appearance order.
std::map<int, LayerEmbeddings> read_embeddings_jsonl(std::istream& in);
std::map<int, LayerEmbeddings> load_embeddings_jsonl(const std::string& path);

/// One per-language mean record per (layer, language).
void write_embeddings_jsonl(std::ostream& out, const std::map<int, LayerEmbeddings>& layers);

}  // namespace langmem::lang_space
