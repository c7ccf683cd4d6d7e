#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace langmem {

/// Symmetric pairwise language similarity, row/column order given by
/// `languages`.
struct SimilarityMatrix {
  std::vector<std::string> languages;
  Eigen::MatrixXd values;

  std::size_t size() const { return languages.size(); }
  std::optional<std::size_t> index_of(const std::string& language) const;

  /// Checks shape, symmetry, unit diagonal and the [-1, 1] range (1e-9 slack).
  void validate() const;
};

/// CSV with a header row of language codes and a square numeric body.
SimilarityMatrix read_similarity_csv(std::istream& in);
SimilarityMatrix load_similarity_csv(const std::string& path);
void write_similarity_csv(std::ostream& out, const SimilarityMatrix& sim);

}  // namespace langmem
