#include "langmem/similarity.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "langmem/csv.hpp"
#include "langmem/error.hpp"

namespace langmem {

std::optional<std::size_t> SimilarityMatrix::index_of(const std::string& language) const {
  for (std::size_t i = 0; i < languages.size(); ++i) {
    if (languages[i] == language) return i;
  }
  return std::nullopt;
}

void SimilarityMatrix::validate() const {
  const auto n = static_cast<Eigen::Index>(languages.size());
  if (values.rows() != n || values.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "similarity matrix is " + std::to_string(values.rows()) + "x" +
                    std::to_string(values.cols()) + " for " + std::to_string(n) +
                    " languages");
  }
  if (std::set<std::string>(languages.begin(), languages.end()).size() != languages.size()) {
    throw Error(ErrorCode::InvalidRecord, "similarity matrix has duplicate language codes");
  }
  constexpr double tol = 1e-9;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(values(i, i) - 1.0) > tol) {
      throw Error(ErrorCode::InvalidRecord,
                  "similarity diagonal for '" + languages[i] + "' is not 1");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = values(i, j);
      if (!std::isfinite(v) || v < -1.0 - tol || v > 1.0 + tol) {
        throw Error(ErrorCode::InvalidRecord, "similarity entry (" + languages[i] + ", " +
                                                  languages[j] + ") is outside [-1, 1]");
      }
      if (std::abs(v - values(j, i)) > tol) {
        throw Error(ErrorCode::InvalidRecord, "similarity matrix is not symmetric at (" +
                                                  languages[i] + ", " + languages[j] + ")");
      }
    }
  }
}

SimilarityMatrix read_similarity_csv(std::istream& in) {
  const auto rows = csv::read_all(in);
  if (rows.empty()) throw Error(ErrorCode::ParseError, "similarity CSV is empty");

  SimilarityMatrix sim;
  sim.languages = rows.front();
  // Accept an optional leading corner cell (row labels in the first column).
  const bool row_labels = !sim.languages.empty() &&
                          rows.size() > 1 && rows[1].size() == sim.languages.size() &&
                          sim.languages.front().empty();
  if (row_labels) sim.languages.erase(sim.languages.begin());

  const std::size_t n = sim.languages.size();
  if (rows.size() != n + 1) {
    throw Error(ErrorCode::ParseError, "similarity CSV has " + std::to_string(rows.size() - 1) +
                                           " body rows for " + std::to_string(n) +
                                           " languages");
  }
  sim.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[i + 1];
    const std::size_t offset = row_labels ? 1 : 0;
    if (row.size() != n + offset) {
      throw Error(ErrorCode::ParseError,
                  "similarity CSV row " + std::to_string(i + 2) + " has wrong width");
    }
    for (std::size_t j = 0; j < n; ++j) {
      sim.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          csv::parse_double(row[j + offset], "similarity CSV row " + std::to_string(i + 2));
    }
  }
  sim.validate();
  return sim;
}

SimilarityMatrix load_similarity_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_similarity_csv(in);
}

void write_similarity_csv(std::ostream& out, const SimilarityMatrix& sim) {
  out << csv::join(sim.languages) << '\n';
  for (Eigen::Index i = 0; i < sim.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < sim.values.cols(); ++j) {
      if (j) out << ',';
      out << csv::format_number(sim.values(i, j), 9);
    }
    out << '\n';
  }
}

}  // namespace langmem
