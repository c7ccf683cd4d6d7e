#include "langmem/lang_space.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include "langmem/error.hpp"
#include "langmem/stats.hpp"

namespace langmem::lang_space {

namespace {

struct TruncatedSvd {
  Eigen::MatrixXd left;    // d x r
  Eigen::VectorXd values;  // r
  Eigen::MatrixXd right;   // n x r
};

TruncatedSvd top_svd(const Eigen::MatrixXd& a, int rank) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalError, "SVD did not converge");
  }
  return {svd.matrixU().leftCols(rank), svd.singularValues().head(rank),
          svd.matrixV().leftCols(rank)};
}

// Minimum-norm x with approx^T x = 1, rescaled to x / ||x||^2. Returns
// nullopt when the system is inconsistent or x vanishes.
std::optional<Eigen::VectorXd> orthogonal_offset(const Eigen::MatrixXd& approx) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(approx, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalError, "SVD did not converge in the pseudoinverse step");
  }
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return std::nullopt;

  // Singular values this far below the largest are rounding noise of the
  // low-rank approximation, not structure.
  const double cutoff = 1e-10 * s(0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(approx.cols());
  const Eigen::VectorXd vt_ones = svd.matrixV().transpose() * ones;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(approx.rows());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) x += svd.matrixU().col(i) * (vt_ones(i) / s(i));
  }

  const double norm2 = x.squaredNorm();
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) return std::nullopt;
  const double residual = (approx.transpose() * x - ones).norm();
  if (residual > 1e-8 * std::sqrt(static_cast<double>(ones.size()))) return std::nullopt;
  return Eigen::VectorXd(x / norm2);
}

void normalize_signs(Eigen::MatrixXd& basis, Eigen::MatrixXd& coords) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index arg = 0;
    basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, j) < 0.0) {
      basis.col(j) *= -1.0;
      coords.col(j) *= -1.0;
    }
  }
}

}  // namespace

void LayerEmbeddings::validate() const {
  if (languages.size() < 2) {
    throw Error(ErrorCode::EmptyInput, "layer " + std::to_string(layer) +
                                           " needs at least 2 languages, got " +
                                           std::to_string(languages.size()));
  }
  if (means.cols() != static_cast<Eigen::Index>(languages.size())) {
    throw Error(ErrorCode::DimensionMismatch,
                "layer " + std::to_string(layer) + " has " + std::to_string(means.cols()) +
                    " columns for " + std::to_string(languages.size()) + " languages");
  }
  if (means.rows() == 0) throw Error(ErrorCode::DimensionMismatch, "embedding dimension is 0");
  if (std::set<std::string>(languages.begin(), languages.end()).size() != languages.size()) {
    throw Error(ErrorCode::InvalidRecord,
                "layer " + std::to_string(layer) + " has duplicate language identifiers");
  }
  if (!means.allFinite()) {
    throw Error(ErrorCode::NumericalError,
                "layer " + std::to_string(layer) + " contains non-finite embeddings");
  }
}

Eigen::MatrixXd SubspaceModel::reconstruct() const {
  return (basis * coords.transpose()).colwise() + mu;
}

Eigen::VectorXd mean_embedding(std::span<const Eigen::VectorXd> sentence_vectors,
                               Eigen::Index dim) {
  if (sentence_vectors.empty()) throw Error(ErrorCode::EmptyInput, "no sentence embeddings");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  for (const auto& v : sentence_vectors) {
    if (v.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "sentence embedding of length " +
                                                    std::to_string(v.size()) + ", expected " +
                                                    std::to_string(dim));
    }
    sum += v;
  }
  return sum / static_cast<double>(sentence_vectors.size());
}

SubspaceModel identify_subspace(const LayerEmbeddings& embeddings, int rank) {
  embeddings.validate();
  const Eigen::MatrixXd& m = embeddings.means;
  const Eigen::Index limit = std::min(m.rows(), m.cols());
  if (rank < 1 || rank >= limit) {
    throw Error(ErrorCode::RankError, "rank " + std::to_string(rank) + " outside [1, " +
                                          std::to_string(limit - 1) + "]");
  }

  // 1) low-rank approximation around the column mean
  const Eigen::VectorXd column_mean = m.rowwise().mean();
  const TruncatedSvd first = top_svd(m.colwise() - column_mean, rank);
  const Eigen::MatrixXd approx =
      (first.left * first.values.asDiagonal() * first.right.transpose()).colwise() +
      column_mean;

  // 2) force the offset orthogonal to the language-specific part
  const Eigen::VectorXd mu = orthogonal_offset(approx).value_or(column_mean);
  const TruncatedSvd second = top_svd(approx.colwise() - mu, rank);

  SubspaceModel model;
  model.mu = mu;
  model.basis = second.left;
  model.coords = second.right * second.values.asDiagonal();
  model.rank = rank;
  normalize_signs(model.basis, model.coords);
  return model;
}

double reconstruction_error(const LayerEmbeddings& embeddings, const SubspaceModel& model) {
  if (embeddings.means.rows() != model.dim() || embeddings.means.cols() != model.coords.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "model does not match the embedding matrix");
  }
  return (embeddings.means - model.reconstruct()).norm();
}

Eigen::VectorXd project_language(const SubspaceModel& model, const Eigen::VectorXd& embedding) {
  if (embedding.size() != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "embedding of length " +
                                                  std::to_string(embedding.size()) +
                                                  ", subspace dimension " +
                                                  std::to_string(model.dim()));
  }
  return model.basis * (model.basis.transpose() * embedding);
}

SimilarityMatrix similarity_matrix(const SubspaceModel& model, const LayerEmbeddings& embeddings) {
  embeddings.validate();
  if (embeddings.dim() != model.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "embeddings have dimension " + std::to_string(embeddings.dim()) +
                    ", subspace has " + std::to_string(model.dim()));
  }
  const auto n = static_cast<Eigen::Index>(embeddings.languages.size());
  Eigen::MatrixXd projected(model.dim(), n);
  Eigen::VectorXd norms(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    projected.col(l) = project_language(model, embeddings.means.col(l));
    norms(l) = projected.col(l).norm();
    if (!(norms(l) > 1e-12)) {
      throw Error(ErrorCode::DegenerateProjection,
                  "language '" + embeddings.languages[static_cast<std::size_t>(l)] +
                      "' projects to a zero vector");
    }
  }

  SimilarityMatrix sim;
  sim.languages = embeddings.languages;
  sim.values = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double c = projected.col(i).dot(projected.col(j)) / (norms(i) * norms(j));
      sim.values(i, j) = c;
      sim.values(j, i) = c;
    }
  }
  return sim;
}

double matrix_correlation(const SimilarityMatrix& a, const SimilarityMatrix& b) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shared;
  for (std::size_t i = 0; i < a.languages.size(); ++i) {
    if (auto j = b.index_of(a.languages[i])) {
      shared.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*j));
    }
  }
  if (shared.size() < 3) {
    throw Error(ErrorCode::InsufficientOverlap,
                "similarity matrices share " + std::to_string(shared.size()) +
                    " languages, need at least 3");
  }
  std::vector<double> xs, ys;
  for (std::size_t p = 0; p < shared.size(); ++p) {
    for (std::size_t q = p + 1; q < shared.size(); ++q) {
      xs.push_back(a.values(shared[p].first, shared[q].first));
      ys.push_back(b.values(shared[p].second, shared[q].second));
    }
  }
  return stats::pearson(xs, ys);
}

std::map<int, LayerEmbeddings> read_embeddings_jsonl(std::istream& in) {
  struct Accumulator {
    Eigen::VectorXd sum;
    std::size_t count = 0;
    bool per_sentence = false;
  };
  // (layer) -> ordered languages + accumulators
  std::map<int, std::vector<std::string>> order;
  std::map<std::pair<int, std::string>, Accumulator> acc;
  std::map<int, Eigen::Index> dims;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "embeddings line " + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, where + ": " + e.what());
    }
    std::string language;
    int layer = 0;
    Eigen::Index dim = 0;
    std::vector<double> values;
    try {
      language = rec.at("language").get<std::string>();
      layer = rec.at("layer").get<int>();
      dim = rec.at("dim").get<Eigen::Index>();
      values = rec.at("vector").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidRecord, where + ": " + e.what());
    }
    if (layer < 0) throw Error(ErrorCode::InvalidRecord, where + ": negative layer");
    if (dim <= 0 || static_cast<Eigen::Index>(values.size()) != dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  where + ": vector length " + std::to_string(values.size()) +
                      " does not match dim " + std::to_string(dim));
    }
    if (auto it = dims.find(layer); it != dims.end() && it->second != dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  where + ": layer " + std::to_string(layer) + " mixes dimensions");
    }
    dims[layer] = dim;

    const bool per_sentence = rec.contains("sentence_id");
    const Eigen::Map<const Eigen::VectorXd> vec(values.data(), dim);
    auto key = std::make_pair(layer, language);
    auto it = acc.find(key);
    if (it == acc.end()) {
      order[layer].push_back(language);
      acc.emplace(key, Accumulator{vec, 1, per_sentence});
      continue;
    }
    if (!per_sentence || !it->second.per_sentence) {
      throw Error(ErrorCode::InvalidRecord, where + ": duplicate mean embedding for (" +
                                                language + ", layer " +
                                                std::to_string(layer) + ")");
    }
    it->second.sum += vec;
    ++it->second.count;
  }

  std::map<int, LayerEmbeddings> layers;
  for (const auto& [layer, languages] : order) {
    LayerEmbeddings emb;
    emb.layer = layer;
    emb.languages = languages;
    emb.means.resize(dims[layer], static_cast<Eigen::Index>(languages.size()));
    for (std::size_t l = 0; l < languages.size(); ++l) {
      const auto& a = acc.at({layer, languages[l]});
      emb.means.col(static_cast<Eigen::Index>(l)) = a.sum / static_cast<double>(a.count);
    }
    layers.emplace(layer, std::move(emb));
  }
  if (layers.empty()) throw Error(ErrorCode::EmptyInput, "no embedding records");
  return layers;
}

std::map<int, LayerEmbeddings> load_embeddings_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return read_embeddings_jsonl(in);
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

void write_embeddings_jsonl(std::ostream& out, const std::map<int, LayerEmbeddings>& layers) {
  for (const auto& [layer, emb] : layers) {
    for (std::size_t l = 0; l < emb.languages.size(); ++l) {
      const Eigen::VectorXd v = emb.means.col(static_cast<Eigen::Index>(l));
      nlohmann::ordered_json j;
      j["language"] = emb.languages[l];
      j["layer"] = layer;
      j["dim"] = emb.dim();
      j["vector"] = std::vector<double>(v.data(), v.data() + v.size());
      out << j.dump() << '\n';
    }
  }
}

}  // namespace langmem::lang_space
