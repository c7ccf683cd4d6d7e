#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "langmem/similarity.hpp"

namespace langmem::simgraph {

enum class EdgeMode {
  Binary,    // A_ij in {0, 1}
  Weighted,  // A_ij = sim(i, j) for retained pairs
};

/// Thresholded, self-loop-free language graph with dense degree and
/// unnormalized Laplacian (L = D - A).
struct LanguageGraph {
  std::vector<std::string> languages;
  double theta = 0.0;
  EdgeMode mode = EdgeMode::Binary;
  Eigen::MatrixXd adjacency;
  Eigen::VectorXd degrees;
  Eigen::MatrixXd laplacian;

  std::size_t size() const { return languages.size(); }
  bool has_edge(std::size_t i, std::size_t j) const {
    return adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0;
  }
  /// Undirected edges as (i, j) with i < j, in row-major order.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  std::size_t edge_count() const;
};

/// Connected components: groups of two or more nodes, and degree-0 nodes.
/// Members are sorted; groups are ordered by their smallest member.
struct ComponentPartition {
  std::vector<std::vector<std::size_t>> subgraphs;
  std::vector<std::size_t> singletons;

  std::size_t group_count() const { return subgraphs.size() + singletons.size(); }
};

/// A_ij = 1 iff i != j and sim(i, j) >= theta. Edgeless output is legal.
LanguageGraph build_graph(const SimilarityMatrix& sim, double theta,
                          EdgeMode mode = EdgeMode::Binary);

ComponentPartition components(const LanguageGraph& graph);

/// {"theta": .., "languages": [..], "edges": [[i, j], ..]}; weighted graphs
/// additionally carry "weights" aligned with "edges".
void write_graph_json(std::ostream& out, const LanguageGraph& graph);

}  // namespace langmem::simgraph
