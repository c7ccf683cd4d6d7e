#include "langmem/simgraph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <queue>

namespace langmem::simgraph {

std::vector<std::pair<std::size_t, std::size_t>> LanguageGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      if (has_edge(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::size_t LanguageGraph::edge_count() const { return edges().size(); }

LanguageGraph build_graph(const SimilarityMatrix& sim, double theta, EdgeMode mode) {
  sim.validate();
  const auto n = static_cast<Eigen::Index>(sim.size());

  LanguageGraph g;
  g.languages = sim.languages;
  g.theta = theta;
  g.mode = mode;
  g.adjacency = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      // Read the upper triangle only so tiny asymmetries in the input cannot
      // produce a directed edge.
      const double s = sim.values(i, j);
      if (s >= theta) {
        const double w = mode == EdgeMode::Binary ? 1.0 : s;
        g.adjacency(i, j) = w;
        g.adjacency(j, i) = w;
      }
    }
  }
  g.degrees = g.adjacency.rowwise().sum();
  g.laplacian = -g.adjacency;
  g.laplacian.diagonal() = g.degrees;
  return g;
}

ComponentPartition components(const LanguageGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<bool> seen(n, false);
  ComponentPartition part;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<std::size_t> members;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    seen[start] = true;
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      members.push_back(u);
      for (std::size_t v = 0; v < n; ++v) {
        if (!seen[v] && graph.has_edge(u, v)) {
          seen[v] = true;
          frontier.push(v);
        }
      }
    }
    if (members.size() == 1) {
      part.singletons.push_back(start);
    } else {
      std::sort(members.begin(), members.end());
      part.subgraphs.push_back(std::move(members));
    }
  }
  return part;
}

void write_graph_json(std::ostream& out, const LanguageGraph& graph) {
  nlohmann::ordered_json doc;
  doc["theta"] = graph.theta;
  doc["languages"] = graph.languages;
  auto edges = nlohmann::ordered_json::array();
  auto weights = nlohmann::ordered_json::array();
  for (const auto& [i, j] : graph.edges()) {
    edges.push_back({i, j});
    weights.push_back(graph.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  }
  doc["edges"] = std::move(edges);
  if (graph.mode == EdgeMode::Weighted) doc["weights"] = std::move(weights);
  out << doc.dump(2) << '\n';
}

}  // namespace langmem::simgraph
