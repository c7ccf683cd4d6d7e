#pragma once

#include <random>
#include <utility>
#include <vector>

#include "langmem/graphcorr.hpp"
#include "langmem/simgraph.hpp"
#include "oracles.hpp"

namespace testing_graphs {

// Binary graph with exactly the listed edges.
inline langmem::simgraph::LanguageGraph from_edges(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  langmem::SimilarityMatrix sim;
  sim.languages = oracle::names(n);
  sim.values = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                         static_cast<Eigen::Index>(n));
  for (auto [i, j] : edges) {
    sim.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    sim.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return langmem::simgraph::build_graph(sim, 0.5);
}

inline langmem::simgraph::LanguageGraph random_graph(std::mt19937_64& rng, std::size_t n,
                                                     double p) {
  std::bernoulli_distribution keep(p);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (keep(rng)) edges.emplace_back(i, j);
  return from_edges(n, edges);
}

inline langmem::graphcorr::LanguageSignal signal(const std::vector<double>& v,
                                                 const std::string& name = "s") {
  langmem::graphcorr::LanguageSignal s;
  s.name = name;
  s.languages = oracle::names(v.size());
  s.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  return s;
}

inline std::vector<double> values(const langmem::graphcorr::LanguageSignal& s) {
  return {s.values.data(), s.values.data() + s.values.size()};
}

}  // namespace testing_graphs
