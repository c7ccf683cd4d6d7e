#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "langmem/graphcorr.hpp"
#include "langmem/similarity.hpp"
#include "langmem/simgraph.hpp"

// Intra-topology (edge-connected languages) and cross-topology (between
// disconnected language groups) correlation analysis.
namespace langmem::topo {

struct SubgraphSummary {
  std::vector<std::size_t> members;
  std::map<std::string, double> aggregated;  // signal name -> representative value
  bool is_singleton = false;

  std::size_t size() const { return members.size(); }
};

/// Degree-weighted mean of `signal` over one connected component, with
/// degrees counted on edges inside the component. A singleton returns its
/// own value. Throws InvalidSubgraph unless `members` is exactly one
/// component of `graph`.
double aggregate_subgraph(const simgraph::LanguageGraph& graph,
                          std::span<const std::size_t> members,
                          const graphcorr::LanguageSignal& signal);

/// One summary per group of `partition`, subgraphs first, then singletons
/// when `include_singletons` is set.
std::vector<SubgraphSummary> summarize(const simgraph::LanguageGraph& graph,
                                       const simgraph::ComponentPartition& partition,
                                       std::span<const graphcorr::LanguageSignal> signals,
                                       bool include_singletons);

/// Identical to graph_correlation: the Laplacian only couples connected pairs.
double intra_topo_correlation(const simgraph::LanguageGraph& graph,
                              const graphcorr::LanguageSignal& m,
                              const graphcorr::LanguageSignal& t);

/// Pearson over per-group representatives (t_bar, m_bar). Needs at least
/// three groups.
double cross_topo_correlation(const simgraph::LanguageGraph& graph,
                              const graphcorr::LanguageSignal& m,
                              const graphcorr::LanguageSignal& t, bool include_singletons = true);

using Cell = std::optional<double>;  // nullopt renders as "undefined"

struct SweepRow {
  double theta = 0.0;
  std::size_t subgraph_count = 0;   // components with at least two languages
  std::size_t singleton_count = 0;  // components of size one
  std::map<std::string, Cell> intra;  // metric -> rho_G
  std::map<std::string, Cell> cross;  // metric -> Pearson over group representatives
};

struct SweepOptions {
  bool include_singletons = true;
  simgraph::EdgeMode edge_mode = simgraph::EdgeMode::Binary;
};

/// Default sweep thresholds.
inline const std::vector<double> kDefaultSweepThetas = {0.31, 0.33, 0.35, 0.37,
                                                        0.39, 0.41, 0.43, 0.45};

/// One row per theta. Every memorization signal is correlated against
/// `tokens`; degenerate cells become nullopt instead of aborting the sweep.
std::vector<SweepRow> threshold_sweep(const SimilarityMatrix& sim,
                                      std::span<const graphcorr::LanguageSignal> memorization,
                                      const graphcorr::LanguageSignal& tokens,
                                      std::span<const double> thetas,
                                      const SweepOptions& options = {});

/// Pearson between two runs' per-language values, matched by language.
double signal_consistency(const graphcorr::LanguageSignal& a, const graphcorr::LanguageSignal& b);

}  // namespace langmem::topo
