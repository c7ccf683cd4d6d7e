#include "langmem/topo.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "langmem/error.hpp"
#include "langmem/stats.hpp"

namespace langmem::topo {

namespace {

void check_signal(const simgraph::LanguageGraph& graph, const graphcorr::LanguageSignal& s) {
  if (s.size() != graph.size()) {
    throw Error(ErrorCode::DimensionMismatch, "signal '" + s.name + "' has " +
                                                  std::to_string(s.size()) +
                                                  " values for " + std::to_string(graph.size()) +
                                                  " languages");
  }
  if (!s.languages.empty() && s.languages != graph.languages) {
    throw Error(ErrorCode::LanguageSetMismatch,
                "signal '" + s.name + "' is not ordered like the graph's languages");
  }
}

// Sweep cells record these as "undefined"; anything else is a real error.
bool is_cell_degeneracy(ErrorCode code) {
  return code == ErrorCode::DegenerateSmoothness || code == ErrorCode::DegenerateVariance ||
         code == ErrorCode::InsufficientGroups || code == ErrorCode::InsufficientData;
}

template <typename F>
Cell guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (is_cell_degeneracy(e.code())) return std::nullopt;
    throw;
  }
}

}  // namespace

double aggregate_subgraph(const simgraph::LanguageGraph& graph,
                          std::span<const std::size_t> members,
                          const graphcorr::LanguageSignal& signal) {
  check_signal(graph, signal);
  if (members.empty()) throw Error(ErrorCode::InvalidSubgraph, "empty member set");
  const std::set<std::size_t> inside(members.begin(), members.end());
  if (inside.size() != members.size()) {
    throw Error(ErrorCode::InvalidSubgraph, "member set contains duplicates");
  }
  if (*inside.rbegin() >= graph.size()) {
    throw Error(ErrorCode::InvalidSubgraph, "member index out of range");
  }

  // Closed: no edge leaves the member set.
  for (std::size_t u : inside) {
    for (std::size_t v = 0; v < graph.size(); ++v) {
      if (graph.has_edge(u, v) && !inside.count(v)) {
        throw Error(ErrorCode::InvalidSubgraph, "members are not a whole component: '" +
                                                    graph.languages[u] + "' links to '" +
                                                    graph.languages[v] + "'");
      }
    }
  }

  // Connected: a walk from the first member reaches all of them.
  std::set<std::size_t> reached{*inside.begin()};
  std::queue<std::size_t> frontier;
  frontier.push(*inside.begin());
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : inside) {
      if (!reached.count(v) && graph.has_edge(u, v)) {
        reached.insert(v);
        frontier.push(v);
      }
    }
  }
  if (reached.size() != inside.size()) {
    throw Error(ErrorCode::InvalidSubgraph, "members are not connected");
  }

  if (inside.size() == 1) return signal.values(static_cast<Eigen::Index>(*inside.begin()));

  double weighted = 0.0;
  double total_degree = 0.0;
  for (std::size_t u : inside) {
    double degree = 0.0;
    for (std::size_t v : inside) {
      if (graph.has_edge(u, v)) degree += 1.0;
    }
    weighted += degree * signal.values(static_cast<Eigen::Index>(u));
    total_degree += degree;
  }
  return weighted / total_degree;
}

std::vector<SubgraphSummary> summarize(const simgraph::LanguageGraph& graph,
                                       const simgraph::ComponentPartition& partition,
                                       std::span<const graphcorr::LanguageSignal> signals,
                                       bool include_singletons) {
  std::vector<SubgraphSummary> out;
  auto add = [&](std::vector<std::size_t> members, bool singleton) {
    SubgraphSummary s;
    s.members = std::move(members);
    s.is_singleton = singleton;
    for (const auto& signal : signals) {
      s.aggregated[signal.name] = aggregate_subgraph(graph, s.members, signal);
    }
    out.push_back(std::move(s));
  };
  for (const auto& group : partition.subgraphs) add(group, false);
  if (include_singletons) {
    for (std::size_t i : partition.singletons) add({i}, true);
  }
  return out;
}

double intra_topo_correlation(const simgraph::LanguageGraph& graph,
                              const graphcorr::LanguageSignal& m,
                              const graphcorr::LanguageSignal& t) {
  return graphcorr::graph_correlation(graph, m, t);
}

double cross_topo_correlation(const simgraph::LanguageGraph& graph,
                              const graphcorr::LanguageSignal& m,
                              const graphcorr::LanguageSignal& t, bool include_singletons) {
  check_signal(graph, m);
  check_signal(graph, t);
  const auto partition = simgraph::components(graph);
  const std::size_t groups =
      partition.subgraphs.size() + (include_singletons ? partition.singletons.size() : 0);
  if (groups < 3) {
    throw Error(ErrorCode::InsufficientGroups,
                std::to_string(groups) + " language groups, need at least 3");
  }
  std::vector<double> ms, ts;
  auto add = [&](std::span<const std::size_t> members) {
    ms.push_back(aggregate_subgraph(graph, members, m));
    ts.push_back(aggregate_subgraph(graph, members, t));
  };
  for (const auto& group : partition.subgraphs) add(group);
  if (include_singletons) {
    for (std::size_t i : partition.singletons) add(std::span<const std::size_t>(&i, 1));
  }
  return stats::pearson(ts, ms);
}

std::vector<SweepRow> threshold_sweep(const SimilarityMatrix& sim,
                                      std::span<const graphcorr::LanguageSignal> memorization,
                                      const graphcorr::LanguageSignal& tokens,
                                      std::span<const double> thetas,
                                      const SweepOptions& options) {
  if (thetas.empty()) throw Error(ErrorCode::InvalidArgument, "no thresholds to sweep");
  for (double theta : thetas) {
    if (!(theta >= -1.0 && theta <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "threshold " + std::to_string(theta) + " outside [-1, 1]");
    }
  }
  const auto t = graphcorr::align(tokens, sim.languages);
  std::vector<graphcorr::LanguageSignal> signals;
  for (const auto& m : memorization) signals.push_back(graphcorr::align(m, sim.languages));

  std::vector<SweepRow> rows;
  rows.reserve(thetas.size());
  for (double theta : thetas) {
    const auto graph = simgraph::build_graph(sim, theta, options.edge_mode);
    const auto partition = simgraph::components(graph);
    SweepRow row;
    row.theta = theta;
    row.subgraph_count = partition.subgraphs.size();
    row.singleton_count = partition.singletons.size();
    for (const auto& m : signals) {
      row.intra[m.name] = guarded([&] { return intra_topo_correlation(graph, m, t); });
      row.cross[m.name] =
          guarded([&] { return cross_topo_correlation(graph, m, t, options.include_singletons); });
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double signal_consistency(const graphcorr::LanguageSignal& a, const graphcorr::LanguageSignal& b) {
  const auto matched = graphcorr::align(b, a.languages);
  return stats::pearson({a.values.data(), a.size()}, {matched.values.data(), matched.size()});
}

}  // namespace langmem::topo
