#pragma once

#include <Eigen/Dense>

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "langmem/simgraph.hpp"

namespace langmem::graphcorr {

/// One scalar per language (a memorization rate, a token count, ...).
struct LanguageSignal {
  std::string name;
  std::vector<std::string> languages;
  Eigen::VectorXd values;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  void validate() const;
};

/// Reorders `signal` to `order`. Missing or extra languages are a
/// LanguageSetMismatch.
LanguageSignal align(const LanguageSignal& signal, const std::vector<std::string>& order);

/// Natural log of every value; all values must be positive.
LanguageSignal log_scaled(const LanguageSignal& signal);

/// x^T L x = sum over edges of A_ij (x_i - x_j)^2.
double smoothness(const simgraph::LanguageGraph& graph, const LanguageSignal& x);

/// x^T L y = sum over edges of A_ij (x_i - x_j)(y_i - y_j).
double cross_smoothness(const simgraph::LanguageGraph& graph, const LanguageSignal& x,
                        const LanguageSignal& y);

/// Smoothness at or below this is treated as a constant signal on every edge.
inline constexpr double kSmoothnessEpsilon = 1e-12;

/// rho_G = m^T L t / sqrt((m^T L m)(t^T L t)). Throws DegenerateSmoothness,
/// naming the offending signal, when either smoothness is <= 1e-12.
double graph_correlation(const simgraph::LanguageGraph& graph, const LanguageSignal& m,
                         const LanguageSignal& t);

/// Flat sample Pearson correlation between two signals over the same
/// language ordering.
double pearson(const LanguageSignal& x, const LanguageSignal& y);

/// `language,value` with a header row.
LanguageSignal read_signal_csv(std::istream& in, const std::string& name);
LanguageSignal load_signal_csv(const std::string& path, const std::string& name);
void write_signal_csv(std::ostream& out, const LanguageSignal& signal);

}  // namespace langmem::graphcorr
