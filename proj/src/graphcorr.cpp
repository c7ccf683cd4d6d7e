#include "langmem/graphcorr.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include "langmem/csv.hpp"
#include "langmem/error.hpp"
#include "langmem/stats.hpp"

namespace langmem::graphcorr {

namespace {

std::string label(const LanguageSignal& s) { return s.name.empty() ? "<unnamed>" : s.name; }

void check_against(const simgraph::LanguageGraph& graph, const LanguageSignal& s) {
  if (s.size() != graph.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "signal '" + label(s) + "' has " + std::to_string(s.size()) +
                    " values for a graph of " + std::to_string(graph.size()) + " languages");
  }
  if (!s.languages.empty() && s.languages != graph.languages) {
    throw Error(ErrorCode::LanguageSetMismatch,
                "signal '" + label(s) + "' is not ordered like the graph's languages");
  }
}

}  // namespace

void LanguageSignal::validate() const {
  if (!languages.empty() && languages.size() != size()) {
    throw Error(ErrorCode::DimensionMismatch, "signal '" + label(*this) + "' has " +
                                                  std::to_string(languages.size()) +
                                                  " languages but " +
                                                  std::to_string(size()) + " values");
  }
  if (!values.allFinite()) {
    throw Error(ErrorCode::NumericalError, "signal '" + label(*this) + "' has non-finite values");
  }
}

LanguageSignal align(const LanguageSignal& signal, const std::vector<std::string>& order) {
  signal.validate();
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < signal.languages.size(); ++i) {
    index.emplace(signal.languages[i], static_cast<Eigen::Index>(i));
  }
  std::vector<std::string> missing;
  LanguageSignal out{signal.name, order, Eigen::VectorXd(static_cast<Eigen::Index>(order.size()))};
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = index.find(order[i]);
    if (it == index.end()) {
      missing.push_back(order[i]);
      continue;
    }
    out.values(static_cast<Eigen::Index>(i)) = signal.values(it->second);
  }
  const std::set<std::string> wanted(order.begin(), order.end());
  std::vector<std::string> extra;
  for (const auto& l : signal.languages) {
    if (!wanted.count(l)) extra.push_back(l);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "signal '" + label(signal) + "' does not match the language set";
    auto list = [](const std::vector<std::string>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size() && i < 10; ++i) s += (i ? " " : "") + v[i];
      if (v.size() > 10) s += " ...";
      return s;
    };
    if (!missing.empty()) msg += "; missing: " + list(missing);
    if (!extra.empty()) msg += "; extra: " + list(extra);
    throw Error(ErrorCode::LanguageSetMismatch, msg);
  }
  return out;
}

LanguageSignal log_scaled(const LanguageSignal& signal) {
  LanguageSignal out = signal;
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    if (!(out.values(i) > 0.0)) {
      const std::string who = signal.languages.empty()
                                  ? std::to_string(i)
                                  : signal.languages[static_cast<std::size_t>(i)];
      throw Error(ErrorCode::NumericalError,
                  "log scale needs positive values; '" + label(signal) + "' is " +
                      std::to_string(out.values(i)) + " for " + who);
    }
    out.values(i) = std::log(out.values(i));
  }
  return out;
}

double smoothness(const simgraph::LanguageGraph& graph, const LanguageSignal& x) {
  check_against(graph, x);
  return x.values.dot(graph.laplacian * x.values);
}

double cross_smoothness(const simgraph::LanguageGraph& graph, const LanguageSignal& x,
                        const LanguageSignal& y) {
  check_against(graph, x);
  check_against(graph, y);
  return x.values.dot(graph.laplacian * y.values);
}

double graph_correlation(const simgraph::LanguageGraph& graph, const LanguageSignal& m,
                         const LanguageSignal& t) {
  const double smooth_m = smoothness(graph, m);
  const double smooth_t = smoothness(graph, t);
  if (!(smooth_m > kSmoothnessEpsilon)) {
    throw Error(ErrorCode::DegenerateSmoothness,
                "signal '" + label(m) + "' is constant across every edge");
  }
  if (!(smooth_t > kSmoothnessEpsilon)) {
    throw Error(ErrorCode::DegenerateSmoothness,
                "signal '" + label(t) + "' is constant across every edge");
  }
  return cross_smoothness(graph, m, t) / std::sqrt(smooth_m * smooth_t);
}

double pearson(const LanguageSignal& x, const LanguageSignal& y) {
  if (!x.languages.empty() && !y.languages.empty() && x.languages != y.languages) {
    throw Error(ErrorCode::LanguageSetMismatch,
                "signals '" + label(x) + "' and '" + label(y) + "' use different languages");
  }
  return stats::pearson({x.values.data(), x.size()}, {y.values.data(), y.size()});
}

LanguageSignal read_signal_csv(std::istream& in, const std::string& name) {
  const auto rows = csv::read_all(in);
  if (rows.empty()) throw Error(ErrorCode::ParseError, "signal CSV is empty");
  if (rows.front().size() < 2 || rows.front()[0] != "language") {
    throw Error(ErrorCode::ParseError, "signal CSV header must be 'language,value'");
  }
  LanguageSignal s;
  s.name = name;
  std::vector<double> values;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 2) {
      throw Error(ErrorCode::ParseError, "signal CSV row " + std::to_string(r + 1) +
                                             " must have 2 fields");
    }
    if (!seen.insert(row[0]).second) {
      throw Error(ErrorCode::InvalidRecord, "signal CSV repeats language '" + row[0] + "'");
    }
    s.languages.push_back(row[0]);
    values.push_back(csv::parse_double(row[1], "signal CSV row " + std::to_string(r + 1)));
  }
  s.values = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return s;
}

LanguageSignal load_signal_csv(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return read_signal_csv(in, name);
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

void write_signal_csv(std::ostream& out, const LanguageSignal& signal) {
  out << "language,value\n";
  for (std::size_t i = 0; i < signal.size(); ++i) {
    out << csv::escape(signal.languages[i]) << ','
        << csv::format_number(signal.values(static_cast<Eigen::Index>(i)), 9) << '\n';
  }
}

}  // namespace langmem::graphcorr
