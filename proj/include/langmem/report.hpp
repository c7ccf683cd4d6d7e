#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "langmem/corpus.hpp"
#include "langmem/memscore.hpp"

// Orchestration of the analysis chain and rendering of its tables. Every
// number in a table comes from a module operation; this layer only selects
// inputs and formats results.
namespace langmem::report {

inline constexpr const char* kVersion = "0.3.0";
inline constexpr const char* kOutDirEnv = "LANGMEM_OUT_DIR";

/// Bad flags or unusable configuration (CLI exit code 1). Data problems
/// found while processing inputs are langmem::Error (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TokenScale { Raw, Log };

struct NamedPath {
  std::string name;
  std::string path;
};

struct RunConfig {
  std::string command;  // filter-corpus | score | subspace | graph | correlate | sweep |
                        // consistency | report
  std::string out_dir;
  std::string model = "theta";  // label in the first header cell of sweep tables

  // inputs
  std::string passages;
  std::string records;
  std::vector<NamedPath> record_runs;  // report: prompt-length label -> records
  std::string embeddings;
  std::string similarity;
  std::vector<NamedPath> reference_similarities;  // external matrices, per-layer comparison
  std::string scores;                             // long-format scores CSV
  std::vector<NamedPath> signals;                 // extra memorization signals
  std::string tokens;
  std::vector<NamedPath> runs;                    // consistency inputs, in order

  // lang-space
  std::optional<int> layer;  // default: final hidden layer present in the input
  bool all_layers = false;
  int rank = 1;

  // graphs
  std::optional<double> theta;
  std::vector<double> thetas;
  bool weighted_edges = false;
  bool include_singletons = true;
  TokenScale token_scale = TokenScale::Raw;

  // memorization
  std::vector<int> prompt_lengths = {50, 100, 150};
  std::optional<int> prompt_length;  // score: prefix length every causal record must have
  int suffix_length = 15;            // every causal suffix must have this length
  std::optional<std::set<memscore::Metric>> metrics;  // default: all applicable
  bool text_mode = false;

  // corpus
  corpus::FilterConfig filter;
  std::size_t quota = corpus::kDefaultQuota;
  std::size_t buffer_capacity = corpus::kDefaultBufferCapacity;
  std::uint64_t seed = 0;
};

/// Checks the fields the selected command needs. Throws ConfigError.
void validate(const RunConfig& config);

/// Reads a `report` configuration file (JSON with RunConfig field names in
/// snake_case) on top of `base`.
RunConfig load_report_config(const std::string& path, RunConfig base);

struct ReportBundle {
  std::map<std::string, std::string> tables;    // relative path -> file contents
  std::map<std::string, std::string> streamed;  // already written: relative path -> sha256
  nlohmann::ordered_json manifest;
};

/// Runs the configured command and returns its tables plus a manifest of the
/// configuration, input digests and output digests. Same inputs, same bytes.
/// `filter-corpus` streams its sampled passages straight into `out_dir`.
ReportBundle run(const RunConfig& config);

/// Writes every table and `manifest.json` under `out_dir`.
void write_bundle(const ReportBundle& bundle, const std::filesystem::path& out_dir);

/// Lower-case hex SHA-256 of a file's bytes.
std::string file_digest(const std::string& path);
std::string text_digest(const std::string& text);

/// Row labels used by the correlation tables.
std::string table1_label(const std::string& signal_name);
std::string sweep_label(const std::string& signal_name);

}  // namespace langmem::report
