// Command-line front end: parses flags into a RunConfig, runs it and writes
// the bundle. Exit codes: 0 success, 1 bad configuration, 2 bad data.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "langmem/error.hpp"
#include "langmem/report.hpp"

namespace {

using langmem::report::ConfigError;
using langmem::report::NamedPath;
using langmem::report::RunConfig;

std::vector<NamedPath> parse_named(const std::vector<std::string>& items, const char* flag) {
  std::vector<NamedPath> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw ConfigError(std::string(flag) + " expects NAME=PATH, got '" + item + "'");
    }
    out.push_back({item.substr(0, eq), item.substr(eq + 1)});
  }
  return out;
}

struct Flags {
  std::vector<std::string> signals, compare, runs, metrics;
  std::string config;
  bool exclude_singletons = false;
  bool log_tokens = false;
};

void add_out(CLI::App* sub, RunConfig& c) {
  sub->add_option("--out", c.out_dir, "Output directory (default: $LANGMEM_OUT_DIR)");
}

void add_graph_options(CLI::App* sub, RunConfig& c, Flags& f) {
  sub->add_option("--similarity", c.similarity, "Language similarity matrix CSV");
  sub->add_option("--tokens", c.tokens, "Token-count signal CSV (language,value)");
  sub->add_option("--scores", c.scores, "Long-format scores CSV from `score`");
  sub->add_option("--signal", f.signals, "Extra memorization signal NAME=PATH");
  sub->add_flag("--weighted", c.weighted_edges, "Weight edges by similarity");
  sub->add_flag("--exclude-singletons", f.exclude_singletons,
                "Leave isolated languages out of cross-topology correlations");
  sub->add_flag("--log-tokens", f.log_tokens, "Use log token counts");
}

void add_score_options(CLI::App* sub, RunConfig& c, Flags& f) {
  sub->add_option("--prompt-length", c.prompt_length, "Required prefix length of causal records");
  sub->add_option("--suffix-length", c.suffix_length, "Required suffix length of causal records")
      ->capture_default_str();
  sub->add_option("--metrics", f.metrics, "Metrics to compute (EM, PM, RM_BLEU, RM_ROUGE_L)")
      ->delimiter(',');
  sub->add_flag("--text-mode", c.text_mode, "Read *_text fields and tokenize on whitespace");
}

void add_subspace_options(CLI::App* sub, RunConfig& c, Flags& f) {
  sub->add_option("--layer", c.layer, "Layer to analyse (default: highest present)");
  sub->add_flag("--all-layers", c.all_layers, "Also write one similarity matrix per layer");
  sub->add_option("--rank", c.rank, "Language-agnostic subspace rank")->capture_default_str();
  sub->add_option("--compare", f.compare, "Reference similarity NAME=PATH to correlate against");
}

int run_cli(int argc, char** argv) {
  RunConfig c;
  Flags f;
  CLI::App app{"Memorization and language-similarity analysis"};
  app.set_version_flag("--version", langmem::report::kVersion);
  app.require_subcommand(1);

  auto* filter = app.add_subcommand("filter-corpus", "Filter and sample candidate passages");
  add_out(filter, c);
  filter->add_option("--passages", c.passages, "Candidate passages JSONL")->required();
  filter->add_option("--quota", c.quota, "Samples per language")->capture_default_str();
  filter->add_option("--buffer", c.buffer_capacity, "Shuffle buffer capacity per language")
      ->capture_default_str();
  filter->add_option("--seed", c.seed, "Sampling seed")->capture_default_str();
  filter->add_option("--min-length", c.filter.min_length, "Minimum passage length (code points)")
      ->capture_default_str();
  filter->add_option("--digit-run", c.filter.digit_run_length, "Rejecting digit-run length")
      ->capture_default_str();
  filter->add_option("--max-garbled", c.filter.max_garbled_fraction,
                     "Maximum garbled character fraction")
      ->capture_default_str();
  filter->add_option("--min-lid-confidence", c.filter.min_lid_confidence)->capture_default_str();
  filter->add_option("--min-lid-proportion", c.filter.min_lid_proportion)->capture_default_str();

  auto* score = app.add_subcommand("score", "Per-language memorization scores");
  add_out(score, c);
  score->add_option("--records", c.records, "Memorization records JSONL")->required();
  add_score_options(score, c, f);

  auto* subspace = app.add_subcommand("subspace", "Language similarity from mean embeddings");
  add_out(subspace, c);
  subspace->add_option("--embeddings", c.embeddings, "Mean embeddings JSONL")->required();
  add_subspace_options(subspace, c, f);

  auto* graph = app.add_subcommand("graph", "Threshold a similarity matrix into a graph");
  add_out(graph, c);
  graph->add_option("--similarity", c.similarity, "Language similarity matrix CSV")->required();
  graph->add_option("--theta", c.theta, "Edge threshold")->required();
  graph->add_flag("--weighted", c.weighted_edges, "Weight edges by similarity");

  auto* correlate = app.add_subcommand("correlate", "Pearson and graph correlation per metric");
  add_out(correlate, c);
  correlate->add_option("--theta", c.theta, "Edge threshold")->required();
  add_graph_options(correlate, c, f);

  auto* sweep = app.add_subcommand("sweep", "Intra/cross topology correlations over thresholds");
  add_out(sweep, c);
  sweep->add_option("--thetas", c.thetas, "Thresholds (default 0.31..0.45)")->delimiter(',');
  sweep->add_option("--model", c.model, "Label for the table corner cell")->capture_default_str();
  add_graph_options(sweep, c, f);

  auto* consistency = app.add_subcommand("consistency", "Agreement of scores across runs");
  add_out(consistency, c);
  consistency->add_option("--run", f.runs, "Scores of one run LABEL=PATH (repeat)")->required();

  auto* report = app.add_subcommand("report", "Full chain from a JSON configuration");
  add_out(report, c);
  report->add_option("--config", f.config, "Report configuration JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    c.command = app.get_subcommands().front()->get_name();
    if (c.command == "report") c = langmem::report::load_report_config(f.config, c);
    if (!f.signals.empty()) c.signals = parse_named(f.signals, "--signal");
    if (!f.compare.empty()) c.reference_similarities = parse_named(f.compare, "--compare");
    if (!f.runs.empty()) c.runs = parse_named(f.runs, "--run");
    if (f.exclude_singletons) c.include_singletons = false;
    if (f.log_tokens) c.token_scale = langmem::report::TokenScale::Log;
    if (!f.metrics.empty()) {
      std::set<langmem::memscore::Metric> metrics;
      for (const auto& name : f.metrics) {
        const auto m = langmem::memscore::parse_metric(name);
        if (!m) throw ConfigError("unknown metric '" + name + "'");
        metrics.insert(*m);
      }
      c.metrics = metrics;
    }
    if (c.out_dir.empty()) {
      if (const char* env = std::getenv(langmem::report::kOutDirEnv)) c.out_dir = env;
    }
    if (c.out_dir.empty()) {
      throw ConfigError(std::string("--out is required when ") + langmem::report::kOutDirEnv +
                        " is unset");
    }
    const auto bundle = langmem::report::run(c);
    langmem::report::write_bundle(bundle, c.out_dir);
    std::cout << "wrote " << bundle.tables.size() + bundle.streamed.size() + 1 << " files to "
              << c.out_dir << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const langmem::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
