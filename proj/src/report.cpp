#include "langmem/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include "langmem/csv.hpp"
#include "langmem/error.hpp"
#include "langmem/graphcorr.hpp"
#include "langmem/lang_space.hpp"
#include "langmem/simgraph.hpp"
#include "langmem/topo.hpp"

namespace langmem::report {

namespace {

namespace fs = std::filesystem;
using graphcorr::LanguageSignal;
using Json = nlohmann::ordered_json;
using memscore::Metric;

const std::set<std::string> kCommands = {"filter-corpus", "score",       "subspace",
                                         "graph",         "correlate",   "sweep",
                                         "consistency",   "report"};

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorCode::IoError, "cannot initialise SHA-256");
    }
  }
  void update(const void* data, std::size_t size) {
    EVP_DigestUpdate(ctx_.get(), data, size);
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kDigits[md[i] >> 4]);
      out.push_back(kDigits[md[i] & 0xF]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string render(const std::vector<csv::Row>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += csv::join(row);
    out.push_back('\n');
  }
  return out;
}

std::string cell(const topo::Cell& value) {
  return value ? csv::format_number(*value) : std::string(csv::kUndefined);
}

// Degeneracies become "undefined" cells; anything else aborts the command.
template <typename F>
topo::Cell guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::DegenerateSmoothness:
      case ErrorCode::DegenerateVariance:
      case ErrorCode::InsufficientGroups:
      case ErrorCode::InsufficientData:
      case ErrorCode::InsufficientOverlap:
        return std::nullopt;
      default:
        throw;
    }
  }
}

std::string metric_order_key(const std::string& name) {
  for (std::size_t i = 0; i < std::size(memscore::kAllMetrics); ++i) {
    if (memscore::to_string(memscore::kAllMetrics[i]) == name) return std::to_string(i);
  }
  return "z" + name;
}

void sort_signals(std::vector<LanguageSignal>& signals) {
  std::stable_sort(signals.begin(), signals.end(), [](const auto& a, const auto& b) {
    return metric_order_key(a.name) < metric_order_key(b.name);
  });
}

std::vector<LanguageSignal> signals_from_scores(std::span<const memscore::LanguageScore> scores) {
  std::map<std::string, std::pair<std::vector<std::string>, std::vector<double>>> by_metric;
  for (const auto& s : scores) {
    auto& [langs, values] = by_metric[std::string(memscore::to_string(s.metric))];
    langs.push_back(s.language);
    values.push_back(s.value);
  }
  std::vector<LanguageSignal> out;
  for (auto& [name, lv] : by_metric) {
    LanguageSignal sig;
    sig.name = name;
    sig.languages = std::move(lv.first);
    sig.values = Eigen::Map<Eigen::VectorXd>(lv.second.data(),
                                             static_cast<Eigen::Index>(lv.second.size()));
    out.push_back(std::move(sig));
  }
  sort_signals(out);
  return out;
}

// Accepts the long scores table (language,metric,value,sample_count) or a
// single signal (language,value).
std::vector<LanguageSignal> load_signal_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  const auto rows = csv::read_all(in);
  if (rows.empty()) throw Error(ErrorCode::ParseError, path + ": empty table");
  const auto& header = rows.front();
  if (header.size() >= 3 && header[0] == "language" && header[1] == "metric" &&
      header[2] == "value") {
    std::vector<memscore::LanguageScore> scores;
    std::map<std::string, std::vector<std::pair<std::string, double>>> by_metric;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (row.size() < 3) {
        throw Error(ErrorCode::ParseError, path + ": row " + std::to_string(r + 1) + " is short");
      }
      by_metric[row[1]].emplace_back(
          row[0], csv::parse_double(row[2], path + " row " + std::to_string(r + 1)));
    }
    std::vector<LanguageSignal> out;
    for (auto& [name, entries] : by_metric) {
      LanguageSignal sig;
      sig.name = name;
      sig.values.resize(static_cast<Eigen::Index>(entries.size()));
      for (std::size_t i = 0; i < entries.size(); ++i) {
        sig.languages.push_back(entries[i].first);
        sig.values(static_cast<Eigen::Index>(i)) = entries[i].second;
      }
      out.push_back(std::move(sig));
    }
    sort_signals(out);
    return out;
  }
  return {graphcorr::load_signal_csv(path, "value")};
}

Json config_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  j["model"] = c.model;
  auto paths = [](const std::vector<NamedPath>& v) {
    Json a = Json::array();
    for (const auto& np : v) a.push_back({{"name", np.name}, {"path", np.path}});
    return a;
  };
  j["passages"] = c.passages;
  j["records"] = c.records;
  j["record_runs"] = paths(c.record_runs);
  j["embeddings"] = c.embeddings;
  j["similarity"] = c.similarity;
  j["reference_similarities"] = paths(c.reference_similarities);
  j["scores"] = c.scores;
  j["signals"] = paths(c.signals);
  j["tokens"] = c.tokens;
  j["runs"] = paths(c.runs);
  j["layer"] = c.layer ? Json(*c.layer) : Json("final");
  j["all_layers"] = c.all_layers;
  j["rank"] = c.rank;
  j["theta"] = c.theta ? Json(*c.theta) : Json(nullptr);
  j["thetas"] = c.thetas;
  j["edge_mode"] = c.weighted_edges ? "weighted" : "binary";
  j["include_singletons"] = c.include_singletons;
  j["token_scale"] = c.token_scale == TokenScale::Log ? "log" : "raw";
  j["prompt_lengths"] = c.prompt_lengths;
  j["prompt_length"] = c.prompt_length ? Json(*c.prompt_length) : Json(nullptr);
  j["suffix_length"] = c.suffix_length;
  if (c.metrics) {
    Json m = Json::array();
    for (Metric metric : *c.metrics) m.push_back(memscore::to_string(metric));
    j["metrics"] = m;
  } else {
    j["metrics"] = "applicable";
  }
  j["text_mode"] = c.text_mode;
  j["filter"] = {{"min_length", c.filter.min_length},
                 {"url_markers", c.filter.url_markers},
                 {"digit_run_length", c.filter.digit_run_length},
                 {"repeat_min_length", c.filter.repeat_min_length},
                 {"repeat_min_count", c.filter.repeat_min_count},
                 {"max_garbled_fraction", c.filter.max_garbled_fraction},
                 {"min_lid_confidence", c.filter.min_lid_confidence},
                 {"min_lid_proportion", c.filter.min_lid_proportion}};
  j["quota"] = c.quota;
  j["buffer_capacity"] = c.buffer_capacity;
  j["seed"] = c.seed;
  return j;
}

std::string safe_file_stem(const std::string& name) {
  std::string out;
  for (char ch : name) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '-' || ch == '_' || ch == '.';
    out.push_back(ok ? ch : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

class Pipeline {
 public:
  explicit Pipeline(const RunConfig& config) : config_(config) {}

  ReportBundle finish() {
    Json outputs = Json::array();
    std::map<std::string, std::string> digests = bundle_.streamed;
    for (const auto& [name, text] : bundle_.tables) digests[name] = text_digest(text);
    for (const auto& [name, digest] : digests) {
      outputs.push_back({{"path", name}, {"sha256", digest}});
    }
    Json manifest;
    manifest["tool"] = "langmem";
    manifest["version"] = kVersion;
    manifest["command"] = config_.command;
    manifest["config"] = config_json(config_);
    manifest["inputs"] = inputs_;
    manifest["outputs"] = std::move(outputs);
    bundle_.manifest = std::move(manifest);
    return std::move(bundle_);
  }

  void filter_corpus() {
    const fs::path dir = fs::path(config_.out_dir) / "sampled";
    fs::create_directories(dir);
    std::map<std::string, std::ofstream> files;
    auto emit = [&](const corpus::CandidatePassage& p) {
      auto it = files.find(p.language);
      if (it == files.end()) {
        const fs::path path = dir / (safe_file_stem(p.language) + ".jsonl");
        it = files.emplace(p.language, std::ofstream(path, std::ios::binary | std::ios::trunc)).first;
        if (!it->second) throw Error(ErrorCode::IoError, "cannot write " + path.string());
      }
      corpus::write_passage_jsonl(it->second, p);
    };

    corpus::ShuffleSampler sampler(config_.quota, config_.buffer_capacity, config_.seed, emit);
    std::map<std::string, std::map<corpus::RejectReason, std::size_t>> verdicts;
    record_input("passages", config_.passages);
    std::ifstream in(config_.passages);
    try {
      corpus::read_passages_jsonl(in, [&](corpus::CandidatePassage p) {
        sampler.expect_language(p.language);
        const auto verdict = corpus::filter_passage(p, config_.filter);
        ++verdicts[p.language][verdict.reason];
        if (verdict.accepted) sampler.add(std::move(p));
      });
    } catch (const Error& e) {
      throw e.with_context(config_.passages);
    }
    const auto result = sampler.finish();
    for (auto& [language, out] : files) {
      out.close();
      const std::string rel = "sampled/" + safe_file_stem(language) + ".jsonl";
      bundle_.streamed[rel] = file_digest((fs::path(config_.out_dir) / rel).string());
    }

    std::vector<csv::Row> shortfall{{"language", "requested", "obtained"}};
    for (const auto& s : result.shortfall) {
      shortfall.push_back({s.language, std::to_string(s.requested), std::to_string(s.obtained)});
    }
    bundle_.tables["shortfall.csv"] = render(shortfall);

    std::vector<csv::Row> stats{{"language", "reason", "count"}};
    constexpr corpus::RejectReason kReasons[] = {
        corpus::RejectReason::Ok,          corpus::RejectReason::TooShort,
        corpus::RejectReason::Url,         corpus::RejectReason::DigitRun,
        corpus::RejectReason::RepeatedString, corpus::RejectReason::Garbled,
        corpus::RejectReason::LidConfidence, corpus::RejectReason::LidProportion};
    for (const auto& [language, counts] : verdicts) {
      for (auto reason : kReasons) {
        const auto it = counts.find(reason);
        stats.push_back({language, std::string(corpus::to_string(reason)),
                         std::to_string(it == counts.end() ? 0 : it->second)});
      }
    }
    bundle_.tables["filter_stats.csv"] = render(stats);

    std::vector<csv::Row> sampled{{"language", "sampled"}};
    for (const auto& [language, count] : result.counts) {
      sampled.push_back({language, std::to_string(count)});
    }
    bundle_.tables["sampled_counts.csv"] = render(sampled);
  }

  std::vector<LanguageSignal> score(const std::string& records_path, const std::string& prefix,
                                    const std::string& run_label) {
    record_input("records", records_path);
    const auto records =
        memscore::load_records_jsonl(records_path, {.text_mode = config_.text_mode});
    for (const auto& r : records) {
      if (r.architecture != memscore::Architecture::Causal) continue;
      const auto where = records_path + ": record '" + r.sample_id + "' (" + r.language + ")";
      if (r.reference.size() != static_cast<std::size_t>(config_.suffix_length)) {
        throw Error(ErrorCode::InvalidRecord,
                    where + " has a " + std::to_string(r.reference.size()) +
                        "-token suffix, expected " + std::to_string(config_.suffix_length));
      }
      if (config_.prompt_length &&
          r.prefix.size() != static_cast<std::size_t>(*config_.prompt_length)) {
        throw Error(ErrorCode::InvalidRecord,
                    where + " has a " + std::to_string(r.prefix.size()) +
                        "-token prefix, expected " + std::to_string(*config_.prompt_length));
      }
    }
    const auto metrics =
        config_.metrics.value_or(memscore::applicable_metrics(records.front().architecture));
    std::vector<memscore::LanguageScore> scores;
    try {
      scores = memscore::language_scores(records, metrics);
    } catch (const Error& e) {
      throw e.with_context(records_path);
    }

    std::vector<csv::Row> long_rows{{"language", "metric", "value", "sample_count"}};
    for (const auto& s : scores) {
      long_rows.push_back({s.language, std::string(memscore::to_string(s.metric)),
                           csv::format_number(s.value), std::to_string(s.sample_count)});
    }
    bundle_.tables[prefix + "scores_long.csv"] = render(long_rows);

    const csv::Row wide_header{"language", "EM (%)", "PM", "RM (B)", "RM (R)"};
    auto wide_row = [&](const std::string& first,
                        const std::vector<memscore::LanguageScore>& group) {
      csv::Row row{first, "--", "--", "--", "--"};
      for (const auto& s : group) {
        const double shown = s.metric == Metric::EM ? 100.0 * s.value : s.value;
        row[1 + static_cast<std::size_t>(s.metric)] = csv::format_number(shown);
      }
      return row;
    };
    std::vector<csv::Row> wide{wide_header};
    std::map<std::string, std::vector<memscore::LanguageScore>> per_language;
    for (const auto& s : scores) per_language[s.language].push_back(s);
    for (const auto& [language, group] : per_language) wide.push_back(wide_row(language, group));
    bundle_.tables[prefix + "scores_wide.csv"] = render(wide);

    std::vector<csv::Row> summary{
        {"Model", "Prompt. Len.", "EM (%)", "PM", "RM (B)", "RM (R)"}};
    auto overall = wide_row(config_.model, memscore::macro_average(scores));
    overall.insert(overall.begin() + 1, run_label);
    summary.push_back(overall);
    bundle_.tables[prefix + "summary.csv"] = render(summary);

    auto signals = signals_from_scores(scores);
    for (const auto& sig : signals) {
      std::ostringstream out;
      graphcorr::write_signal_csv(out, sig);
      bundle_.tables[prefix + "signals/" + sig.name + ".csv"] = out.str();
    }
    return signals;
  }

  SimilarityMatrix subspace(const std::string& prefix) {
    record_input("embeddings", config_.embeddings);
    const auto layers = lang_space::load_embeddings_jsonl(config_.embeddings);
    const int selected = config_.layer.value_or(layers.rbegin()->first);
    if (!layers.count(selected)) {
      throw ConfigError("layer " + std::to_string(selected) + " not in " + config_.embeddings +
                        " (available " + std::to_string(layers.begin()->first) + ".." +
                        std::to_string(layers.rbegin()->first) + ")");
    }
    std::vector<std::pair<std::string, SimilarityMatrix>> references;
    for (const auto& ref : config_.reference_similarities) {
      record_input("reference_similarity:" + ref.name, ref.path);
      references.emplace_back(ref.name, load_similarity_csv(ref.path));
    }

    csv::Row corr_header{"layer"};
    for (const auto& [name, m] : references) corr_header.push_back(name);
    std::vector<csv::Row> corr_rows{corr_header};

    SimilarityMatrix chosen;
    for (const auto& [layer, emb] : layers) {
      if (!config_.all_layers && layer != selected) continue;
      lang_space::SubspaceModel model;
      SimilarityMatrix sim;
      try {
        model = lang_space::identify_subspace(emb, config_.rank);
        sim = lang_space::similarity_matrix(model, emb);
      } catch (const Error& e) {
        throw e.with_context(config_.embeddings + " layer " + std::to_string(layer));
      }
      std::ostringstream sim_csv;
      write_similarity_csv(sim_csv, sim);
      if (config_.all_layers) {
        bundle_.tables[prefix + "layers/similarity_layer_" + std::to_string(layer) + ".csv"] =
            sim_csv.str();
      }
      if (layer == selected) {
        bundle_.tables[prefix + "similarity.csv"] = sim_csv.str();
        bundle_.tables[prefix + "subspace.json"] = subspace_json(layer, emb, model);
        chosen = sim;
      }
      if (!references.empty()) {
        csv::Row row{std::to_string(layer)};
        for (const auto& [name, ref] : references) {
          row.push_back(cell(guarded([&] { return lang_space::matrix_correlation(sim, ref); })));
        }
        corr_rows.push_back(std::move(row));
      }
    }
    if (!references.empty()) bundle_.tables[prefix + "layer_correlation.csv"] = render(corr_rows);
    return chosen;
  }

  void graph(const SimilarityMatrix& sim) {
    const auto g = simgraph::build_graph(sim, *config_.theta, edge_mode());
    std::ostringstream out;
    simgraph::write_graph_json(out, g);
    bundle_.tables["graph.json"] = out.str();

    const auto part = simgraph::components(g);
    std::vector<csv::Row> rows{{"group", "kind", "size", "language"}};
    std::size_t group = 0;
    for (const auto& members : part.subgraphs) {
      for (auto i : members) {
        rows.push_back({std::to_string(group), "subgraph", std::to_string(members.size()),
                        g.languages[i]});
      }
      ++group;
    }
    for (auto i : part.singletons) {
      rows.push_back({std::to_string(group++), "singleton", "1", g.languages[i]});
    }
    bundle_.tables["components.csv"] = render(rows);
  }

  void correlate(const SimilarityMatrix& sim, std::span<const LanguageSignal> memorization,
                 const LanguageSignal& tokens, const std::string& name) {
    const auto g = simgraph::build_graph(sim, *config_.theta, edge_mode());
    const auto t = graphcorr::align(tokens, sim.languages);
    std::vector<csv::Row> rows{{"Mem. Metric", "r", "rho_G"}};
    for (const auto& raw : memorization) {
      const auto m = graphcorr::align(raw, sim.languages);
      rows.push_back({table1_label(m.name), cell(guarded([&] { return graphcorr::pearson(m, t); })),
                      cell(guarded([&] { return topo::intra_topo_correlation(g, m, t); }))});
    }
    bundle_.tables[name] = render(rows);
  }

  void sweep(const SimilarityMatrix& sim, std::span<const LanguageSignal> memorization,
             const LanguageSignal& tokens, const std::string& prefix) {
    const std::vector<double> thetas =
        config_.thetas.empty() ? topo::kDefaultSweepThetas : config_.thetas;
    const auto rows = topo::threshold_sweep(
        sim, memorization, tokens, thetas,
        {.include_singletons = config_.include_singletons, .edge_mode = edge_mode()});

    csv::Row header{config_.model};
    csv::Row subgraphs{"# Subgraph"};
    csv::Row singletons{"# Single Point"};
    for (const auto& r : rows) {
      header.push_back(csv::format_number(r.theta, 2));
      subgraphs.push_back(std::to_string(r.subgraph_count));
      singletons.push_back(std::to_string(r.singleton_count));
    }
    std::vector<csv::Row> table{header, subgraphs, singletons};
    std::vector<csv::Row> long_rows{{"theta", "metric", "scope", "value"}};
    for (const auto& r : rows) {
      const auto theta = csv::format_number(r.theta, 2);
      long_rows.push_back({theta, "#subgraph", "count", std::to_string(r.subgraph_count)});
      long_rows.push_back({theta, "#single_point", "count", std::to_string(r.singleton_count)});
    }
    for (const auto& m : memorization) {
      csv::Row intra{sweep_label(m.name) + " Intra"};
      csv::Row cross{sweep_label(m.name) + " Cross"};
      for (const auto& r : rows) {
        intra.push_back(cell(r.intra.at(m.name)));
        cross.push_back(cell(r.cross.at(m.name)));
      }
      table.push_back(std::move(intra));
      table.push_back(std::move(cross));
    }
    for (const auto& r : rows) {
      const auto theta = csv::format_number(r.theta, 2);
      for (const auto& m : memorization) {
        long_rows.push_back({theta, m.name, "intra", cell(r.intra.at(m.name))});
        long_rows.push_back({theta, m.name, "cross", cell(r.cross.at(m.name))});
      }
    }
    bundle_.tables[prefix + "sweep_table.csv"] = render(table);
    bundle_.tables[prefix + "sweep_long.csv"] = render(long_rows);
  }

  void consistency(const std::vector<std::pair<std::string, std::vector<LanguageSignal>>>& runs,
                   const std::string& name) {
    std::vector<std::string> metrics;
    for (const auto& sig : runs.front().second) metrics.push_back(sig.name);
    csv::Row header{"Metric"};
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
      header.push_back(runs[i].first + " vs. " + runs[i + 1].first);
    }
    std::vector<csv::Row> rows{header};
    for (const auto& metric : metrics) {
      csv::Row row{sweep_label(metric)};
      for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        const auto* a = find(runs[i].second, metric);
        const auto* b = find(runs[i + 1].second, metric);
        row.push_back(a && b ? cell(guarded([&] { return topo::signal_consistency(*a, *b); }))
                             : std::string(csv::kUndefined));
      }
      rows.push_back(std::move(row));
    }
    bundle_.tables[name] = render(rows);
  }

  SimilarityMatrix load_similarity() {
    record_input("similarity", config_.similarity);
    return load_similarity_csv(config_.similarity);
  }

  LanguageSignal load_tokens() {
    record_input("tokens", config_.tokens);
    auto t = graphcorr::load_signal_csv(config_.tokens, "tokens");
    if (config_.token_scale == TokenScale::Log) {
      try {
        t = graphcorr::log_scaled(t);
      } catch (const Error& e) {
        throw e.with_context(config_.tokens);
      }
    }
    return t;
  }

  std::vector<LanguageSignal> load_memorization() {
    std::vector<LanguageSignal> out;
    if (!config_.scores.empty()) {
      record_input("scores", config_.scores);
      out = load_signal_table(config_.scores);
    }
    for (const auto& np : config_.signals) {
      record_input("signal:" + np.name, np.path);
      out.push_back(graphcorr::load_signal_csv(np.path, np.name));
    }
    return out;
  }

  std::vector<LanguageSignal> load_run(const NamedPath& run) {
    record_input("run:" + run.name, run.path);
    return load_signal_table(run.path);
  }

 private:
  static const LanguageSignal* find(const std::vector<LanguageSignal>& v, const std::string& n) {
    for (const auto& s : v) {
      if (s.name == n) return &s;
    }
    return nullptr;
  }

  simgraph::EdgeMode edge_mode() const {
    return config_.weighted_edges ? simgraph::EdgeMode::Weighted : simgraph::EdgeMode::Binary;
  }

  void record_input(const std::string& role, const std::string& path) {
    inputs_.push_back({{"role", role}, {"path", path}, {"sha256", file_digest(path)}});
  }

  static std::string subspace_json(int layer, const lang_space::LayerEmbeddings& emb,
                                   const lang_space::SubspaceModel& model) {
    Json j;
    j["layer"] = layer;
    j["rank"] = model.rank;
    j["languages"] = emb.languages;
    j["reconstruction_error"] = lang_space::reconstruction_error(emb, model);
    j["mu"] = std::vector<double>(model.mu.data(), model.mu.data() + model.mu.size());
    Json basis = Json::array();
    for (Eigen::Index c = 0; c < model.basis.cols(); ++c) {
      const Eigen::VectorXd col = model.basis.col(c);
      basis.push_back(std::vector<double>(col.data(), col.data() + col.size()));
    }
    j["basis_columns"] = std::move(basis);
    Json coords = Json::object();
    for (std::size_t l = 0; l < emb.languages.size(); ++l) {
      const Eigen::VectorXd row = model.coords.row(static_cast<Eigen::Index>(l));
      coords[emb.languages[l]] = std::vector<double>(row.data(), row.data() + row.size());
    }
    j["coords"] = std::move(coords);
    return j.dump(2) + "\n";
  }

  const RunConfig& config_;
  ReportBundle bundle_;
  Json inputs_ = Json::array();
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void require_file(const std::string& path, const std::string& flag) {
  require(!path.empty(), "--" + flag + " is required");
  require(fs::is_regular_file(path), "--" + flag + ": no such file: " + path);
}

void require_theta(double theta, const std::string& flag) {
  require(theta >= -1.0 && theta <= 1.0, "--" + flag + " must lie in [-1, 1]");
}

}  // namespace

std::string table1_label(const std::string& signal_name) {
  if (signal_name == "RM_BLEU") return "RM (BLEU)";
  if (signal_name == "RM_ROUGE_L") return "RM (Rouge-L)";
  return signal_name;
}

std::string sweep_label(const std::string& signal_name) {
  if (signal_name == "RM_BLEU") return "RM (B)";
  if (signal_name == "RM_ROUGE_L") return "RM (R)";
  return signal_name;
}

std::string text_digest(const std::string& text) {
  Sha256 sha;
  sha.update(text.data(), text.size());
  return sha.hex();
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  Sha256 sha;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    sha.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return sha.hex();
}

void validate(const RunConfig& c) {
  require(kCommands.count(c.command) > 0, "unknown command '" + c.command + "'");
  require(c.rank >= 1, "--rank must be at least 1");
  require(c.suffix_length >= 1, "--suffix-length must be at least 1");
  require(!c.prompt_length || *c.prompt_length >= 1, "--prompt-length must be at least 1");
  if (c.theta) require_theta(*c.theta, "theta");
  for (double t : c.thetas) require_theta(t, "thetas");
  for (const auto& np : c.signals) require_file(np.path, "signal " + np.name);
  for (const auto& np : c.reference_similarities) require_file(np.path, "compare " + np.name);

  if (c.command == "filter-corpus") {
    require_file(c.passages, "passages");
    require(c.quota > 0, "--quota must be positive");
    require(c.buffer_capacity > 0, "--buffer must be positive");
    require(!c.out_dir.empty(), "--out is required");
  } else if (c.command == "score") {
    require_file(c.records, "records");
  } else if (c.command == "subspace") {
    require_file(c.embeddings, "embeddings");
  } else if (c.command == "graph") {
    require_file(c.similarity, "similarity");
    require(c.theta.has_value(), "--theta is required");
  } else if (c.command == "correlate" || c.command == "sweep") {
    require_file(c.similarity, "similarity");
    require_file(c.tokens, "tokens");
    if (!c.scores.empty()) require_file(c.scores, "scores");
    require(!c.scores.empty() || !c.signals.empty(), "--scores or --signal is required");
    if (c.command == "correlate") require(c.theta.has_value(), "--theta is required");
  } else if (c.command == "consistency") {
    require(c.runs.size() >= 2, "--run must be given at least twice");
    for (const auto& np : c.runs) require_file(np.path, "run " + np.name);
  } else if (c.command == "report") {
    require(!c.record_runs.empty() || !c.records.empty(), "report needs records");
    for (const auto& np : c.record_runs) require_file(np.path, "records " + np.name);
    if (!c.records.empty()) require_file(c.records, "records");
    require(!c.embeddings.empty() || !c.similarity.empty(),
            "report needs embeddings or a similarity matrix");
    if (!c.embeddings.empty()) require_file(c.embeddings, "embeddings");
    if (!c.similarity.empty()) require_file(c.similarity, "similarity");
    require_file(c.tokens, "tokens");
    require(c.theta.has_value(), "report needs theta");
  }
}

RunConfig load_report_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  const fs::path root = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path candidate(p);
    return candidate.is_absolute() || root.empty() ? p : (root / candidate).string();
  };
  auto named = [&](const Json& obj) {
    std::vector<NamedPath> out;
    for (const auto& [k, v] : obj.items()) out.push_back({k, resolve(v.get<std::string>())});
    return out;
  };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "records") {
        if (v.is_string()) {
          base.records = resolve(v.get<std::string>());
        } else {
          base.record_runs = named(v);
        }
      } else if (key == "embeddings") {
        base.embeddings = resolve(v.get<std::string>());
      } else if (key == "similarity") {
        base.similarity = resolve(v.get<std::string>());
      } else if (key == "tokens") {
        base.tokens = resolve(v.get<std::string>());
      } else if (key == "reference_similarities") {
        base.reference_similarities = named(v);
      } else if (key == "model") {
        base.model = v.get<std::string>();
      } else if (key == "layer") {
        base.layer = v.get<int>();
      } else if (key == "rank") {
        base.rank = v.get<int>();
      } else if (key == "theta") {
        base.theta = v.get<double>();
      } else if (key == "thetas") {
        base.thetas = v.get<std::vector<double>>();
      } else if (key == "include_singletons") {
        base.include_singletons = v.get<bool>();
      } else if (key == "weighted_edges") {
        base.weighted_edges = v.get<bool>();
      } else if (key == "token_scale") {
        const auto s = v.get<std::string>();
        require(s == "raw" || s == "log", path + ": token_scale must be raw or log");
        base.token_scale = s == "log" ? TokenScale::Log : TokenScale::Raw;
      } else if (key == "suffix_length") {
        base.suffix_length = v.get<int>();
      } else if (key == "text_mode") {
        base.text_mode = v.get<bool>();
      } else if (key == "metrics") {
        std::set<Metric> metrics;
        for (const auto& name : v.get<std::vector<std::string>>()) {
          const auto m = memscore::parse_metric(name);
          require(m.has_value(), path + ": unknown metric '" + name + "'");
          metrics.insert(*m);
        }
        base.metrics = metrics;
      } else {
        throw ConfigError(path + ": unknown key '" + key + "'");
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  base.command = "report";
  return base;
}

ReportBundle run(const RunConfig& config) {
  validate(config);
  Pipeline p(config);
  const auto& cmd = config.command;
  if (cmd == "filter-corpus") {
    p.filter_corpus();
  } else if (cmd == "score") {
    const std::string label =
        config.prompt_length ? std::to_string(*config.prompt_length) : std::string("--");
    p.score(config.records, "", label);
  } else if (cmd == "subspace") {
    p.subspace("");
  } else if (cmd == "graph") {
    p.graph(p.load_similarity());
  } else if (cmd == "correlate" || cmd == "sweep") {
    const auto sim = p.load_similarity();
    const auto memorization = p.load_memorization();
    const auto tokens = p.load_tokens();
    if (cmd == "correlate") {
      p.correlate(sim, memorization, tokens, "correlation.csv");
    } else {
      p.sweep(sim, memorization, tokens, "");
    }
  } else if (cmd == "consistency") {
    std::vector<std::pair<std::string, std::vector<LanguageSignal>>> runs;
    for (const auto& r : config.runs) runs.emplace_back(r.name, p.load_run(r));
    p.consistency(runs, "consistency.csv");
  } else {  // report
    std::vector<NamedPath> record_runs = config.record_runs;
    if (!config.records.empty()) record_runs.insert(record_runs.begin(), {"run", config.records});
    std::vector<std::pair<std::string, std::vector<LanguageSignal>>> scored;
    for (const auto& r : record_runs) {
      const std::string prefix = "scores/" + safe_file_stem(r.name) + "/";
      scored.emplace_back(r.name, p.score(r.path, prefix, r.name));
    }
    const SimilarityMatrix sim =
        config.embeddings.empty() ? p.load_similarity() : p.subspace("similarity/");
    const auto tokens = p.load_tokens();
    for (const auto& [label, signals] : scored) {
      const auto stem = safe_file_stem(label);
      p.correlate(sim, signals, tokens, "correlation/" + stem + ".csv");
      p.sweep(sim, signals, tokens, "sweep/" + stem + "_");
    }
    if (scored.size() >= 2) p.consistency(scored, "consistency.csv");
  }
  return p.finish();
}

void write_bundle(const ReportBundle& bundle, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  auto write = [&](const std::string& rel, const std::string& text) {
    const fs::path path = out_dir / rel;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
  };
  for (const auto& [name, text] : bundle.tables) write(name, text);
  write("manifest.json", bundle.manifest.dump(2) + "\n");
}

}  // namespace langmem::report
