// Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
// any criterion fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "graph_helpers.hpp"
#include "langmem/corpus.hpp"
#include "langmem/csv.hpp"
#include "langmem/error.hpp"
#include "langmem/graphcorr.hpp"
#include "langmem/lang_space.hpp"
#include "langmem/memscore.hpp"
#include "langmem/report.hpp"
#include "langmem/simgraph.hpp"
#include "langmem/synthetic.hpp"
#include "langmem/topo.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace langmem;
using testing_graphs::from_edges;
using testing_graphs::random_graph;
using testing_graphs::signal;

namespace {

using Clock = std::chrono::steady_clock;

std::string sci(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::scientific << v;
  return s.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::vector<double> normal_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<csv::Row> csv_rows(const std::string& text) {
  std::istringstream in(text);
  return csv::read_all(in);
}

// ---------------------------------------------------------------------------

Outcome cauchy_schwarz() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> size(3, 30);
  std::uniform_real_distribution<double> density(0.05, 0.9);
  double worst = 0.0;
  int evaluated = 0;
  while (evaluated < 10000) {
    const std::size_t n = size(rng);
    const auto g = random_graph(rng, n, density(rng));
    const auto x = normal_vector(rng, n, 3.0), y = normal_vector(rng, n, 0.01);
    try {
      worst = std::max(worst, std::abs(graphcorr::graph_correlation(g, signal(x), signal(y))));
      ++evaluated;
    } catch (const Error& e) {
      o.require(e.code() == ErrorCode::DegenerateSmoothness, "unexpected error " + std::string(e.what()));
    }
  }
  const double t = seconds_since(start);
  o.require(worst <= 1.0 + 1e-9, "max |rho_G| = " + std::to_string(worst));
  o.require(t < 10.0, "runtime " + std::to_string(t) + " s");
  if (o.pass) o.detail = "max |rho_G| - 1 = " + sci(worst - 1.0) + ", " + sci(t) + " s";
  return o;
}

Outcome laplacian_identity() {
  Outcome o;
  std::mt19937_64 rng(102);
  std::uniform_int_distribution<std::size_t> size(2, 40);
  std::uniform_real_distribution<double> density(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = size(rng);
    const auto g = random_graph(rng, n, density(rng));
    const auto x = normal_vector(rng, n);
    const double matrix_form = graphcorr::smoothness(g, signal(x));
    worst = std::max(worst, std::abs(matrix_form - oracle::edge_sum(g.adjacency, x, x)));
    const Eigen::VectorXd l1 = g.laplacian * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    o.require(l1.cwiseAbs().maxCoeff() == 0.0, "L1 != 0 on trial " + std::to_string(trial));
  }
  o.require(worst <= 1e-9, "max deviation " + std::to_string(worst));
  if (o.pass) o.detail = "max deviation " + sci(worst);
  return o;
}

Outcome invariances() {
  Outcome o;
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<std::size_t> size(3, 25);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  std::normal_distribution<double> shift(0.0, 50.0);
  double worst = 0.0;
  int cases = 0;
  while (cases < 1000) {
    const std::size_t n = size(rng);
    const auto g = random_graph(rng, n, 0.4);
    if (g.edge_count() == 0) continue;
    const auto m = normal_vector(rng, n), t = normal_vector(rng, n);
    const double base = graphcorr::graph_correlation(g, signal(m), signal(t));
    const double c = shift(rng), a = scale(rng);
    auto shifted = m, scaled = m, negated = m;
    for (std::size_t i = 0; i < n; ++i) {
      shifted[i] += c;
      scaled[i] *= a;
      negated[i] = -m[i];
    }
    worst = std::max({worst,
                      std::abs(graphcorr::graph_correlation(g, signal(shifted), signal(t)) - base),
                      std::abs(graphcorr::graph_correlation(g, signal(scaled), signal(t)) - base),
                      std::abs(graphcorr::graph_correlation(g, signal(negated), signal(t)) + base),
                      std::abs(graphcorr::graph_correlation(g, signal(t), signal(m)) - base)});
    ++cases;
  }
  o.require(worst <= 1e-9, "max deviation " + std::to_string(worst));
  if (o.pass) o.detail = "max deviation " + sci(worst);
  return o;
}

Outcome subspace_recovery() {
  Outcome o;
  std::mt19937_64 rng(104);
  std::normal_distribution<double> g;
  const Eigen::Index d = 16, n = 8, r = 3;
  Eigen::MatrixXd raw(d, r);
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = g(rng);
  const Eigen::MatrixXd u =
      Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() * Eigen::MatrixXd::Identity(d, r);
  Eigen::VectorXd mu(d);
  for (Eigen::Index i = 0; i < d; ++i) mu(i) = 1.5 + g(rng);
  Eigen::MatrixXd gamma(n, r);
  for (Eigen::Index i = 0; i < gamma.size(); ++i) gamma.data()[i] = g(rng);
  lang_space::LayerEmbeddings emb;
  emb.languages = oracle::names(static_cast<std::size_t>(n));
  emb.means = mu * Eigen::RowVectorXd::Ones(n) + u * gamma.transpose();
  const auto model = lang_space::identify_subspace(emb, static_cast<int>(r));
  const Eigen::MatrixXd ms = model.basis;
  // sine of the largest principal angle
  const double sine = Eigen::JacobiSVD<Eigen::MatrixXd>(ms - u * (u.transpose() * ms))
                          .singularValues()(0);
  const double angle = std::asin(std::min(1.0, sine));
  const double ortho = (ms.transpose() * ms - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
  o.require(angle < 1e-6, "principal angle " + std::to_string(angle));
  o.require(ortho < 1e-9, "orthonormality defect " + std::to_string(ortho));

  // monotone reconstruction error on noisy data
  Eigen::MatrixXd noisy = emb.means;
  for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy.data()[i] += 0.1 * g(rng);
  lang_space::LayerEmbeddings e2 = emb;
  e2.means = noisy;
  double previous = 1e300;
  for (int k = 1; k < n; ++k) {
    const double err = lang_space::reconstruction_error(e2, lang_space::identify_subspace(e2, k));
    o.require(err <= previous + 1e-12, "error rises at r=" + std::to_string(k));
    previous = err;
  }
  if (o.pass) {
    o.detail = "principal angle " + sci(angle) + ", orthonormality defect " + sci(ortho);
  }
  return o;
}

Outcome metric_oracles() {
  Outcome o;
  std::mt19937_64 rng(105);
  std::uniform_int_distribution<int> len(1, 25), tok(0, 6);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    memscore::Tokens a(static_cast<std::size_t>(len(rng))), b(static_cast<std::size_t>(len(rng)));
    for (auto& t : a) t = tok(rng);
    for (auto& t : b) t = tok(rng);
    worst = std::max({worst, std::abs(memscore::bleu(a, b) - oracle::bleu(a, b)),
                      std::abs(memscore::rouge_l(a, b) - oracle::rouge_l(a, b))});
  }
  o.require(worst <= 1e-12, "max metric deviation " + std::to_string(worst));

  // 30 crafted records over three languages
  std::vector<memscore::MemorizationRecord> rs;
  const std::vector<std::string> langs = {"am", "ko", "qu"};
  for (int i = 0; i < 30; ++i) {
    memscore::MemorizationRecord r;
    r.language = langs[static_cast<std::size_t>(i % 3)];
    r.sample_id = "c" + std::to_string(i);
    r.prefix.assign(50, 1);
    for (int k = 0; k < 15; ++k) {
      r.reference.push_back(k + i);
      r.reference_logprobs.push_back(-0.25 * ((k + i) % 5));
    }
    r.predicted = r.reference;
    if (i % 4 == 1) r.predicted[3] = -1;
    if (i % 5 == 2) r.predicted.pop_back();
    rs.push_back(r);
  }
  const auto scores = memscore::language_scores(rs, {memscore::Metric::EM, memscore::Metric::PM});
  for (const auto& s : scores) {
    double hits = 0, pm = 0, count = 0;
    for (const auto& r : rs) {
      if (r.language != s.language) continue;
      count += 1;
      hits += r.predicted == r.reference ? 1 : 0;
      double sum = 0;
      for (double lp : r.reference_logprobs) sum += lp;
      pm += sum;
    }
    const double expected = s.metric == memscore::Metric::EM ? hits / count : pm / count;
    o.require(s.value == expected, s.language + " " + std::string(memscore::to_string(s.metric)));
  }
  if (o.pass) o.detail = "max metric deviation " + sci(worst);
  return o;
}

Outcome aggregation() {
  Outcome o;
  const auto g = from_edges(8, {{0, 1}, {1, 2}, {3, 4}, {3, 5}, {3, 6}});
  const auto s = signal({10, 20, 30, 0, 4, 4, 4, 5});
  const std::vector<std::size_t> path = {0, 1, 2}, star = {3, 4, 5, 6}, single = {7};
  o.require(topo::aggregate_subgraph(g, path, s) == 20.0, "path");
  o.require(topo::aggregate_subgraph(g, star, s) == 2.0, "star");
  o.require(topo::aggregate_subgraph(g, single, s) == 5.0, "singleton");

  std::mt19937_64 rng(106);
  int checked = 0;
  while (checked < 1000) {
    const auto graph = random_graph(rng, 20, 0.12);
    const auto v = normal_vector(rng, 20);
    for (const auto& members : simgraph::components(graph).subgraphs) {
      const double a = topo::aggregate_subgraph(graph, members, signal(v));
      double lo = 1e300, hi = -1e300;
      for (auto m : members) {
        lo = std::min(lo, v[m]);
        hi = std::max(hi, v[m]);
      }
      o.require(a >= lo - 1e-12 && a <= hi + 1e-12, "convex bound");
      if (++checked == 1000) break;
    }
  }
  return o;
}

Outcome sweep_structure() {
  Outcome o;
  std::mt19937_64 rng(107);
  std::vector<double> thetas;
  for (int k = 0; k <= 40; ++k) thetas.push_back(-1.0 + 0.05 * k);
  for (int trial = 0; trial < 100; ++trial) {
    SimilarityMatrix sim;
    sim.languages = oracle::names(12);
    sim.values = oracle::random_similarity(rng, 12);
    const std::vector<graphcorr::LanguageSignal> mem = {signal(normal_vector(rng, 12), "EM")};
    const auto rows = topo::threshold_sweep(sim, mem, signal(normal_vector(rng, 12), "t"), thetas);
    for (std::size_t k = 1; k < rows.size(); ++k) {
      o.require(rows[k].subgraph_count + rows[k].singleton_count >=
                    rows[k - 1].subgraph_count + rows[k - 1].singleton_count,
                "group count fell on matrix " + std::to_string(trial));
    }
  }

  // two planted clusters: within 0.7, across 0.4; the gap is (0.4, 0.7]
  SimilarityMatrix sim;
  sim.languages = oracle::names(6);
  sim.values = Eigen::MatrixXd::Constant(6, 6, 0.4);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if ((i < 3) == (j < 3)) sim.values(i, j) = 0.7;
  sim.values.diagonal().setOnes();
  const std::vector<graphcorr::LanguageSignal> mem = {signal({1, 2, 3, 4, 5, 6}, "EM")};
  const std::vector<double> grid = {0.3, 0.4, std::nextafter(0.4, 1.0), 0.55, 0.7,
                                    std::nextafter(0.7, 1.0)};
  const auto rows = topo::threshold_sweep(sim, mem, signal({6, 1, 5, 2, 4, 3}, "t"), grid);
  const std::vector<std::size_t> expected = {1, 1, 2, 2, 2, 0};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    o.require(rows[k].subgraph_count == expected[k],
              "planted step at theta " + std::to_string(grid[k]));
  }
  o.require(rows.back().singleton_count == 6, "all singletons above the top similarity");
  return o;
}

Outcome end_to_end(const fs::path& work) {
  Outcome o;
  const auto start = Clock::now();
  fs::create_directories(work);
  const auto fx = synthetic::make_family_fixture();
  {
    std::ofstream sim(work / "similarity.csv", std::ios::binary);
    write_similarity_csv(sim, fx.similarity);
    std::ofstream tokens(work / "tokens.csv", std::ios::binary);
    graphcorr::write_signal_csv(tokens, fx.tokens);
    std::ofstream records(work / "records.jsonl", std::ios::binary);
    for (const auto& r : fx.records) memscore::write_record_jsonl(records, r);
  }
  o.require(read_file(work / "similarity.csv") ==
                    read_file(LANGMEM_FIXTURES "/family/similarity.csv") &&
                read_file(work / "tokens.csv") == read_file(LANGMEM_FIXTURES "/family/tokens.csv"),
            "checked-in fixture is stale");

  report::RunConfig score;
  score.command = "score";
  score.records = (work / "records.jsonl").string();
  score.prompt_length = 50;
  report::write_bundle(report::run(score), work / "scores");

  report::RunConfig c;
  c.command = "correlate";
  c.scores = (work / "scores" / "scores_long.csv").string();
  c.similarity = (work / "similarity.csv").string();
  c.tokens = (work / "tokens.csv").string();
  c.theta = 0.5;
  const auto rows = csv_rows(report::run(c).tables.at("correlation.csv"));
  const double t = seconds_since(start);
  std::ostringstream summary;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double r = csv::parse_double(rows[i][1], "r");
    const double rho = csv::parse_double(rows[i][2], "rho_G");
    summary << rows[i][0] << " r=" << rows[i][1] << " rho_G=" << rows[i][2] << "; ";
    o.require(rho < -0.5, rows[i][0] + " rho_G " + rows[i][2]);
    o.require(r > -0.2 && r < 0.2, rows[i][0] + " r " + rows[i][1]);
  }
  o.require(rows.size() == 5, "metric rows");
  o.require(t < 5.0, "runtime " + std::to_string(t) + " s");
  if (o.pass) o.detail = summary.str() + sci(t) + " s";
  return o;
}

Outcome corpus_determinism(const fs::path& work) {
  Outcome o;
  report::RunConfig c;
  c.command = "filter-corpus";
  c.passages = LANGMEM_FIXTURES "/passages.jsonl";
  c.quota = 6;
  c.buffer_capacity = 5;
  c.seed = 2024;
  std::vector<std::map<std::string, std::string>> outputs;
  for (const char* name : {"a", "b"}) {
    c.out_dir = (work / name).string();
    fs::remove_all(c.out_dir);
    report::write_bundle(report::run(c), c.out_dir);
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(work / name)) {
      if (entry.is_regular_file()) {
        files[fs::relative(entry.path(), work / name).string()] = read_file(entry.path());
      }
    }
    outputs.push_back(files);
  }
  o.require(outputs[0] == outputs[1], "sampled output differs between runs");
  o.require(outputs[0].count("sampled/en.jsonl") == 1, "missing sampled/en.jsonl");

  std::vector<corpus::CandidatePassage> stream;
  for (int i = 0; i < 4; ++i) stream.push_back({"xx", std::to_string(i), 1.0, 1.0, ""});
  std::map<std::string, int> counts;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    ++counts[corpus::sample_corpus(stream, 1, 4, seed).samples.at("xx").front().text];
  }
  std::ostringstream summary;
  for (const auto& [item, n] : counts) {
    summary << item << ":" << n << " ";
    o.require(std::abs(n - 2500) <= 150, "item " + item + " drawn " + std::to_string(n) + " times");
  }
  o.require(counts.size() == 4, "not every item drawn");
  if (o.pass) o.detail = summary.str();
  return o;
}

// Structure must match exactly; numbers must agree to the printed precision.
void compare_to_golden(Outcome& o, const std::string& produced, const fs::path& golden) {
  const auto got = csv_rows(produced);
  const auto want = csv_rows(read_file(golden));
  o.require(got.size() == want.size(), golden.filename().string() + ": row count");
  for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
    o.require(got[i].size() == want[i].size(), golden.filename().string() + ": column count");
    for (std::size_t j = 0; j < std::min(got[i].size(), want[i].size()); ++j) {
      const bool label = i == 0 || j == 0 || want[i][j] == csv::kUndefined;
      if (label) {
        o.require(got[i][j] == want[i][j], golden.filename().string() + ": cell '" + got[i][j] +
                                               "' expected '" + want[i][j] + "'");
      } else {
        const double a = csv::parse_double(got[i][j], "cell");
        const double b = csv::parse_double(want[i][j], "golden");
        o.require(std::abs(a - b) <= 1e-6, golden.filename().string() + ": value " + got[i][j]);
      }
    }
  }
}

Outcome report_fidelity(const fs::path& work) {
  Outcome o;
  report::RunConfig score;
  score.command = "score";
  score.records = LANGMEM_FIXTURES "/family/records_50.jsonl";
  report::write_bundle(report::run(score), work / "scores");

  report::RunConfig c;
  c.scores = (work / "scores" / "scores_long.csv").string();
  c.similarity = LANGMEM_FIXTURES "/family/similarity.csv";
  c.tokens = LANGMEM_FIXTURES "/family/tokens.csv";
  c.command = "correlate";
  c.theta = 0.41;
  const auto correlate = report::run(c);
  compare_to_golden(o, correlate.tables.at("correlation.csv"), LANGMEM_GOLDEN "/correlation.csv");

  c.command = "sweep";
  c.model = "synthetic";
  c.theta.reset();
  const auto sweep = report::run(c);
  compare_to_golden(o, sweep.tables.at("sweep_table.csv"), LANGMEM_GOLDEN "/sweep_table.csv");
  o.require(csv_rows(sweep.tables.at("sweep_table.csv"))[0].size() == 9, "eight theta columns");

  // same configuration, same bytes
  const auto again = report::run(c);
  o.require(again.tables == sweep.tables && again.manifest == sweep.manifest,
            "rerun is not byte-identical");
  return o;
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "langmem_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Cauchy-Schwarz bound on 10,000 random triples", cauchy_schwarz},
      {"Laplacian quadratic form equals edge sum; L1 = 0", laplacian_identity},
      {"rho_G shift/scale/sign/symmetry invariances", invariances},
      {"Planted subspace recovery and monotone reconstruction error", subspace_recovery},
      {"BLEU/ROUGE-L oracles and EM/PM groupwise recomputation", metric_oracles},
      {"Subgraph aggregation examples and convex bound", aggregation},
      {"Sweep count monotonicity and planted 1->2 step", sweep_structure},
      {"End-to-end family fixture: intra rho_G < -0.5, flat r in (-0.2, 0.2)",
       [&] { return end_to_end(work / "e2e"); }},
      {"Corpus sampling determinism and uniformity", [&] { return corpus_determinism(work / "fc"); }},
      {"Correlate/sweep table layouts match golden files",
       [&] { return report_fidelity(work / "report"); }},
  };

  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name;
    if (!o.detail.empty()) std::cout << "  [" << o.detail << "]";
    std::cout << "\n";
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
            << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
