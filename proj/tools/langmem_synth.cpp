// Writes the seeded synthetic fixtures used by the tests and the README
// walkthrough.
//
//   langmem_synth <out_dir>
//
// family/       24 languages in 4 families: similarity, tokens, records at
//               prompt lengths 50 and 100, mean embeddings, report config
// sim95.csv     95-language similarity from a rank-11 subspace
// passages.jsonl  candidate passages covering every filter rule

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <vector>
#include <string>

#include "langmem/corpus.hpp"
#include "langmem/lang_space.hpp"
#include "langmem/synthetic.hpp"

namespace fs = std::filesystem;
using namespace langmem;

namespace {

std::ofstream open(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_family(const fs::path& dir) {
  synthetic::FamilyFixtureOptions options;
  const auto base = synthetic::make_family_fixture(options);
  {
    auto out = open(dir / "similarity.csv");
    write_similarity_csv(out, base.similarity);
  }
  {
    auto out = open(dir / "tokens.csv");
    graphcorr::write_signal_csv(out, base.tokens);
  }
  for (std::size_t prompt : {50u, 100u}) {
    options.prefix_length = prompt;
    options.seed = 7 + prompt;
    const auto fx = synthetic::make_family_fixture(options);
    auto out = open(dir / ("records_" + std::to_string(prompt) + ".jsonl"));
    for (const auto& r : fx.records) memscore::write_record_jsonl(out, r);
  }
  {
    synthetic::EmbeddingFixtureOptions eo;
    eo.languages = options.families * options.languages_per_family;
    eo.families = options.families;
    eo.dim = 32;
    eo.layers = 3;
    eo.seed = 5;
    auto out = open(dir / "embeddings.jsonl");
    lang_space::write_embeddings_jsonl(out, synthetic::make_embeddings(eo));
  }
  {
    auto out = open(dir / "report.json");
    out << R"({
  "model": "synthetic",
  "records": {"50": "records_50.jsonl", "100": "records_100.jsonl"},
  "similarity": "similarity.csv",
  "tokens": "tokens.csv",
  "theta": 0.5,
  "thetas": [0.1, 0.5, 0.95]
}
)";
  }
}

void write_sim95(const fs::path& path) {
  synthetic::EmbeddingFixtureOptions eo;
  const auto layers = synthetic::make_embeddings(eo);
  const auto& emb = layers.begin()->second;
  {
    auto out = open(path.parent_path() / "embeddings95.jsonl");
    lang_space::write_embeddings_jsonl(out, layers);
  }
  const auto model = lang_space::identify_subspace(emb, 11);
  auto out = open(path);
  write_similarity_csv(out, lang_space::similarity_matrix(model, emb));
}

// Non-repeating text: words drawn from a small vocabulary.
std::string words(std::mt19937_64& rng, const std::vector<std::string>& vocab, std::size_t count) {
  std::string s;
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) s += (i % 11 == 0) ? ". " : " ";
    s += vocab[corpus::uniform_index(rng, vocab.size())];
  }
  return s + ".";
}

void write_passages(const fs::path& path) {
  const std::map<std::string, std::vector<std::string>> vocab = {
      {"en", {"river", "carried", "silt", "from", "the", "hills", "plain", "every", "spring",
              "slowly", "water", "stone", "village", "morning", "bright", "under", "bridge"}},
      {"de", {"der", "Fluss", "trug", "Schlamm", "von", "den", "Hügeln", "Ebene", "Frühjahr",
              "langsam", "Wasser", "Stein", "Dorf", "Morgen", "hell", "unter", "Brücke"}},
      {"fi", {"joki", "kuljetti", "lietettä", "kukkuloilta", "tasangolle", "joka", "kevät",
              "hitaasti", "vesi", "kivi", "kylä", "aamu", "kirkas", "alla", "silta", "yö"}},
  };
  std::mt19937_64 rng(42);
  auto out = open(path);
  int id = 0;
  auto emit = [&](const std::string& lang, const std::string& text, double conf, double prop) {
    corpus::CandidatePassage p{lang, text, conf, prop, lang + "-" + std::to_string(id++)};
    corpus::write_passage_jsonl(out, p);
  };
  for (int i = 0; i < 12; ++i) {
    for (const auto& [lang, v] : vocab) emit(lang, words(rng, v, 140), 0.97, 0.95);
  }
  const auto& en = vocab.at("en");
  emit("en", words(rng, en, 20), 0.99, 0.99);                                    // too short
  emit("en", words(rng, en, 140) + " see http://example.org", 0.99, 0.99);      // url
  emit("de", words(rng, vocab.at("de"), 140) + " 123456789012345678901234", 0.99, 0.99);
  const std::string unit = "abcdefghijklmnopqrst";
  emit("fi", words(rng, vocab.at("fi"), 140) + " " + unit + unit + unit, 0.99, 0.99);
  emit("en", words(rng, en, 140) + " \x01\x02\x03\x04\x05\x06\x07\x08\x0e\x0f\x10\x11\x12\x13", 0.99, 0.99);
  emit("en", words(rng, en, 140), 0.90, 0.99);  // confidence must exceed 0.90
  emit("de", words(rng, vocab.at("de"), 140), 0.99, 0.50);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: langmem_synth <out_dir>\n";
    return 1;
  }
  try {
    const fs::path dir(argv[1]);
    write_family(dir / "family");
    write_sim95(dir / "sim95.csv");
    write_passages(dir / "passages.jsonl");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
