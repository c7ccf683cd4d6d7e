#include "langmem/synthetic.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "langmem/corpus.hpp"

namespace langmem::synthetic {

namespace {

// Uniform in [0, 1) from the engine, independent of <random> distributions.
double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; deterministic across standard libraries.
double gaussian(std::mt19937_64& rng) {
  const double u1 = std::max(unit(rng), 1e-300);
  const double u2 = unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::string language_name(std::size_t family, std::size_t member) {
  return "f" + std::to_string(family) + "l" + std::to_string(member);
}

}  // namespace

FamilyFixture make_family_fixture(const FamilyFixtureOptions& o) {
  std::mt19937_64 rng(o.seed);
  const std::size_t n = o.families * o.languages_per_family;
  FamilyFixture fx;
  fx.similarity.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n),
                                                   static_cast<Eigen::Index>(n),
                                                   o.cross_similarity);
  fx.tokens.name = "tokens";
  fx.tokens.values.resize(static_cast<Eigen::Index>(n));
  fx.planted_level.name = "planted";
  fx.planted_level.values.resize(static_cast<Eigen::Index>(n));

  const double centre = (static_cast<double>(o.families) - 1.0) / 2.0;
  const double span = std::max(centre, 1.0);
  for (std::size_t f = 0; f < o.families; ++f) {
    // Family-level memorization is symmetric in f, token volume is linear.
    const double family_level = 0.3 + 0.3 * std::abs(static_cast<double>(f) - centre) / span;
    const double family_tokens = 2e6 + 3e6 * static_cast<double>(f);
    for (std::size_t k = 0; k < o.languages_per_family; ++k) {
      const std::size_t i = f * o.languages_per_family + k;
      const auto idx = static_cast<Eigen::Index>(i);
      const double offset =
          o.languages_per_family > 1
              ? (2.0 * static_cast<double>(k) - static_cast<double>(o.languages_per_family - 1)) /
                    static_cast<double>(o.languages_per_family - 1)
              : 0.0;
      fx.similarity.languages.push_back(language_name(f, k));
      fx.family_of.push_back(f);
      fx.tokens.values(idx) = family_tokens + 5e5 * offset;
      const double level = family_level - 0.15 * offset + 0.02 * gaussian(rng);
      fx.planted_level.values(idx) = std::clamp(level, 0.02, 0.98);
      for (std::size_t j = 0; j < n; ++j) {
        if (j / o.languages_per_family == f) {
          fx.similarity.values(idx, static_cast<Eigen::Index>(j)) = o.within_similarity;
        }
      }
    }
  }
  fx.similarity.values.diagonal().setOnes();
  fx.tokens.languages = fx.similarity.languages;
  fx.planted_level.languages = fx.similarity.languages;

  // Records: round(p * N) exact matches; the rest carry mismatches whose
  // number grows as p falls, and per-token log-probabilities that worsen
  // as p falls.
  memscore::TokenId next_token = 1000;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = fx.planted_level.values(static_cast<Eigen::Index>(i));
    const auto exact = static_cast<std::size_t>(std::lround(p * static_cast<double>(o.records_per_language)));
    const auto mismatches = std::min<std::size_t>(
        o.suffix_length, 1 + static_cast<std::size_t>(std::floor((1.0 - p) * 8.0)));
    for (std::size_t r = 0; r < o.records_per_language; ++r) {
      memscore::MemorizationRecord rec;
      rec.language = fx.similarity.languages[i];
      rec.sample_id = rec.language + "-" + std::to_string(r);
      for (std::size_t t = 0; t < o.prefix_length; ++t) rec.prefix.push_back(next_token++);
      for (std::size_t t = 0; t < o.suffix_length; ++t) rec.reference.push_back(next_token++);
      rec.predicted = rec.reference;
      if (r >= exact) {
        const std::size_t step = std::max<std::size_t>(1, o.suffix_length / mismatches);
        const std::size_t start = corpus::uniform_index(rng, step);
        for (std::size_t k = 0; k < mismatches; ++k) {
          rec.predicted[(start + k * step) % o.suffix_length] = -1 - static_cast<memscore::TokenId>(k);
        }
      }
      for (std::size_t t = 0; t < o.suffix_length; ++t) {
        rec.reference_logprobs.push_back(-(0.3 + 3.0 * (1.0 - p)) - 0.1 * unit(rng));
      }
      fx.records.push_back(std::move(rec));
    }
  }
  return fx;
}

std::map<int, lang_space::LayerEmbeddings> make_embeddings(const EmbeddingFixtureOptions& o) {
  std::mt19937_64 rng(o.seed);
  auto random_vector = [&](double scale) {
    Eigen::VectorXd v(o.dim);
    for (Eigen::Index i = 0; i < o.dim; ++i) v(i) = scale * gaussian(rng);
    return v;
  };
  // The shared offset and the family centres are mutually orthogonal, so the
  // offset carries no family information.
  const auto families = static_cast<Eigen::Index>(o.families);
  Eigen::MatrixXd raw(o.dim, families + 1);
  for (Eigen::Index c = 0; c <= families; ++c) raw.col(c) = random_vector(1.0);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() *
                            Eigen::MatrixXd::Identity(o.dim, families + 1);
  const Eigen::VectorXd shared = 4.0 * q.col(0);
  std::vector<Eigen::VectorXd> centres;
  for (Eigen::Index f = 1; f <= families; ++f) centres.push_back(3.0 * q.col(f));
  std::vector<Eigen::VectorXd> noise;
  for (std::size_t l = 0; l < o.languages; ++l) noise.push_back(random_vector(1.0));

  std::map<int, lang_space::LayerEmbeddings> out;
  for (int layer = 0; layer < o.layers; ++layer) {
    lang_space::LayerEmbeddings emb;
    emb.layer = layer;
    emb.means.resize(o.dim, static_cast<Eigen::Index>(o.languages));
    const double noise_scale = o.noise / (1.0 + static_cast<double>(layer));
    for (std::size_t l = 0; l < o.languages; ++l) {
      const std::size_t f = l % o.families;
      emb.languages.push_back(language_name(f, l / o.families));
      emb.means.col(static_cast<Eigen::Index>(l)) =
          shared + centres[f] + noise_scale * noise[l];
    }
    out.emplace(layer, std::move(emb));
  }
  return out;
}

}  // namespace langmem::synthetic
