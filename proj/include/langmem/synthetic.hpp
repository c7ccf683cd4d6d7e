#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "langmem/graphcorr.hpp"
#include "langmem/lang_space.hpp"
#include "langmem/memscore.hpp"
#include "langmem/similarity.hpp"

// Seeded fixture generators for tests, demos and the checked-in fixtures.
namespace langmem::synthetic {

/// Languages grouped into families. Similarity is `within_similarity`
/// inside a family and `cross_similarity` across families. Inside a family,
/// memorization falls as token counts rise; across families the memorization
/// level is symmetric around the middle family while token volume grows
/// linearly, so the two are unrelated at family level.
struct FamilyFixtureOptions {
  std::size_t families = 4;
  std::size_t languages_per_family = 6;
  double within_similarity = 0.9;
  double cross_similarity = 0.2;
  std::size_t records_per_language = 40;
  std::size_t prefix_length = 50;
  std::size_t suffix_length = 15;
  std::uint64_t seed = 7;
};

struct FamilyFixture {
  SimilarityMatrix similarity;
  graphcorr::LanguageSignal tokens;
  graphcorr::LanguageSignal planted_level;  // target memorization probability
  std::vector<std::size_t> family_of;       // per language
  std::vector<memscore::MemorizationRecord> records;
};

FamilyFixture make_family_fixture(const FamilyFixtureOptions& options = {});

/// Per-language mean embeddings: a shared offset, an orthogonal family centre and
/// per-language noise whose scale shrinks with depth, so later layers
/// separate families more cleanly.
struct EmbeddingFixtureOptions {
  std::size_t languages = 95;
  std::size_t families = 12;
  Eigen::Index dim = 64;
  int layers = 1;
  double noise = 0.3;  // per-language noise scale at layer 0
  std::uint64_t seed = 11;
};

std::map<int, lang_space::LayerEmbeddings> make_embeddings(const EmbeddingFixtureOptions& options);

}  // namespace langmem::synthetic
