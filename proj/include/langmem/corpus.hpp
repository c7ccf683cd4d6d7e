#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Streaming corpus preparation: rule-based passage filtering, language-ID
// gating and per-language shuffle-buffer sampling.
namespace langmem::corpus {

struct CandidatePassage {
  std::string language;
  std::string text;  // UTF-8
  double lid_confidence = 0.0;
  double lid_proportion = 0.0;
  std::string source_id;

  void validate() const;
};

enum class RejectReason {
  Ok,
  TooShort,
  Url,
  RepeatedString,
  DigitRun,
  Garbled,
  LidConfidence,
  LidProportion,
};

std::string_view to_string(RejectReason reason);

struct FilterVerdict {
  bool accepted = false;
  RejectReason reason = RejectReason::Ok;

  friend bool operator==(const FilterVerdict&, const FilterVerdict&) = default;
};

/// Every length is counted in Unicode code points.
struct FilterConfig {
  std::size_t min_length = 601;
  std::vector<std::string> url_markers = {"http://"};
  std::size_t digit_run_length = 20;       // this many consecutive digits rejects
  std::size_t repeat_min_length = 20;      // substring length ...
  std::size_t repeat_min_count = 3;        // ... repeated back to back this often
  double max_garbled_fraction = 0.01;      // replacement chars + C0/C1 controls
  double min_lid_confidence = 0.90;        // strictly greater passes
  double min_lid_proportion = 0.90;        // strictly greater passes
};

/// Rules run in a fixed order (length, url, digit run, repeated string,
/// garbled, LID confidence, LID proportion); the first failure decides.
FilterVerdict filter_passage(const CandidatePassage& passage, const FilterConfig& config = {});

/// Pluggable language identification. No identifier ships with the library;
/// callers that have one can fill the LID fields before filtering.
struct LidResult {
  std::string language;
  double confidence = 0.0;
  double proportion = 0.0;
};
using LanguageIdentifier = std::function<LidResult(std::string_view text)>;

void apply_language_id(CandidatePassage& passage, const LanguageIdentifier& identify);

struct Shortfall {
  std::string language;
  std::size_t requested = 0;
  std::size_t obtained = 0;
};

struct SampleResult {
  /// Sampled passages in emission order. Left empty when an emitter is used.
  std::map<std::string, std::vector<CandidatePassage>> samples;
  std::map<std::string, std::size_t> counts;  // passages sampled per language
  std::vector<Shortfall> shortfall;           // ordered by language
};

/// Receives each sampled passage as soon as it is emitted.
using Emitter = std::function<void(const CandidatePassage&)>;

/// Uniform index in [0, bound) from a 64-bit engine by rejection, so draws
/// do not depend on the standard library's distribution implementation.
std::uint64_t uniform_index(std::mt19937_64& engine, std::uint64_t bound);

/// Per-language shuffle buffer. Items fill a buffer of `buffer_capacity`;
/// once full, each new item evicts (emits) a uniformly chosen slot and takes
/// its place. `finish` drains the remaining buffers in random order. The
/// first `quota` emissions per language form the sample. Consumption is
/// single-threaded: identical seed and input order give identical output.
///
/// With an emitter, sampled passages are handed off instead of retained, so
/// memory is bounded by the buffers alone.
class ShuffleSampler {
 public:
  ShuffleSampler(std::size_t quota, std::size_t buffer_capacity, std::uint64_t seed,
                 Emitter emitter = {});

  /// Registers a language that should appear in the shortfall report even
  /// if none of its passages reach the sampler.
  void expect_language(const std::string& language);
  void add(CandidatePassage passage);
  SampleResult finish();

  /// Largest number of passages held by any single language buffer so far.
  std::size_t peak_buffered() const { return peak_buffered_; }

 private:
  struct LanguageState {
    std::vector<CandidatePassage> buffer;
    std::vector<CandidatePassage> emitted;
    std::size_t emitted_count = 0;
  };

  void emit(LanguageState& state, CandidatePassage passage);

  std::size_t quota_;
  std::size_t capacity_;
  std::mt19937_64 engine_;
  Emitter emitter_;
  std::map<std::string, LanguageState> states_;
  std::size_t peak_buffered_ = 0;
};

SampleResult sample_corpus(std::span<const CandidatePassage> stream, std::size_t quota,
                           std::size_t buffer_capacity, std::uint64_t seed);

inline constexpr std::size_t kDefaultQuota = 50'000;
inline constexpr std::size_t kDefaultBufferCapacity = 5'000'000;

/// Streams {"language","text","lid_confidence","lid_proportion","source_id"}
/// records to `sink`. Returns the number of records read.
std::size_t read_passages_jsonl(std::istream& in,
                                const std::function<void(CandidatePassage)>& sink);
void write_passage_jsonl(std::ostream& out, const CandidatePassage& passage);

/// Decodes UTF-8 into code points; malformed bytes become U+FFFD.
std::u32string decode_utf8(std::string_view text);

}  // namespace langmem::corpus
