#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

// Exact (EM), relaxed (BLEU / ROUGE-L) and likelihood (PM) memorization
// scores computed from model-output records.
namespace langmem::memscore {

using TokenId = std::int64_t;
using Tokens = std::vector<TokenId>;

enum class Architecture { Causal, Span };

/// One masked span of a span-corruption record.
struct Span {
  Tokens reference;
  Tokens predicted;
  std::vector<double> logprobs;  // natural log, one per reference token
};

struct MemorizationRecord {
  std::string language;
  std::string sample_id;
  Architecture architecture = Architecture::Causal;
  Tokens prefix;                          // n tokens
  Tokens reference;                       // m tokens, the true suffix
  Tokens predicted;                       // greedy continuation
  std::vector<double> reference_logprobs; // empty when the run did not export them
  std::vector<Span> spans;                // span records only

  /// Shape checks. Log-probabilities may be absent, but when present they
  /// must align with the reference tokens and be <= 1e-9.
  void validate() const;
  bool has_logprobs() const;
};

enum class Metric { EM, PM, RM_BLEU, RM_ROUGE_L };

inline constexpr Metric kAllMetrics[] = {Metric::EM, Metric::PM, Metric::RM_BLEU,
                                         Metric::RM_ROUGE_L};

std::string_view to_string(Metric metric);
std::optional<Metric> parse_metric(std::string_view name);

struct LanguageScore {
  std::string language;
  Metric metric = Metric::EM;
  double value = 0.0;  // EM in [0, 1], RM in [0, 100], PM <= 0
  std::size_t sample_count = 0;
};

/// n / (n + m): the share of the sequence given as prompt.
double em_ratio(const MemorizationRecord& record);

/// Causal: prediction equals the reference token for token. Span: every
/// span's prediction equals its reference.
bool exact_match(const MemorizationRecord& record);

/// Per-language fraction of exactly matched records.
std::map<std::string, double> em_rate(std::span<const MemorizationRecord> records);

/// Sentence BLEU-4 with uniform weights. A zero match count at n >= 2 is
/// replaced by (0 + 1) / (total + 1). Brevity penalty
/// exp(min(0, 1 - |ref| / |cand|)). Empty candidate scores 0.
double bleu(std::span<const TokenId> candidate, std::span<const TokenId> reference);

/// LCS-based F1; 0 when nothing is shared.
double rouge_l(std::span<const TokenId> candidate, std::span<const TokenId> reference);

/// Sum of reference-token log-probabilities (all spans for span records).
double pm_score(const MemorizationRecord& record);

/// Per-language aggregates, ordered by language then metric. EM is a
/// fraction, PM the mean of pm_score, RM the mean per-sample score x 100.
std::vector<LanguageScore> language_scores(std::span<const MemorizationRecord> records,
                                           const std::set<Metric>& metrics);

/// Every metric defined for the architecture (no RM for span records).
std::set<Metric> applicable_metrics(Architecture architecture);

/// Unweighted mean of each metric over languages, reported as language
/// "ALL"; sample_count is the total.
std::vector<LanguageScore> macro_average(std::span<const LanguageScore> scores);

/// Interns whitespace-separated words for the text fallback mode.
class WhitespaceVocabulary {
 public:
  Tokens tokenize(std::string_view text);

 private:
  std::unordered_map<std::string, TokenId> ids_;
};

struct RecordReadOptions {
  /// Read "prefix_text" / "reference_text" / "predicted_text" and compare
  /// whitespace tokens instead of model token IDs.
  bool text_mode = false;
};

std::vector<MemorizationRecord> read_records_jsonl(std::istream& in,
                                                   const RecordReadOptions& options = {});
void write_record_jsonl(std::ostream& out, const MemorizationRecord& record);

std::vector<MemorizationRecord> load_records_jsonl(const std::string& path,
                                                   const RecordReadOptions& options = {});

}  // namespace langmem::memscore
