#include "langmem/memscore.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "langmem/error.hpp"

namespace langmem::memscore {

namespace {

constexpr double kLogprobSlack = 1e-9;

std::string id_of(const MemorizationRecord& r) {
  return "record '" + r.sample_id + "' (" + r.language + ")";
}

void check_logprobs(const MemorizationRecord& r, const std::vector<double>& logprobs,
                    std::size_t expected, const std::string& where) {
  if (logprobs.empty()) return;
  if (logprobs.size() != expected) {
    throw Error(ErrorCode::InvalidRecord, id_of(r) + ": " + where + " has " +
                                              std::to_string(logprobs.size()) +
                                              " log-probabilities for " +
                                              std::to_string(expected) + " tokens");
  }
  for (double lp : logprobs) {
    if (!std::isfinite(lp) || lp > kLogprobSlack) {
      throw Error(ErrorCode::InvalidRecord,
                  id_of(r) + ": " + where + " has a log-probability above 0 or non-finite");
    }
  }
}

struct NgramHash {
  std::size_t operator()(std::span<const TokenId> gram) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (TokenId t : gram) {
      h ^= std::hash<TokenId>{}(t) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

struct NgramEq {
  bool operator()(std::span<const TokenId> a, std::span<const TokenId> b) const noexcept {
    return std::equal(a.begin(), a.end(), b.begin(), b.end());
  }
};

using NgramCounts =
    std::unordered_map<std::span<const TokenId>, std::size_t, NgramHash, NgramEq>;

NgramCounts count_ngrams(std::span<const TokenId> seq, std::size_t n) {
  NgramCounts counts;
  if (seq.size() < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) ++counts[seq.subspan(i, n)];
  return counts;
}

void require_architecture(std::span<const MemorizationRecord> records) {
  for (const auto& r : records) {
    if (r.architecture != records.front().architecture) {
      throw Error(ErrorCode::WrongArchitecture,
                  id_of(r) + ": mixed causal and span records in one run");
    }
  }
}

}  // namespace

bool MemorizationRecord::has_logprobs() const {
  if (architecture == Architecture::Causal) return !reference_logprobs.empty();
  return !spans.empty() &&
         std::all_of(spans.begin(), spans.end(), [](const Span& s) { return !s.logprobs.empty(); });
}

void MemorizationRecord::validate() const {
  if (language.empty()) throw Error(ErrorCode::InvalidRecord, id_of(*this) + ": empty language");
  if (architecture == Architecture::Causal) {
    if (reference.empty()) {
      throw Error(ErrorCode::InvalidRecord, id_of(*this) + ": empty reference suffix");
    }
    if (!spans.empty()) {
      throw Error(ErrorCode::InvalidRecord, id_of(*this) + ": causal record carries spans");
    }
    check_logprobs(*this, reference_logprobs, reference.size(), "reference");
    return;
  }
  if (spans.empty()) throw Error(ErrorCode::InvalidRecord, id_of(*this) + ": no spans");
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const std::string where = "span " + std::to_string(i);
    if (spans[i].reference.empty()) {
      throw Error(ErrorCode::InvalidRecord, id_of(*this) + ": " + where + " is empty");
    }
    check_logprobs(*this, spans[i].logprobs, spans[i].reference.size(), where);
  }
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::EM: return "EM";
    case Metric::PM: return "PM";
    case Metric::RM_BLEU: return "RM_BLEU";
    case Metric::RM_ROUGE_L: return "RM_ROUGE_L";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

double em_ratio(const MemorizationRecord& record) {
  if (record.architecture != Architecture::Causal) {
    throw Error(ErrorCode::WrongArchitecture,
                id_of(record) + ": the prefix ratio is defined for causal records only");
  }
  const double n = static_cast<double>(record.prefix.size());
  const double m = static_cast<double>(record.reference.size());
  if (n + m == 0.0) throw Error(ErrorCode::EmptyInput, id_of(record) + ": no tokens");
  return n / (n + m);
}

bool exact_match(const MemorizationRecord& record) {
  if (record.architecture == Architecture::Causal) return record.predicted == record.reference;
  return !record.spans.empty() &&
         std::all_of(record.spans.begin(), record.spans.end(),
                     [](const Span& s) { return s.predicted == s.reference; });
}

std::map<std::string, double> em_rate(std::span<const MemorizationRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records");
  require_architecture(records);
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // matched, total
  for (const auto& r : records) {
    auto& [hit, total] = tally[r.language];
    hit += exact_match(r) ? 1 : 0;
    ++total;
  }
  std::map<std::string, double> out;
  for (const auto& [lang, t] : tally) {
    out[lang] = static_cast<double>(t.first) / static_cast<double>(t.second);
  }
  return out;
}

double bleu(std::span<const TokenId> candidate, std::span<const TokenId> reference) {
  if (reference.empty()) throw Error(ErrorCode::EmptyInput, "BLEU reference is empty");
  if (candidate.empty()) return 0.0;

  constexpr std::size_t kMaxOrder = 4;
  double log_precision_sum = 0.0;
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    const auto cand = count_ngrams(candidate, n);
    const auto ref = count_ngrams(reference, n);
    std::size_t matched = 0;
    for (const auto& [gram, count] : cand) {
      if (auto it = ref.find(gram); it != ref.end()) matched += std::min(count, it->second);
    }
    const std::size_t total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
    if (matched == 0) {
      if (n == 1) return 0.0;
      log_precision_sum += std::log(1.0 / static_cast<double>(total + 1));
    } else {
      log_precision_sum +=
          std::log(static_cast<double>(matched) / static_cast<double>(total));
    }
  }
  const double ratio =
      static_cast<double>(reference.size()) / static_cast<double>(candidate.size());
  const double log_bp = std::min(0.0, 1.0 - ratio);
  return std::exp(log_bp + log_precision_sum / static_cast<double>(kMaxOrder));
}

double rouge_l(std::span<const TokenId> candidate, std::span<const TokenId> reference) {
  if (reference.empty()) throw Error(ErrorCode::EmptyInput, "ROUGE-L reference is empty");
  if (candidate.empty()) return 0.0;
  std::vector<std::size_t> prev(reference.size() + 1, 0), cur(reference.size() + 1, 0);
  for (TokenId c : candidate) {
    for (std::size_t j = 1; j <= reference.size(); ++j) {
      cur[j] = c == reference[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<double>(prev.back());
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  return 2.0 * p * r / (p + r);
}

double pm_score(const MemorizationRecord& record) {
  if (!record.has_logprobs()) {
    throw Error(ErrorCode::MissingLogprobs, id_of(record) + ": no reference log-probabilities");
  }
  double sum = 0.0;
  if (record.architecture == Architecture::Causal) {
    for (double lp : record.reference_logprobs) sum += lp;
  } else {
    for (const auto& s : record.spans) {
      for (double lp : s.logprobs) sum += lp;
    }
  }
  return sum;
}

std::vector<LanguageScore> language_scores(std::span<const MemorizationRecord> records,
                                           const std::set<Metric>& metrics) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records");
  require_architecture(records);
  const bool span_run = records.front().architecture == Architecture::Span;
  for (Metric m : metrics) {
    if (span_run && (m == Metric::RM_BLEU || m == Metric::RM_ROUGE_L)) {
      throw Error(ErrorCode::RejectedMetric,
                  std::string(to_string(m)) +
                      " is not reported for span-corruption records (spans are too short)");
    }
  }

  std::map<std::string, std::vector<const MemorizationRecord*>> groups;
  for (const auto& r : records) groups[r.language].push_back(&r);

  std::vector<LanguageScore> out;
  for (const auto& [lang, group] : groups) {
    const auto count = static_cast<double>(group.size());
    for (Metric metric : kAllMetrics) {
      if (!metrics.count(metric)) continue;
      double sum = 0.0;
      for (const MemorizationRecord* r : group) {
        switch (metric) {
          case Metric::EM: sum += exact_match(*r) ? 1.0 : 0.0; break;
          case Metric::PM: sum += pm_score(*r); break;
          case Metric::RM_BLEU: sum += 100.0 * bleu(r->predicted, r->reference); break;
          case Metric::RM_ROUGE_L: sum += 100.0 * rouge_l(r->predicted, r->reference); break;
        }
      }
      out.push_back({lang, metric, sum / count, group.size()});
    }
  }
  return out;
}

std::set<Metric> applicable_metrics(Architecture architecture) {
  if (architecture == Architecture::Span) return {Metric::EM, Metric::PM};
  return {std::begin(kAllMetrics), std::end(kAllMetrics)};
}

std::vector<LanguageScore> macro_average(std::span<const LanguageScore> scores) {
  std::map<Metric, std::pair<double, std::size_t>> sums;
  std::map<Metric, std::size_t> samples;
  for (const auto& s : scores) {
    auto& [total, languages] = sums[s.metric];
    total += s.value;
    ++languages;
    samples[s.metric] += s.sample_count;
  }
  std::vector<LanguageScore> out;
  for (const auto& [metric, acc] : sums) {
    out.push_back({"ALL", metric, acc.first / static_cast<double>(acc.second), samples[metric]});
  }
  return out;
}

Tokens WhitespaceVocabulary::tokenize(std::string_view text) {
  Tokens out;
  std::istringstream words{std::string(text)};
  std::string w;
  while (words >> w) {
    auto [it, inserted] = ids_.try_emplace(w, static_cast<TokenId>(ids_.size()));
    out.push_back(it->second);
  }
  return out;
}

std::vector<MemorizationRecord> read_records_jsonl(std::istream& in,
                                                   const RecordReadOptions& options) {
  WhitespaceVocabulary vocab;
  auto tokens = [&](const nlohmann::json& obj, const char* ids_key, const char* text_key,
                    bool required) -> Tokens {
    if (options.text_mode) {
      if (!obj.contains(text_key)) {
        if (required) throw Error(ErrorCode::InvalidRecord, std::string("missing ") + text_key);
        return {};
      }
      return vocab.tokenize(obj.at(text_key).get<std::string>());
    }
    if (!obj.contains(ids_key)) {
      if (required) throw Error(ErrorCode::InvalidRecord, std::string("missing ") + ids_key);
      return {};
    }
    return obj.at(ids_key).get<Tokens>();
  };
  auto logprobs = [](const nlohmann::json& obj) {
    return obj.contains("reference_logprobs") && !obj.at("reference_logprobs").is_null()
               ? obj.at("reference_logprobs").get<std::vector<double>>()
               : std::vector<double>{};
  };

  std::vector<MemorizationRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "records line " + std::to_string(line_no);
    MemorizationRecord r;
    try {
      const auto rec = nlohmann::json::parse(line);
      r.language = rec.at("language").get<std::string>();
      r.sample_id = rec.contains("sample_id") ? rec.at("sample_id").get<std::string>()
                                              : std::to_string(line_no);
      const std::string arch = rec.value("architecture", std::string("causal"));
      if (arch == "causal") {
        r.architecture = Architecture::Causal;
      } else if (arch == "span") {
        r.architecture = Architecture::Span;
      } else {
        throw Error(ErrorCode::InvalidRecord, "unknown architecture '" + arch + "'");
      }
      r.prefix = tokens(rec, "prefix_tokens", "prefix_text", false);
      if (r.architecture == Architecture::Causal) {
        r.reference = tokens(rec, "reference_tokens", "reference_text", true);
        r.predicted = tokens(rec, "predicted_tokens", "predicted_text", true);
        r.reference_logprobs = logprobs(rec);
      } else {
        for (const auto& s : rec.at("spans")) {
          r.spans.push_back({tokens(s, "reference_tokens", "reference_text", true),
                             tokens(s, "predicted_tokens", "predicted_text", true),
                             logprobs(s)});
        }
      }
      r.validate();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidRecord, where + ": " + e.what());
    } catch (const Error& e) {
      throw e.with_context(where);
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no memorization records");
  return records;
}

void write_record_jsonl(std::ostream& out, const MemorizationRecord& record) {
  nlohmann::ordered_json j;
  j["language"] = record.language;
  j["sample_id"] = record.sample_id;
  j["architecture"] = record.architecture == Architecture::Causal ? "causal" : "span";
  j["prefix_tokens"] = record.prefix;
  if (record.architecture == Architecture::Causal) {
    j["reference_tokens"] = record.reference;
    j["predicted_tokens"] = record.predicted;
    j["reference_logprobs"] = record.reference_logprobs;
  } else {
    auto spans = nlohmann::ordered_json::array();
    for (const auto& s : record.spans) {
      nlohmann::ordered_json o;
      o["reference_tokens"] = s.reference;
      o["predicted_tokens"] = s.predicted;
      o["reference_logprobs"] = s.logprobs;
      spans.push_back(std::move(o));
    }
    j["spans"] = std::move(spans);
  }
  out << j.dump() << '\n';
}

std::vector<MemorizationRecord> load_records_jsonl(const std::string& path,
                                                   const RecordReadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return read_records_jsonl(in, options);
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

}  // namespace langmem::memscore
