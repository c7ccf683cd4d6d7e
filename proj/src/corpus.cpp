#include "langmem/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include "langmem/error.hpp"

namespace langmem::corpus {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

bool is_garbled(char32_t c) {
  if (c == kReplacement) return true;
  if (c < 0x20) return !(c == U'\t' || c == U'\n' || c == U'\v' || c == U'\f' || c == U'\r');
  return c >= 0x80 && c <= 0x9F;
}

bool has_digit_run(const std::u32string& cps, std::size_t length) {
  std::size_t run = 0;
  for (char32_t c : cps) {
    run = is_ascii_digit(c) ? run + 1 : 0;
    if (run >= length) return true;
  }
  return false;
}

// True when some substring of length >= min_length occurs `count` times back
// to back. For a period L that means (count - 1) * L consecutive positions
// with cps[j] == cps[j + L].
bool has_repeated_string(const std::u32string& cps, std::size_t min_length, std::size_t count) {
  if (count < 2 || min_length == 0) return false;
  const std::size_t n = cps.size();
  for (std::size_t period = min_length; period * count <= n; ++period) {
    const std::size_t needed = (count - 1) * period;
    std::size_t run = 0;
    for (std::size_t j = 0; j + period < n; ++j) {
      run = cps[j] == cps[j + period] ? run + 1 : 0;
      if (run >= needed) return true;
    }
  }
  return false;
}

double garbled_fraction(const std::u32string& cps) {
  if (cps.empty()) return 0.0;
  const auto bad = std::count_if(cps.begin(), cps.end(), is_garbled);
  return static_cast<double>(bad) / static_cast<double>(cps.size());
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = i + len <= text.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    // Reject overlong forms, surrogates and out-of-range values.
    static constexpr char32_t kMinForLength[] = {0, 0, 0x80, 0x800, 0x10000};
    if (ok && (cp < kMinForLength[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) {
      ok = false;
    }
    if (ok) {
      out.push_back(cp);
      i += len;
    } else {
      out.push_back(kReplacement);
      ++i;
    }
  }
  return out;
}

void CandidatePassage::validate() const {
  if (text.empty()) throw Error(ErrorCode::InvalidRecord, "passage '" + source_id + "' is empty");
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(lid_confidence) || !in_unit(lid_proportion)) {
    throw Error(ErrorCode::InvalidRecord,
                "passage '" + source_id + "' has a language-ID score outside [0, 1]");
  }
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::Ok: return "ok";
    case RejectReason::TooShort: return "too_short";
    case RejectReason::Url: return "url";
    case RejectReason::RepeatedString: return "repeated_string";
    case RejectReason::DigitRun: return "digit_run";
    case RejectReason::Garbled: return "garbled";
    case RejectReason::LidConfidence: return "lid_confidence";
    case RejectReason::LidProportion: return "lid_proportion";
  }
  return "?";
}

FilterVerdict filter_passage(const CandidatePassage& passage, const FilterConfig& config) {
  const auto reject = [](RejectReason r) { return FilterVerdict{false, r}; };
  const std::u32string cps = decode_utf8(passage.text);

  if (cps.size() < config.min_length) return reject(RejectReason::TooShort);
  for (const auto& marker : config.url_markers) {
    if (!marker.empty() && passage.text.find(marker) != std::string::npos) {
      return reject(RejectReason::Url);
    }
  }
  if (has_digit_run(cps, config.digit_run_length)) return reject(RejectReason::DigitRun);
  if (has_repeated_string(cps, config.repeat_min_length, config.repeat_min_count)) {
    return reject(RejectReason::RepeatedString);
  }
  if (garbled_fraction(cps) > config.max_garbled_fraction) return reject(RejectReason::Garbled);
  if (!(passage.lid_confidence > config.min_lid_confidence)) {
    return reject(RejectReason::LidConfidence);
  }
  if (!(passage.lid_proportion > config.min_lid_proportion)) {
    return reject(RejectReason::LidProportion);
  }
  return {true, RejectReason::Ok};
}

void apply_language_id(CandidatePassage& passage, const LanguageIdentifier& identify) {
  const LidResult lid = identify(passage.text);
  passage.language = lid.language;
  passage.lid_confidence = lid.confidence;
  passage.lid_proportion = lid.proportion;
}

std::uint64_t uniform_index(std::mt19937_64& engine, std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::InvalidArgument, "uniform_index bound is 0");
  // Draws below 2^64 mod bound would bias the low residues.
  const std::uint64_t threshold = (0 - bound) % bound;
  std::uint64_t draw;
  do {
    draw = engine();
  } while (draw < threshold);
  return draw % bound;
}

ShuffleSampler::ShuffleSampler(std::size_t quota, std::size_t buffer_capacity, std::uint64_t seed,
                               Emitter emitter)
    : quota_(quota), capacity_(buffer_capacity), engine_(seed), emitter_(std::move(emitter)) {
  if (quota == 0) throw Error(ErrorCode::InvalidArgument, "quota must be positive");
  if (buffer_capacity == 0) throw Error(ErrorCode::InvalidArgument, "buffer capacity must be positive");
}

void ShuffleSampler::expect_language(const std::string& language) { states_[language]; }

void ShuffleSampler::emit(LanguageState& state, CandidatePassage passage) {
  ++state.emitted_count;
  if (emitter_) {
    emitter_(passage);
  } else {
    state.emitted.push_back(std::move(passage));
  }
  if (state.emitted_count >= quota_) {
    // Quota reached: nothing else from this language can be emitted.
    state.buffer.clear();
    state.buffer.shrink_to_fit();
  }
}

void ShuffleSampler::add(CandidatePassage passage) {
  LanguageState& state = states_[passage.language];
  if (state.emitted_count >= quota_) return;
  if (state.buffer.size() < capacity_) {
    state.buffer.push_back(std::move(passage));
    peak_buffered_ = std::max(peak_buffered_, state.buffer.size());
    return;
  }
  const auto slot = static_cast<std::size_t>(uniform_index(engine_, state.buffer.size()));
  CandidatePassage evicted = std::move(state.buffer[slot]);
  state.buffer[slot] = std::move(passage);
  emit(state, std::move(evicted));
}

SampleResult ShuffleSampler::finish() {
  SampleResult result;
  for (auto& [language, state] : states_) {
    while (!state.buffer.empty() && state.emitted_count < quota_) {
      const auto slot = static_cast<std::size_t>(uniform_index(engine_, state.buffer.size()));
      CandidatePassage picked = std::move(state.buffer[slot]);
      state.buffer[slot] = std::move(state.buffer.back());
      state.buffer.pop_back();
      emit(state, std::move(picked));
    }
    state.buffer.clear();
    if (state.emitted_count < quota_) {
      result.shortfall.push_back({language, quota_, state.emitted_count});
    }
    result.counts[language] = state.emitted_count;
    if (!emitter_) result.samples[language] = std::move(state.emitted);
  }
  states_.clear();
  return result;
}

SampleResult sample_corpus(std::span<const CandidatePassage> stream, std::size_t quota,
                           std::size_t buffer_capacity, std::uint64_t seed) {
  ShuffleSampler sampler(quota, buffer_capacity, seed);
  for (const auto& p : stream) sampler.add(p);
  return sampler.finish();
}

std::size_t read_passages_jsonl(std::istream& in,
                                const std::function<void(CandidatePassage)>& sink) {
  std::string line;
  std::size_t line_no = 0, count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    CandidatePassage p;
    try {
      const auto rec = nlohmann::json::parse(line);
      p.language = rec.at("language").get<std::string>();
      p.text = rec.at("text").get<std::string>();
      p.lid_confidence = rec.at("lid_confidence").get<double>();
      p.lid_proportion = rec.at("lid_proportion").get<double>();
      p.source_id = rec.contains("source_id") ? rec.at("source_id").get<std::string>()
                                              : std::to_string(line_no);
      p.validate();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidRecord, "passages line " + std::to_string(line_no) + ": " +
                                                e.what());
    } catch (const Error& e) {
      throw e.with_context("passages line " + std::to_string(line_no));
    }
    sink(std::move(p));
    ++count;
  }
  return count;
}

void write_passage_jsonl(std::ostream& out, const CandidatePassage& passage) {
  nlohmann::ordered_json rec;
  rec["language"] = passage.language;
  rec["text"] = passage.text;
  rec["lid_confidence"] = passage.lid_confidence;
  rec["lid_proportion"] = passage.lid_proportion;
  rec["source_id"] = passage.source_id;
  // Invalid UTF-8 is replaced rather than aborting the whole dump.
  out << rec.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
}

}  // namespace langmem::corpus
