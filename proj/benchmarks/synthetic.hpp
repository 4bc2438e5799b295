#pragma once

#include <string>
#include <vector>

#include "readtrace/random.hpp"
#include "readtrace/stimulus.hpp"
#include "readtrace/trial.hpp"

namespace readtrace::bench {

inline std::string words(Rng& rng, std::size_t n) {
  static const char* const lexicon[] = {"the", "reply", "is", "short", "and", "clear,", "but", "long"};
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) out += ' ';
    out += lexicon[rng.below(8)];
  }
  return out;
}

inline TokenizedStimulus stimulus(Rng& rng, std::size_t prompt, std::size_t response) {
  std::string p = words(rng, prompt);
  std::string a = words(rng, response);
  std::string b = words(rng, response);
  return TokenizedStimulus("bench", std::move(p), std::move(a), std::move(b));
}

// A left-to-right sweep over every section, one event per character.
inline std::vector<HoverEvent> sweep(const TokenizedStimulus& s, Rng& rng) {
  std::vector<HoverEvent> events;
  std::int64_t now = 0;
  for (Section section : {Section::Prompt, Section::ResponseA, Section::ResponseB}) {
    for (std::size_t c = 0; c < s.char_count(section); ++c) {
      const auto d = static_cast<std::int64_t>(20 + rng.below(60));
      events.push_back({section, c, now, now + d});
      now += d;
    }
  }
  return events;
}

}  // namespace readtrace::bench
