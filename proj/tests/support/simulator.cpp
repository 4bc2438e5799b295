#include "simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace readtrace::testkit {

namespace {

constexpr std::array<const char*, 24> kLexicon{
    "the",   "model",  "answer", "is",     "helpful", "because", "it",      "explains",
    "a",     "simple", "step",   "before", "the",     "next",    "one,",    "and",
    "users", "often",  "prefer", "short",  "clear",   "replies.", "Human:", "Assistant:"};

}  // namespace

std::string random_text(Rng& rng, std::size_t words) {
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i > 0) out += rng.below(12) == 0 ? "\n" : " ";
    out += kLexicon[rng.below(kLexicon.size())];
  }
  return out;
}

TokenizedStimulus random_stimulus(Rng& rng, const std::string& id, std::size_t prompt_words,
                                  std::size_t a_words, std::size_t b_words) {
  std::string prompt = random_text(rng, prompt_words);
  std::string a = random_text(rng, a_words);
  std::string b = random_text(rng, b_words);
  return TokenizedStimulus(id, std::move(prompt), std::move(a), std::move(b));
}

EventScript& EventScript::read(Section section, std::size_t word_in_section, std::int64_t dwell_ms) {
  const Word& w = stimulus_.words(section)[word_in_section];
  const auto chars = static_cast<std::int64_t>(w.end - w.begin);
  const std::int64_t share = dwell_ms / chars;
  for (std::size_t c = w.begin; c < w.end; ++c) {
    const std::int64_t d = c + 1 == w.end ? dwell_ms - share * (chars - 1) : share;
    events_.push_back(HoverEvent{section, c, now_, now_ + d});
    now_ += d;
  }
  return *this;
}

EventScript& EventScript::read_range(Section section, std::size_t from, std::size_t to,
                                     std::int64_t dwell_ms) {
  for (std::size_t k = from; k < to; ++k) read(section, k, dwell_ms);
  return *this;
}

EventScript& EventScript::hover_char(Section section, std::size_t char_index, std::int64_t ms) {
  events_.push_back(HoverEvent{section, char_index, now_, now_ + ms});
  now_ += ms;
  return *this;
}

EventScript& EventScript::wait(std::int64_t ms) {
  now_ += ms;
  return *this;
}

std::vector<HoverEvent> simulate_reading(const TokenizedStimulus& stimulus, Choice choice,
                                         Layout layout, const ReaderProfile& profile, Rng& rng) {
  EventScript script(stimulus, 1000 + static_cast<std::int64_t>(rng.below(500)));
  const auto dwell = [&] {
    return profile.min_dwell_ms +
           static_cast<std::int64_t>(rng.below(
               static_cast<std::size_t>(profile.max_dwell_ms - profile.min_dwell_ms + 1)));
  };
  const auto words_until = [&](Section s, double stop) {
    const std::size_t n = stimulus.word_count(s);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(stop * static_cast<double>(n))),
                                   1, n);
  };
  const Section chosen = choice == Choice::ResponseA ? Section::ResponseA : Section::ResponseB;
  const auto limit = [&](Section s) {
    return words_until(s, s == chosen ? profile.chosen_stop : profile.rejected_stop);
  };
  const auto read_words = [&](Section s, std::size_t from, std::size_t to) {
    for (std::size_t k = from; k < to; ++k) script.read(s, k, dwell());
    script.wait(static_cast<std::int64_t>(rng.below(200)));
  };
  const Section left = left_section(layout);
  const Section right = left == Section::ResponseA ? Section::ResponseB : Section::ResponseA;

  read_words(Section::Prompt, 0, stimulus.word_count(Section::Prompt));
  read_words(left, 0, limit(left));
  read_words(right, 0, limit(right));
  switch (profile.strategy) {
    case Strategy::Linear:
      break;
    case Strategy::PromptReturn:
      read_words(Section::Prompt, 0, std::min<std::size_t>(6, stimulus.word_count(Section::Prompt)));
      break;
    case Strategy::Loop: {
      // Skims the openings again; never past the first visit's stop point.
      const auto skim = [&](Section s) {
        return std::min(limit(s), std::max<std::size_t>(6, limit(s) / 3));
      };
      read_words(left, 0, skim(left));
      read_words(right, 0, skim(right));
      break;
    }
  }
  return script.events();
}

PlantedCorpus simulate_planted(const PlantedOptions& options) {
  PlantedCorpus corpus;
  Rng rng(options.seed);
  char id[32];
  for (std::size_t s = 0; s < options.stimuli; ++s) {
    std::snprintf(id, sizeof id, "stim-%04zu", s);
    StimulusRecord record{id, random_text(rng, 20 + rng.below(20)),
                          random_text(rng, 40 + rng.below(30)),
                          random_text(rng, 40 + rng.below(30)), std::nullopt};
    const TokenizedStimulus stimulus = tokenize_stimulus(record);
    const bool consensus = rng.uniform() < options.consensus_share;
    const Choice majority = rng.coin() ? Choice::ResponseA : Choice::ResponseB;
    const Choice minority = majority == Choice::ResponseA ? Choice::ResponseB : Choice::ResponseA;
    const std::size_t dissenter = rng.below(3);
    for (std::size_t k = 0; k < 3; ++k) {
      TrialRecord t;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s-a%zu", id, k);
      t.trial_id = buf;
      std::snprintf(buf, sizeof buf, "P%03zu", (s * 3 + k) % 90);
      t.participant_id = buf;
      std::snprintf(buf, sizeof buf, "S%03zu", (s * 3 + k) % 90);
      t.session_id = buf;
      t.stimulus_id = id;
      t.order = s % 10;
      t.layout = rng.coin() ? Layout::ALeft : Layout::ARight;
      t.choice = consensus || k != dissenter ? majority : minority;
      t.rationale = kAllRationales[rng.below(kAllRationales.size())];
      ReaderProfile profile;
      profile.chosen_stop = rng.uniform(0.75, 1.0);
      profile.rejected_stop = rng.uniform(0.3, 1.0);
      if (consensus) {
        profile.strategy = Strategy::PromptReturn;
      } else {
        profile.strategy = rng.uniform() < options.loop_rate ? Strategy::Loop : Strategy::Linear;
      }
      t.events = simulate_reading(stimulus, t.choice, t.layout, profile, rng);
      t.started_at = 1'700'000'000'000LL + t.events.front().enter_ms;
      t.ended_at = 1'700'000'000'000LL + t.events.back().exit_ms;
      corpus.trials.push_back(std::move(t));
    }
    corpus.stimuli.push_back(std::move(record));
  }
  return corpus;
}

}  // namespace readtrace::testkit
