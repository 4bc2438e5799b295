#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "readtrace/random.hpp"
#include "readtrace/stimulus.hpp"
#include "readtrace/trial.hpp"

namespace readtrace::testkit {

// Space-separated words drawn from a small lexicon, with the odd newline.
std::string random_text(Rng& rng, std::size_t words);

TokenizedStimulus random_stimulus(Rng& rng, const std::string& id, std::size_t prompt_words,
                                  std::size_t a_words, std::size_t b_words);

// Builds hover events the way a reader sweeping the cursor would: every
// character of a word gets one event, back to back, and the word's dwell is
// split evenly across its characters.
class EventScript {
 public:
  explicit EventScript(const TokenizedStimulus& stimulus, std::int64_t start_ms = 0)
      : stimulus_(stimulus), now_(start_ms) {}

  EventScript& read(Section section, std::size_t word_in_section, std::int64_t dwell_ms);
  // Reads words [from, to) of a section at a fixed dwell each.
  EventScript& read_range(Section section, std::size_t from, std::size_t to, std::int64_t dwell_ms);
  EventScript& hover_char(Section section, std::size_t char_index, std::int64_t ms);
  EventScript& wait(std::int64_t ms);

  std::int64_t now() const { return now_; }
  const std::vector<HoverEvent>& events() const { return events_; }

 private:
  const TokenizedStimulus& stimulus_;
  std::int64_t now_;
  std::vector<HoverEvent> events_;
};

enum class Strategy {
  Linear,        // prompt, left, right
  PromptReturn,  // prompt, left, right, prompt again
  Loop,          // prompt, left, right, left, right
};

struct ReaderProfile {
  Strategy strategy = Strategy::Linear;
  // Fraction of each response read before the reader moves on.
  double chosen_stop = 1.0;
  double rejected_stop = 1.0;
  std::int64_t min_dwell_ms = 180;
  std::int64_t max_dwell_ms = 420;
};

std::vector<HoverEvent> simulate_reading(const TokenizedStimulus& stimulus, Choice choice,
                                         Layout layout, const ReaderProfile& profile, Rng& rng);

// Annotator populations with planted effects:
//   consensus stimuli: all three annotators pick the same response and return
//     to the prompt before deciding (re-read, no loop, path length 3);
//   split stimuli: two against one, each annotator looping between the
//     responses with probability loop_rate and otherwise reading once.
// Every reader stops early in the rejected response (stop point uniform in
// [0.3, 1]) and late in the chosen one (uniform in [0.75, 1]).
struct PlantedCorpus {
  std::vector<StimulusRecord> stimuli;
  std::vector<TrialRecord> trials;
};

struct PlantedOptions {
  std::size_t stimuli = 200;
  double consensus_share = 0.5;
  double loop_rate = 0.6;
  std::uint64_t seed = 1;
};

PlantedCorpus simulate_planted(const PlantedOptions& options);

}  // namespace readtrace::testkit
