#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "readtrace/stimulus.hpp"
#include "readtrace/trial.hpp"

namespace readtrace {

// A contiguous episode on one word, built from hover events. These play the
// role of fixations in eye-tracking data.
struct Fixation {
  std::size_t word_index = 0;  // stimulus-global
  std::int64_t duration_ms = 0;
  std::size_t order = 0;  // position in the uncleaned sequence

  friend bool operator==(const Fixation&, const Fixation&) = default;
};

struct ConsolidationResult {
  std::vector<Fixation> fixations;
  std::size_t whitespace_events = 0;  // hovered characters that belong to no word
  std::size_t dropped_events = 0;     // char index outside its section

  bool malformed() const { return dropped_events > 0; }
};

// Total dwell per word, indexed by stimulus-global word index.
struct DurationVector {
  std::vector<std::int64_t> totals;

  std::size_t size() const { return totals.size(); }
};

// Per-word discretized z-score of dwell: 0 for unread words, 1..5 otherwise.
struct BinnedVector {
  std::vector<int> bins;

  std::size_t size() const { return bins.size(); }
};

// Mean bin per word across participants.
struct AggregateVector {
  std::vector<double> means;
  std::size_t participant_count = 0;
};

// Inclusive bounds on a plausible fixation length.
struct FixationWindow {
  std::int64_t min_ms = 160;
  std::int64_t max_ms = 4000;
};

// Maps character events to words and merges maximal runs of consecutive
// events on the same word. Whitespace and zero-length events are skipped;
// events with an out-of-range character index are dropped and counted.
ConsolidationResult consolidate(std::span<const HoverEvent> events,
                                const TokenizedStimulus& stimulus);

std::vector<Fixation> clean_fixations(std::span<const Fixation> fixations,
                                      FixationWindow window = {});

// Throws MalformedTrialError if a fixation references a word >= n.
DurationVector total_dwell(std::span<const Fixation> cleaned, std::size_t n);

// Bin for a single z-score:
//   NaN -> 0, z < -1 -> 1, [-1,-0.5) -> 2, [-0.5,0.5) -> 3, [0.5,1) -> 4, z >= 1 -> 5.
int bin_zscore(double z);

// Standardizes nonzero totals by their population mean and sd and bins the
// result. Unread words get 0. With fewer than two read words, or zero spread,
// every read word gets 3. Comparisons against the bin edges are done in exact
// integer arithmetic, so the result is invariant under positive rescaling.
BinnedVector zscore_bins(const DurationVector& durations);

// Column means of the binned vectors. Throws ValidationError on an empty list
// or a length mismatch; the message names the participant label if given.
AggregateVector aggregate_bins(std::span<const BinnedVector> binned,
                               std::span<const std::string> participant_labels = {});

}  // namespace readtrace
