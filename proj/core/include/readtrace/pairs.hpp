#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "readtrace/metrics.hpp"
#include "readtrace/stimulus.hpp"

namespace readtrace {

// A retained, annotated trial together with its metrics; the unit that
// agreement analyses are built from.
struct AnnotatedTrial {
  std::string trial_id;
  std::string participant_id;
  std::string stimulus_id;
  Section chosen = Section::ResponseA;
  Rationale rationale = Rationale::Other;
  Layout layout = Layout::ALeft;
  TrialMetrics metrics;
};

// One unordered annotator pair on one stimulus. Members index into the
// AnnotatedTrial list that produced the pair set.
struct PairObservation {
  std::string stimulus_id;
  std::size_t first = 0;
  std::size_t second = 0;
  bool agree = false;
  bool shared_rationale = false;
  double focus_overlap = 0.0;
};

struct SkippedStimulus {
  std::string stimulus_id;
  std::size_t annotations = 0;
};

struct PairSet {
  std::vector<PairObservation> pairs;
  std::vector<SkippedStimulus> skipped;  // fewer than two annotations

  std::size_t agreeing() const;
  std::size_t disagreeing() const { return pairs.size() - agreeing(); }
};

// Emits every unordered pair of annotations per stimulus. Output order is
// independent of input order: stimuli by id, members by (participant, trial).
PairSet build_pairs(std::span<const AnnotatedTrial> trials);

// Counts for categorical tests. Each pair contributes one count per member:
// row = category(member), column 0 = pair agrees, column 1 = pair disagrees.
std::vector<std::vector<std::int64_t>> membership_table(
    const PairSet& pairs, std::span<const AnnotatedTrial> trials, std::size_t categories,
    const std::function<std::size_t(const AnnotatedTrial&)>& category);

// Pair-level variant: row = category(pair).
std::vector<std::vector<std::int64_t>> pair_table(
    const PairSet& pairs, std::size_t categories,
    const std::function<std::size_t(const PairObservation&)>& category);

struct GroupedValues {
  std::vector<double> agree;
  std::vector<double> disagree;
};

// Continuous comparisons: each pair contributes both members' values to the
// group of its agreement outcome.
GroupedValues member_values(const PairSet& pairs, std::span<const AnnotatedTrial> trials,
                            const std::function<double(const AnnotatedTrial&)>& value);

// One value per pair (for pair-level quantities such as focus overlap).
GroupedValues pair_values(const PairSet& pairs,
                          const std::function<double(const PairObservation&)>& value);

}  // namespace readtrace
