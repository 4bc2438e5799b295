#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "readtrace/gaze.hpp"
#include "readtrace/stimulus.hpp"
#include "readtrace/trial.hpp"

namespace readtrace {

// Minimum wall-clock span of a run inside one section for it to count as
// reading that section.
inline constexpr std::int64_t kMinVisitMs = 1000;

struct SectionVisit {
  Section section = Section::Prompt;
  std::int64_t enter_ms = 0;
  std::int64_t exit_ms = 0;

  std::int64_t dwell_ms() const { return exit_ms - enter_ms; }

  friend bool operator==(const SectionVisit&, const SectionVisit&) = default;
};

// Ordered section visits; no two consecutive visits share a section.
struct ReadingPath {
  std::vector<SectionVisit> visits;

  // Number of edges traversed.
  std::size_t length() const { return visits.empty() ? 0 : visits.size() - 1; }
};

// Splits the events into maximal same-section runs, keeps runs spanning at
// least min_visit_ms, and merges surviving neighbours in the same section.
ReadingPath extract_path(std::span<const HoverEvent> events,
                         std::int64_t min_visit_ms = kMinVisitMs);

struct SectionFlags {
  bool reread_prompt = false;
  bool reread_chosen = false;
  bool reread_rejected = false;
  std::optional<Role> last_section;
  bool loop = false;
  // Switches between the two responses once non-response visits are removed
  // and repeats collapsed. loop == (response_switches >= 2).
  std::size_t response_switches = 0;
  std::size_t path_length = 0;

  bool reread_any() const { return reread_prompt || reread_chosen || reread_rejected; }
  bool reread_response() const { return reread_chosen || reread_rejected; }
};

// Throws ValidationError when choice is None.
SectionFlags section_flags(const ReadingPath& path, Choice choice);

struct Coverage {
  double overall = 0.0;
  std::array<double, 3> per_section{};  // indexed by Section
  std::size_t covered_total = 0;
  std::array<std::size_t, 3> covered{};
};

// A word is covered iff it has at least one cleaned fixation.
Coverage coverage(std::span<const Fixation> cleaned, const TokenizedStimulus& stimulus);

// Mean dwell per word over both responses; the prompt is excluded.
double response_reading_rate(const DurationVector& durations, const TokenizedStimulus& stimulus);

struct SkipPosition {
  Role role = Role::Chosen;
  double position = 0.0;  // index within response / (count - 1); 0 for one word
  bool skipped = false;

  friend bool operator==(const SkipPosition&, const SkipPosition&) = default;
};

struct SkipProfile {
  std::size_t skipped_chosen = 0;
  std::size_t skipped_rejected = 0;
  std::vector<SkipPosition> positions;  // chosen words first, then rejected
};

// A word is skipped iff its cleaned dwell is zero. Throws ValidationError
// when choice is None.
SkipProfile skip_profile(const DurationVector& durations, const TokenizedStimulus& stimulus,
                         Choice choice);

inline constexpr int kFocusMinBin = 2;

// Sorted indices of words with bin >= min_bin.
std::vector<std::size_t> focus_set(const BinnedVector& binned, int min_bin = kFocusMinBin);

// Jaccard index of two sorted index sets; 1.0 when both are empty.
double focus_overlap(std::span<const std::size_t> a, std::span<const std::size_t> b);

struct TrialMetrics {
  bool reread_prompt = false;
  bool reread_chosen = false;
  bool reread_rejected = false;
  std::optional<Role> last_section;
  bool loop = false;
  std::size_t response_switches = 0;
  std::size_t path_length = 0;
  double ms_per_word_responses = 0.0;
  double word_coverage = 0.0;
  double coverage_prompt = 0.0;
  double coverage_chosen = 0.0;
  double coverage_rejected = 0.0;
  double coverage_responses = 0.0;
  std::size_t skipped_chosen = 0;
  std::size_t skipped_rejected = 0;
  std::vector<SkipPosition> skip_positions;
  std::vector<std::size_t> focus_set;

  bool reread_any() const { return reread_prompt || reread_chosen || reread_rejected; }
  bool reread_response() const { return reread_chosen || reread_rejected; }
};

// Everything derived from one annotated trial.
struct TrialAnalysis {
  ConsolidationResult consolidated;
  std::vector<Fixation> cleaned;
  DurationVector durations;
  BinnedVector bins;
  ReadingPath path;
  Coverage word_coverage;
  std::optional<TrialMetrics> metrics;  // empty for trials without a choice
};

// Runs the gaze pipeline and all per-trial measures. Coverage is computed
// for every trial; role-dependent metrics only when a choice is recorded.
TrialAnalysis analyze_trial(const TrialRecord& trial, const TokenizedStimulus& stimulus);

}  // namespace readtrace
