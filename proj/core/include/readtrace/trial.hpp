#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "readtrace/stimulus.hpp"

namespace readtrace {

// One mouse entry/exit over a single character span. Timestamps are client
// monotonic milliseconds.
struct HoverEvent {
  Section section = Section::Prompt;
  std::size_t char_index = 0;
  std::int64_t enter_ms = 0;
  std::int64_t exit_ms = 0;

  std::int64_t duration_ms() const { return exit_ms - enter_ms; }

  friend bool operator==(const HoverEvent&, const HoverEvent&) = default;
};

// One annotator on one stimulus.
struct TrialRecord {
  std::string trial_id;
  std::string participant_id;
  std::string session_id;
  std::string stimulus_id;
  std::size_t order = 0;  // position inside the session
  Layout layout = Layout::ALeft;
  std::vector<HoverEvent> events;
  Choice choice = Choice::None;
  std::optional<Rationale> rationale;
  std::int64_t started_at = 0;  // ms epoch
  std::int64_t ended_at = 0;
  bool excluded = false;
  std::string exclusion_reason;

  bool annotated() const { return choice != Choice::None; }
};

// Throws ValidationError naming the offending index when an event has
// exit < enter or the list is not ordered by enter timestamp.
void validate_events(const std::vector<HoverEvent>& events);

// Checks that choice and rationale are both set or both unset.
void validate_trial(const TrialRecord& trial);

}  // namespace readtrace
