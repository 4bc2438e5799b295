#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "readtrace/metrics.hpp"
#include "readtrace/stimulus.hpp"
#include "readtrace/trial.hpp"

namespace readtrace {

// Line-delimited JSON formats. Parsers throw ValidationError with the line
// number (1-based) when reading whole streams.

// {"id", "prompt", "response_a", "response_b", "source_label"?}
StimulusRecord parse_stimulus_line(std::string_view line);
std::string stimulus_to_json_line(const StimulusRecord& record);
std::vector<TokenizedStimulus> read_stimuli(std::istream& in);
std::vector<TokenizedStimulus> load_stimuli(const std::filesystem::path& path);

HoverEvent parse_hover_event(std::string_view object_json);

TrialRecord parse_trial_line(std::string_view line);
std::string trial_to_json_line(const TrialRecord& trial);
std::vector<TrialRecord> read_trials(std::istream& in);
std::vector<TrialRecord> load_trials(const std::filesystem::path& path);

// Per-trial analysis record: trial header, fixations, durations, bins,
// reading path, coverage and metrics.
std::string analysis_to_json_line(const TrialRecord& trial, const TrialAnalysis& analysis);
std::string metrics_to_json(const TrialMetrics& metrics);

// {"stimulus_id", "similarity"} per line.
std::map<std::string, double> read_similarities(std::istream& in);
std::map<std::string, double> load_similarities(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes atomically via a temporary file in the same directory.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace readtrace
