#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "readtrace/stimulus.hpp"

namespace readtrace {

// One preference pair of the source corpus: {"id"?, "prompt", "chosen", "rejected"}.
struct SourceItem {
  std::string id;
  std::string prompt;
  std::string chosen;
  std::string rejected;
};

SourceItem parse_source_line(std::string_view line, std::size_t line_number);
std::vector<SourceItem> read_source(std::istream& in);

struct LengthStats {
  double mean = 0.0;
  double sd = 0.0;  // sample sd
  std::size_t min = 0;
  std::size_t max = 0;
};

struct SamplingManifest {
  std::uint64_t seed = 0;
  std::size_t requested = 0;
  std::size_t source_total = 0;
  std::size_t dropped_invalid = 0;     // a section with no words
  std::size_t dropped_percentile = 0;  // total word count above the cutoff
  std::size_t dropped_short = 0;       // both responses under three words
  std::size_t not_sampled = 0;
  std::size_t sampled = 0;
  double percentile = 90.0;
  std::size_t percentile_cutoff = 0;  // word count at the percentile (nearest rank)
  std::size_t min_response_words = 3;

  // Word-length statistics of the sample.
  LengthStats chosen;
  LengthStats rejected;
  LengthStats prompt;
  LengthStats total;
};

struct PreparedStimuli {
  std::vector<StimulusRecord> stimuli;
  SamplingManifest manifest;
};

// Drops items above the 90th percentile of total word count (nearest rank),
// drops items whose responses both have fewer than three words, then samples
// sample_size items uniformly without replacement. The chosen response is
// placed in ResponseA or ResponseB at random and recorded as source_label.
// Throws ValidationError when fewer than sample_size items survive.
PreparedStimuli prepare_stimuli(std::span<const SourceItem> source, std::uint64_t seed,
                                std::size_t sample_size);

// Value at the given percentile by the nearest-rank method. values must be
// nonempty; percentile in (0, 100].
std::size_t nearest_rank_percentile(std::vector<std::size_t> values, double percentile);

std::string manifest_to_json(const SamplingManifest& manifest);
std::string render_length_table(const SamplingManifest& manifest);

}  // namespace readtrace
