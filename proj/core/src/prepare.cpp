#include "readtrace/prepare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>

#include "json_util.hpp"
#include "readtrace/random.hpp"
#include "readtrace/stats.hpp"

namespace readtrace {

using detail::json;
using detail::ordered_json;

SourceItem parse_source_line(std::string_view line, std::size_t line_number) {
  constexpr std::string_view what = "source record";
  const json j = detail::parse_json(line, what);
  SourceItem item;
  if (j.contains("id")) {
    const json& id = j["id"];
    item.id = id.is_string() ? id.get<std::string>() : id.dump();
  } else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "src-%06zu", line_number);
    item.id = buf;
  }
  item.prompt = detail::string_field(j, "prompt", what);
  item.chosen = detail::string_field(j, "chosen", what);
  item.rejected = detail::string_field(j, "rejected", what);
  return item;
}

std::vector<SourceItem> read_source(std::istream& in) {
  std::vector<SourceItem> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_source_line(line, number));
    } catch (const ValidationError& e) {
      throw ValidationError("source line " + std::to_string(number) + ": " + e.what(), number);
    }
  }
  return out;
}

std::size_t nearest_rank_percentile(std::vector<std::size_t> values, double percentile) {
  if (values.empty()) throw ValidationError("percentile of an empty set");
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw ValidationError("percentile must lie in (0, 100]");
  }
  std::sort(values.begin(), values.end());
  const auto rank =
      static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(values.size())));
  return values[std::max<std::size_t>(rank, 1) - 1];
}

namespace {

struct Counted {
  std::size_t source_index;
  std::size_t prompt;
  std::size_t chosen;
  std::size_t rejected;
  std::size_t total() const { return prompt + chosen + rejected; }
};

LengthStats length_stats(const std::vector<double>& values) {
  LengthStats s;
  if (values.empty()) return s;
  s.mean = stats::mean(values);
  s.sd = stats::sample_sd(values);
  s.min = static_cast<std::size_t>(*std::min_element(values.begin(), values.end()));
  s.max = static_cast<std::size_t>(*std::max_element(values.begin(), values.end()));
  return s;
}

ordered_json stats_json(const LengthStats& s) {
  return ordered_json{{"mean", s.mean}, {"sd", s.sd}, {"min", s.min}, {"max", s.max}};
}

}  // namespace

PreparedStimuli prepare_stimuli(std::span<const SourceItem> source, std::uint64_t seed,
                                std::size_t sample_size) {
  PreparedStimuli out;
  SamplingManifest& m = out.manifest;
  m.seed = seed;
  m.requested = sample_size;
  m.source_total = source.size();

  std::vector<Counted> valid;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Counted c{i, count_words(source[i].prompt), count_words(source[i].chosen),
                    count_words(source[i].rejected)};
    if (c.prompt == 0 || c.chosen == 0 || c.rejected == 0) {
      ++m.dropped_invalid;
    } else {
      valid.push_back(c);
    }
  }

  std::vector<Counted> survivors;
  if (!valid.empty()) {
    std::vector<std::size_t> totals;
    for (const Counted& c : valid) totals.push_back(c.total());
    m.percentile_cutoff = nearest_rank_percentile(totals, m.percentile);
    for (const Counted& c : valid) {
      if (c.total() > m.percentile_cutoff) {
        ++m.dropped_percentile;
      } else if (c.chosen < m.min_response_words && c.rejected < m.min_response_words) {
        ++m.dropped_short;
      } else {
        survivors.push_back(c);
      }
    }
  }
  if (survivors.size() < sample_size) {
    throw ValidationError("requested " + std::to_string(sample_size) + " stimuli but only " +
                          std::to_string(survivors.size()) + " survive the filters");
  }

  Rng rng(seed);
  for (std::size_t i = 0; i < sample_size; ++i) {
    std::swap(survivors[i], survivors[i + rng.below(survivors.size() - i)]);
  }
  survivors.resize(sample_size);
  std::sort(survivors.begin(), survivors.end(),
            [](const Counted& a, const Counted& b) { return a.source_index < b.source_index; });
  m.sampled = sample_size;
  m.not_sampled = m.source_total - m.dropped_invalid - m.dropped_percentile - m.dropped_short -
                  m.sampled;

  std::vector<double> chosen, rejected, prompt, total;
  for (const Counted& c : survivors) {
    const SourceItem& item = source[c.source_index];
    StimulusRecord r;
    r.id = item.id;
    r.prompt = item.prompt;
    if (rng.coin()) {
      r.response_a = item.rejected;
      r.response_b = item.chosen;
      r.source_label = Section::ResponseB;
    } else {
      r.response_a = item.chosen;
      r.response_b = item.rejected;
      r.source_label = Section::ResponseA;
    }
    out.stimuli.push_back(std::move(r));
    chosen.push_back(static_cast<double>(c.chosen));
    rejected.push_back(static_cast<double>(c.rejected));
    prompt.push_back(static_cast<double>(c.prompt));
    total.push_back(static_cast<double>(c.total()));
  }
  m.chosen = length_stats(chosen);
  m.rejected = length_stats(rejected);
  m.prompt = length_stats(prompt);
  m.total = length_stats(total);
  return out;
}

std::string manifest_to_json(const SamplingManifest& m) {
  ordered_json j;
  j["seed"] = m.seed;
  j["requested"] = m.requested;
  j["source_total"] = m.source_total;
  j["dropped_invalid"] = m.dropped_invalid;
  j["dropped_percentile"] = m.dropped_percentile;
  j["dropped_short"] = m.dropped_short;
  j["not_sampled"] = m.not_sampled;
  j["sampled"] = m.sampled;
  j["percentile"] = m.percentile;
  j["percentile_method"] = "nearest-rank";
  j["percentile_cutoff_words"] = m.percentile_cutoff;
  j["min_response_words"] = m.min_response_words;
  j["word_lengths"] = ordered_json{{"chosen", stats_json(m.chosen)},
                                   {"rejected", stats_json(m.rejected)},
                                   {"prompt", stats_json(m.prompt)},
                                   {"total", stats_json(m.total)}};
  return detail::dump_pretty(j);
}

std::string render_length_table(const SamplingManifest& m) {
  std::string out = "section     mean      sd     min     max\n";
  const auto row = [&](const char* name, const LengthStats& s) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-9s %6.1f  %6.1f  %6zu  %6zu\n", name, s.mean, s.sd, s.min,
                  s.max);
    out += buf;
  };
  row("chosen", m.chosen);
  row("rejected", m.rejected);
  row("prompt", m.prompt);
  row("total", m.total);
  return out;
}

}  // namespace readtrace
