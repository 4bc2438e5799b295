#include "readtrace/metrics.hpp"

#include <algorithm>
#include <iterator>

#include "readtrace/error.hpp"

namespace readtrace {

ReadingPath extract_path(std::span<const HoverEvent> events, std::int64_t min_visit_ms) {
  ReadingPath path;
  std::size_t i = 0;
  while (i < events.size()) {
    const Section section = events[i].section;
    const std::int64_t enter = events[i].enter_ms;
    std::int64_t exit = events[i].exit_ms;
    std::size_t j = i + 1;
    while (j < events.size() && events[j].section == section) {
      exit = std::max(exit, events[j].exit_ms);
      ++j;
    }
    if (exit - enter >= min_visit_ms) {
      if (!path.visits.empty() && path.visits.back().section == section) {
        path.visits.back().exit_ms = std::max(path.visits.back().exit_ms, exit);
      } else {
        path.visits.push_back(SectionVisit{section, enter, exit});
      }
    }
    i = j;
  }
  return path;
}

SectionFlags section_flags(const ReadingPath& path, Choice choice) {
  if (choice == Choice::None) throw ValidationError("section flags need a recorded choice");
  SectionFlags flags;
  std::array<std::size_t, 3> seen{};
  std::vector<Section> responses;
  for (const SectionVisit& v : path.visits) {
    ++seen[index_of(role_of(v.section, choice))];
    if (v.section != Section::Prompt && (responses.empty() || responses.back() != v.section)) {
      responses.push_back(v.section);
    }
  }
  flags.reread_prompt = seen[index_of(Role::Prompt)] >= 2;
  flags.reread_chosen = seen[index_of(Role::Chosen)] >= 2;
  flags.reread_rejected = seen[index_of(Role::Rejected)] >= 2;
  if (!path.visits.empty()) flags.last_section = role_of(path.visits.back().section, choice);
  flags.response_switches = responses.empty() ? 0 : responses.size() - 1;
  flags.loop = flags.response_switches >= 2;
  flags.path_length = path.length();
  return flags;
}

Coverage coverage(std::span<const Fixation> cleaned, const TokenizedStimulus& stimulus) {
  std::vector<bool> hit(stimulus.word_count(), false);
  for (const Fixation& f : cleaned) {
    if (f.word_index < hit.size()) hit[f.word_index] = true;
  }
  Coverage c;
  for (Section s : kAllSections) {
    const std::size_t si = index_of(s);
    for (const Word& w : stimulus.words(s)) {
      if (hit[w.index]) ++c.covered[si];
    }
    c.covered_total += c.covered[si];
    c.per_section[si] =
        static_cast<double>(c.covered[si]) / static_cast<double>(stimulus.word_count(s));
  }
  c.overall = static_cast<double>(c.covered_total) / static_cast<double>(stimulus.word_count());
  return c;
}

double response_reading_rate(const DurationVector& durations, const TokenizedStimulus& stimulus) {
  std::int64_t total = 0;
  std::size_t words = 0;
  for (Section s : {Section::ResponseA, Section::ResponseB}) {
    for (const Word& w : stimulus.words(s)) total += durations.totals.at(w.index);
    words += stimulus.word_count(s);
  }
  return static_cast<double>(total) / static_cast<double>(words);
}

SkipProfile skip_profile(const DurationVector& durations, const TokenizedStimulus& stimulus,
                         Choice choice) {
  if (choice == Choice::None) throw ValidationError("skip profile needs a recorded choice");
  SkipProfile profile;
  for (Role role : {Role::Chosen, Role::Rejected}) {
    const auto words = stimulus.words(section_of(role, choice));
    const std::size_t n = words.size();
    std::size_t& skipped = role == Role::Chosen ? profile.skipped_chosen : profile.skipped_rejected;
    for (std::size_t k = 0; k < n; ++k) {
      const bool skip = durations.totals.at(words[k].index) == 0;
      const double pos = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
      profile.positions.push_back(SkipPosition{role, pos, skip});
      if (skip) ++skipped;
    }
  }
  return profile;
}

std::vector<std::size_t> focus_set(const BinnedVector& binned, int min_bin) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < binned.size(); ++i) {
    if (binned.bins[i] >= min_bin) out.push_back(i);
  }
  return out;
}

double focus_overlap(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::vector<std::size_t> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  const std::size_t unite = a.size() + b.size() - both.size();
  return static_cast<double>(both.size()) / static_cast<double>(unite);
}

TrialAnalysis analyze_trial(const TrialRecord& trial, const TokenizedStimulus& stimulus) {
  TrialAnalysis out;
  out.consolidated = consolidate(trial.events, stimulus);
  out.cleaned = clean_fixations(out.consolidated.fixations);
  out.durations = total_dwell(out.cleaned, stimulus.word_count());
  out.bins = zscore_bins(out.durations);
  out.path = extract_path(trial.events);
  out.word_coverage = coverage(out.cleaned, stimulus);
  if (!trial.annotated()) return out;

  const SectionFlags flags = section_flags(out.path, trial.choice);
  const SkipProfile skips = skip_profile(out.durations, stimulus, trial.choice);
  const Coverage& cov = out.word_coverage;
  const std::size_t chosen = index_of(section_of(Role::Chosen, trial.choice));
  const std::size_t rejected = index_of(section_of(Role::Rejected, trial.choice));

  TrialMetrics m;
  m.reread_prompt = flags.reread_prompt;
  m.reread_chosen = flags.reread_chosen;
  m.reread_rejected = flags.reread_rejected;
  m.last_section = flags.last_section;
  m.loop = flags.loop;
  m.response_switches = flags.response_switches;
  m.path_length = flags.path_length;
  m.ms_per_word_responses = response_reading_rate(out.durations, stimulus);
  m.word_coverage = cov.overall;
  m.coverage_prompt = cov.per_section[index_of(Section::Prompt)];
  m.coverage_chosen = cov.per_section[chosen];
  m.coverage_rejected = cov.per_section[rejected];
  const std::size_t response_words =
      stimulus.word_count(Section::ResponseA) + stimulus.word_count(Section::ResponseB);
  m.coverage_responses = static_cast<double>(cov.covered[chosen] + cov.covered[rejected]) /
                         static_cast<double>(response_words);
  m.skipped_chosen = skips.skipped_chosen;
  m.skipped_rejected = skips.skipped_rejected;
  m.skip_positions = skips.positions;
  m.focus_set = focus_set(out.bins);
  out.metrics = std::move(m);
  return out;
}

}  // namespace readtrace
