#include "readtrace/pairs.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

namespace readtrace {

std::size_t PairSet::agreeing() const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [](const PairObservation& p) { return p.agree; }));
}

PairSet build_pairs(std::span<const AnnotatedTrial> trials) {
  std::map<std::string, std::vector<std::size_t>> by_stimulus;
  for (std::size_t i = 0; i < trials.size(); ++i) by_stimulus[trials[i].stimulus_id].push_back(i);

  PairSet out;
  for (auto& [stimulus, members] : by_stimulus) {
    if (members.size() < 2) {
      out.skipped.push_back(SkippedStimulus{stimulus, members.size()});
      continue;
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(trials[a].participant_id, trials[a].trial_id) <
             std::tie(trials[b].participant_id, trials[b].trial_id);
    });
    for (std::size_t x = 0; x < members.size(); ++x) {
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        const AnnotatedTrial& a = trials[members[x]];
        const AnnotatedTrial& b = trials[members[y]];
        PairObservation p;
        p.stimulus_id = stimulus;
        p.first = members[x];
        p.second = members[y];
        p.agree = a.chosen == b.chosen;
        p.shared_rationale = a.rationale == b.rationale;
        p.focus_overlap = focus_overlap(a.metrics.focus_set, b.metrics.focus_set);
        out.pairs.push_back(std::move(p));
      }
    }
  }
  return out;
}

std::vector<std::vector<std::int64_t>> membership_table(
    const PairSet& pairs, std::span<const AnnotatedTrial> trials, std::size_t categories,
    const std::function<std::size_t(const AnnotatedTrial&)>& category) {
  std::vector<std::vector<std::int64_t>> table(categories, std::vector<std::int64_t>(2, 0));
  for (const PairObservation& p : pairs.pairs) {
    const std::size_t col = p.agree ? 0 : 1;
    ++table.at(category(trials[p.first]))[col];
    ++table.at(category(trials[p.second]))[col];
  }
  return table;
}

std::vector<std::vector<std::int64_t>> pair_table(
    const PairSet& pairs, std::size_t categories,
    const std::function<std::size_t(const PairObservation&)>& category) {
  std::vector<std::vector<std::int64_t>> table(categories, std::vector<std::int64_t>(2, 0));
  for (const PairObservation& p : pairs.pairs) ++table.at(category(p))[p.agree ? 0 : 1];
  return table;
}

GroupedValues member_values(const PairSet& pairs, std::span<const AnnotatedTrial> trials,
                            const std::function<double(const AnnotatedTrial&)>& value) {
  GroupedValues out;
  for (const PairObservation& p : pairs.pairs) {
    auto& group = p.agree ? out.agree : out.disagree;
    group.push_back(value(trials[p.first]));
    group.push_back(value(trials[p.second]));
  }
  return out;
}

GroupedValues pair_values(const PairSet& pairs,
                          const std::function<double(const PairObservation&)>& value) {
  GroupedValues out;
  for (const PairObservation& p : pairs.pairs) (p.agree ? out.agree : out.disagree).push_back(value(p));
  return out;
}

}  // namespace readtrace
