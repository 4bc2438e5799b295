#include "readtrace/gaze.hpp"

#include <cmath>
#include <optional>

#include "readtrace/error.hpp"

namespace readtrace {

void validate_events(const std::vector<HoverEvent>& events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const HoverEvent& e = events[i];
    if (e.exit_ms < e.enter_ms) {
      throw ValidationError("event " + std::to_string(i) + " exits before it enters", i);
    }
    if (i > 0 && e.enter_ms < events[i - 1].enter_ms) {
      throw ValidationError("event " + std::to_string(i) + " is out of order", i);
    }
  }
}

void validate_trial(const TrialRecord& trial) {
  if (trial.annotated() != trial.rationale.has_value()) {
    throw ValidationError("trial '" + trial.trial_id +
                          "' must carry both a choice and a rationale, or neither");
  }
  validate_events(trial.events);
}

ConsolidationResult consolidate(std::span<const HoverEvent> events,
                                const TokenizedStimulus& stimulus) {
  ConsolidationResult out;
  std::optional<std::size_t> current;
  for (const HoverEvent& e : events) {
    if (e.char_index >= stimulus.char_count(e.section)) {
      ++out.dropped_events;
      continue;
    }
    const auto word = stimulus.locate_char(e.section, e.char_index);
    if (!word) {
      ++out.whitespace_events;
      continue;
    }
    const std::int64_t d = e.duration_ms();
    if (d <= 0) continue;
    if (current && *current == *word) {
      out.fixations.back().duration_ms += d;
    } else {
      out.fixations.push_back(Fixation{*word, d, out.fixations.size()});
      current = word;
    }
  }
  return out;
}

std::vector<Fixation> clean_fixations(std::span<const Fixation> fixations, FixationWindow window) {
  std::vector<Fixation> kept;
  kept.reserve(fixations.size());
  for (const Fixation& f : fixations) {
    if (f.duration_ms >= window.min_ms && f.duration_ms <= window.max_ms) kept.push_back(f);
  }
  return kept;
}

DurationVector total_dwell(std::span<const Fixation> cleaned, std::size_t n) {
  DurationVector d;
  d.totals.assign(n, 0);
  for (const Fixation& f : cleaned) {
    if (f.word_index >= n) {
      throw MalformedTrialError("fixation on word " + std::to_string(f.word_index) +
                                " but stimulus has " + std::to_string(n) + " words");
    }
    d.totals[f.word_index] += f.duration_ms;
  }
  return d;
}

int bin_zscore(double z) {
  if (std::isnan(z)) return 0;
  if (z < -1.0) return 1;
  if (z < -0.5) return 2;
  if (z < 0.5) return 3;
  if (z < 1.0) return 4;
  return 5;
}

namespace {

__extension__ typedef __int128 i128;

// With u = n*x - S and D = n*Q - S^2, z = u / sqrt(D). Each edge test
// z >= k is decided by comparing u^2 against k^2 * D with signs handled.
// k2_num / k2_den is k^2 (1 for |k| = 1, 1/4 for |k| = 0.5).
bool z_at_least(i128 u, i128 d, bool k_negative, i128 k2_num, i128 k2_den) {
  const i128 lhs = u * u * k2_den;
  const i128 rhs = d * k2_num;
  if (k_negative) return u >= 0 || lhs <= rhs;
  return u >= 0 && lhs >= rhs;
}

int exact_bin(i128 u, i128 d) {
  if (!z_at_least(u, d, true, 1, 1)) return 1;
  if (!z_at_least(u, d, true, 1, 4)) return 2;
  if (!z_at_least(u, d, false, 1, 4)) return 3;
  if (!z_at_least(u, d, false, 1, 1)) return 4;
  return 5;
}

constexpr std::int64_t kExactMaxTotal = std::int64_t{1} << 40;
constexpr std::size_t kExactMaxCount = std::size_t{1} << 20;

}  // namespace

BinnedVector zscore_bins(const DurationVector& durations) {
  BinnedVector out;
  out.bins.assign(durations.size(), 0);

  std::size_t count = 0;
  bool exact = true;
  for (std::int64_t t : durations.totals) {
    if (t < 0) throw MalformedTrialError("negative dwell total");
    if (t > 0) {
      ++count;
      if (t > kExactMaxTotal) exact = false;
    }
  }
  if (count == 0) return out;
  if (count > kExactMaxCount) exact = false;

  if (exact) {
    i128 sum = 0;
    i128 sum_sq = 0;
    for (std::int64_t t : durations.totals) {
      sum += t;
      sum_sq += static_cast<i128>(t) * t;
    }
    const i128 n = static_cast<i128>(count);
    const i128 spread = n * sum_sq - sum * sum;
    for (std::size_t i = 0; i < durations.size(); ++i) {
      const std::int64_t t = durations.totals[i];
      if (t == 0) continue;
      out.bins[i] = (count < 2 || spread == 0) ? 3 : exact_bin(n * t - sum, spread);
    }
    return out;
  }

  long double mean = 0;
  for (std::int64_t t : durations.totals) mean += t;
  mean /= static_cast<long double>(count);
  long double var = 0;
  for (std::int64_t t : durations.totals) {
    if (t > 0) var += (t - mean) * (t - mean);
  }
  const long double sd = std::sqrt(var / static_cast<long double>(count));
  for (std::size_t i = 0; i < durations.size(); ++i) {
    const std::int64_t t = durations.totals[i];
    if (t == 0) continue;
    out.bins[i] = sd == 0 ? 3 : bin_zscore(static_cast<double>((t - mean) / sd));
  }
  return out;
}

AggregateVector aggregate_bins(std::span<const BinnedVector> binned,
                               std::span<const std::string> participant_labels) {
  if (binned.empty()) throw ValidationError("aggregate over zero participants");
  const std::size_t n = binned.front().size();
  AggregateVector out;
  out.participant_count = binned.size();
  out.means.assign(n, 0.0);
  std::vector<long> sums(n, 0);
  for (std::size_t j = 0; j < binned.size(); ++j) {
    if (binned[j].size() != n) {
      const std::string who = j < participant_labels.size() ? "participant '" +
                                                                  participant_labels[j] + "'"
                                                            : "participant #" + std::to_string(j);
      throw ValidationError(who + " has " + std::to_string(binned[j].size()) +
                                " bins, expected " + std::to_string(n),
                            j);
    }
    for (std::size_t i = 0; i < n; ++i) sums[i] += binned[j].bins[i];
  }
  const double p = static_cast<double>(binned.size());
  for (std::size_t i = 0; i < n; ++i) out.means[i] = static_cast<double>(sums[i]) / p;
  return out;
}

}  // namespace readtrace
