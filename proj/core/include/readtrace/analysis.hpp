#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "readtrace/gaze.hpp"
#include "readtrace/metrics.hpp"
#include "readtrace/pairs.hpp"
#include "readtrace/stats.hpp"
#include "readtrace/stimulus.hpp"
#include "readtrace/study.hpp"
#include "readtrace/trial.hpp"

namespace readtrace {

// Stimuli addressable by id.
class StimulusCatalog {
 public:
  explicit StimulusCatalog(std::vector<TokenizedStimulus> stimuli);

  // Throws ValidationError for unknown ids.
  const TokenizedStimulus& at(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.contains(id); }
  std::span<const TokenizedStimulus> all() const { return stimuli_; }

 private:
  std::vector<TokenizedStimulus> stimuli_;
  std::map<std::string, std::size_t> index_;
};

struct AnalysisConfig {
  stats::VarianceModel variance = stats::VarianceModel::Pooled;
  double significance = stats::kSignificanceLevel;
  double min_coverage = kMinWordCoverage;
};

struct ProcessedTrial {
  TrialRecord record;
  TrialAnalysis analysis;
};

struct ProcessedCorpus {
  std::vector<ProcessedTrial> trials;  // input order
  ExclusionSummary exclusions;
  std::size_t malformed_trials = 0;  // trials with dropped events
};

// Runs the per-trial pipeline over every trial and applies the exclusion
// rules. Throws ValidationError when a trial references an unknown stimulus.
ProcessedCorpus process_corpus(std::vector<TrialRecord> trials, const StimulusCatalog& catalog,
                               const AnalysisConfig& config = {});

std::string analysis_records_jsonl(const ProcessedCorpus& corpus);

struct ReportedTest {
  std::string family;
  std::size_t family_size = 1;  // Bonferroni m
  std::vector<std::string> row_labels;  // contingency tests
  std::vector<std::string> column_labels;
  stats::TestResult result;
};

struct FailedTest {
  std::string test_name;
  std::string error;
};

struct AgreementReport {
  std::optional<double> alpha;
  std::string alpha_error;
  std::size_t alpha_items = 0;
  std::vector<ReportedTest> tests;
  std::vector<FailedTest> failures;
  std::size_t pairs = 0;
  std::size_t agreeing_pairs = 0;
  std::size_t disagreeing_pairs = 0;
  std::vector<SkippedStimulus> skipped_stimuli;

  const ReportedTest* find(const std::string& name) const;
};

struct DecileProfile {
  std::array<double, 10> skip_rate{};
  std::array<std::size_t, 10> words{};
};

struct SimilarityBin {
  std::size_t quantile = 0;
  double min_similarity = 0.0;
  double max_similarity = 0.0;
  std::size_t stimuli = 0;
  std::size_t trials = 0;
  double response_reread_rate = 0.0;
};

struct BehaviorSummary {
  std::size_t trials_total = 0;
  std::size_t trials_retained = 0;
  ExclusionSummary exclusions;
  std::size_t malformed_trials = 0;
  double reread_prompt = 0.0;
  double reread_chosen = 0.0;
  double reread_rejected = 0.0;
  double reread_any = 0.0;
  double reread_response = 0.0;
  std::optional<double> last_chosen_among_rereaders;
  double loop_rate = 0.0;
  double path_length_mean = 0.0;
  double path_length_sd = 0.0;
  double coverage_overall = 0.0;
  double coverage_prompt = 0.0;
  double coverage_chosen = 0.0;
  double coverage_rejected = 0.0;
  double coverage_responses = 0.0;
  double ms_per_word_mean = 0.0;
  double skipped_chosen_mean = 0.0;
  double skipped_rejected_mean = 0.0;
  DecileProfile chosen_profile;
  DecileProfile rejected_profile;
  double pair_agreement = 0.0;
  std::optional<double> source_label_alignment;
  std::vector<SimilarityBin> similarity;
};

struct AnalysisReport {
  AgreementReport agreement;
  BehaviorSummary behavior;
};

// Full analysis: pipeline, exclusions, behavioral summary, agreement
// statistics. The result does not depend on the order of the input trials.
// Throws ValidationError when fewer than two stimuli carry two or more
// retained annotations. Individual statistics that cannot be computed are
// listed in AgreementReport::failures.
AnalysisReport analyze(std::vector<TrialRecord> trials, const StimulusCatalog& catalog,
                       const AnalysisConfig& config = {},
                       const std::map<std::string, double>* similarity = nullptr);

std::string agreement_to_json(const AgreementReport& report, const AnalysisConfig& config);
std::string behavior_to_json(const BehaviorSummary& summary);
std::string render_summary(const AnalysisReport& report);

// Mean bins of the retained trials on one stimulus. Throws NotFoundError
// when the stimulus has no retained trial.
AggregateVector stimulus_aggregate(const ProcessedCorpus& corpus, const TokenizedStimulus& stimulus);

}  // namespace readtrace
