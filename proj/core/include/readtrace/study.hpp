#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "readtrace/stimulus.hpp"
#include "readtrace/trial.hpp"

namespace readtrace {

// What the word-count bounds constrain: the mean of each batch on its own, or
// the running mean over every assigned trial (completed or reserved)
// including the new batch.
enum class WordBudget : std::uint8_t { PerBatch, RunningMean };

struct StudyConfig {
  std::size_t batch_size = 10;
  std::size_t annotations_per_stimulus = 3;
  // Bounds on the mean total word count of assigned stimuli.
  double min_mean_words = 300.0;
  double max_mean_words = 350.0;
  WordBudget word_budget = WordBudget::PerBatch;
  std::size_t max_candidate_batches = 10000;
  // Reservations of sessions older than this are released.
  std::int64_t reservation_ttl_ms = 45LL * 60 * 1000;
  std::uint64_t seed = 0;
};

// Per-stimulus annotation bookkeeping.
struct CorpusState {
  std::vector<std::uint32_t> completed;
  std::vector<std::uint32_t> reserved;

  CorpusState() = default;
  explicit CorpusState(std::size_t stimuli) : completed(stimuli, 0), reserved(stimuli, 0) {}

  std::size_t size() const { return completed.size(); }
  std::uint32_t load(std::size_t i) const { return completed[i] + reserved[i]; }
};

struct TrialAssignment {
  std::size_t stimulus = 0;
  Layout layout = Layout::ALeft;

  friend bool operator==(const TrialAssignment&, const TrialAssignment&) = default;
};

// Picks batch_size distinct stimuli with spare capacity whose mean word count
// lies in [min_mean_words, max_mean_words] (under the configured budget), drawing from the least-loaded
// stimuli first and widening to busier ones only when needed. Order and
// layouts are randomized. Deterministic in (word_counts, state, config, seed).
// Throws CapacityError when no batch is found within max_candidate_batches.
std::vector<TrialAssignment> assign_batch(std::span<const std::size_t> word_counts,
                                          const CorpusState& state, const StudyConfig& config,
                                          std::uint64_t seed);

inline constexpr double kMinWordCoverage = 0.10;

struct ExclusionSummary {
  std::size_t trials = 0;
  std::size_t low_coverage = 0;
  std::size_t abandoned = 0;

  std::size_t excluded() const { return low_coverage + abandoned; }
  double rate() const {
    return trials == 0 ? 0.0 : static_cast<double>(excluded()) / static_cast<double>(trials);
  }
};

// Marks trials without a choice as abandoned and trials whose word coverage
// is strictly below min_coverage as low coverage. word_coverage is parallel
// to trials.
ExclusionSummary apply_exclusions(std::span<TrialRecord> trials,
                                  std::span<const double> word_coverage,
                                  double min_coverage = kMinWordCoverage);

struct SessionTrialInfo {
  std::size_t index = 0;
  std::string trial_id;
  std::string stimulus_id;
  Layout layout = Layout::ALeft;
  bool annotated = false;
};

struct SessionInfo {
  std::string session_id;
  std::string participant_id;
  std::int64_t created_at = 0;
  std::int64_t client_epoch_ms = 0;
  std::size_t cursor = 0;
  bool expired = false;
  std::vector<SessionTrialInfo> trials;
};

struct IngestAck {
  std::size_t stored = 0;  // events held for the trial after this batch
  bool duplicate = false;
};

struct AnnotationAck {
  std::size_t cursor = 0;
  bool complete = false;
  bool flagged_for_review = false;  // annotated without any hover events
};

// Session and corpus bookkeeping for annotation studies. When a data
// directory is given, every state change is appended to line-delimited JSON
// logs there and replayed on construction.
//
// Session creation and annotation are serialized; event ingestion runs
// concurrently across sessions and is ordered per session.
class StudyService {
 public:
  using Clock = std::function<std::int64_t()>;

  StudyService(std::vector<TokenizedStimulus> stimuli, StudyConfig config,
               std::optional<std::filesystem::path> data_dir = std::nullopt, Clock clock = {});
  ~StudyService();

  StudyService(const StudyService&) = delete;
  StudyService& operator=(const StudyService&) = delete;

  SessionInfo create_session(const std::string& participant_id, std::int64_t client_epoch_ms = 0);

  // Idempotent on (session, trial, seq). Throws NotFoundError for unknown
  // sessions or trials not yet opened, ValidationError for bad events and
  // ConflictError for expired sessions.
  IngestAck ingest_events(const std::string& session_id, std::size_t trial, std::uint64_t seq,
                          const std::vector<HoverEvent>& events);

  // Only the session's current trial accepts an annotation. Throws
  // ConflictError on resubmission, ValidationError for choice None.
  AnnotationAck record_annotation(const std::string& session_id, std::size_t trial,
                                  Choice choice, Rationale rationale);

  SessionInfo session(const std::string& session_id) const;
  const TokenizedStimulus& stimulus(const std::string& stimulus_id) const;
  std::span<const TokenizedStimulus> stimuli() const { return stimuli_; }
  CorpusState corpus_state() const;
  const StudyConfig& config() const { return config_; }

  // Releases reservations of sessions past the TTL; returns how many trial
  // reservations were freed.
  std::size_t expire_reservations();

  // All trials of all sessions in creation order, events sorted by enter time.
  std::vector<TrialRecord> export_trials() const;
  std::string export_jsonl() const;

 private:
  struct Trial;
  struct Session;
  class Journal;

  Session& find_session(const std::string& session_id) const;
  std::size_t expire_locked(std::int64_t now);
  std::string make_trial_id(const std::string& session_id, std::size_t index) const;
  void replay();

  std::vector<TokenizedStimulus> stimuli_;
  std::map<std::string, std::size_t> stimulus_index_;
  std::vector<std::size_t> word_counts_;
  StudyConfig config_;
  Clock clock_;
  std::unique_ptr<Journal> journal_;

  mutable std::shared_mutex mutex_;
  CorpusState state_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
  std::vector<Session*> creation_order_;
};

}  // namespace readtrace
