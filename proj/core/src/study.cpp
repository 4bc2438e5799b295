#include "readtrace/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json_util.hpp"
#include "readtrace/error.hpp"
#include "readtrace/random.hpp"
#include "readtrace/serialization.hpp"

namespace readtrace {

using detail::json;
using detail::ordered_json;

// ---------------------------------------------------------------------------
// Batch assignment
// ---------------------------------------------------------------------------

namespace {

struct BatchSearch {
  std::span<const std::size_t> word_counts;
  double lo = 0.0;  // bounds on the batch's total word count
  double hi = 0.0;
  std::size_t batch = 0;

  double distance(double sum) const {
    if (sum < lo) return lo - sum;
    if (sum > hi) return sum - hi;
    return 0.0;
  }

  // Random restarts, each followed by greedy swaps toward the window.
  std::optional<std::vector<std::size_t>> run(std::vector<std::size_t> pool, std::size_t budget,
                                              std::size_t& used, Rng& rng) const {
    const std::size_t repair_steps = batch * 20;
    std::size_t spent = 0;
    while (spent < budget) {
      // Partial Fisher-Yates: pool[0, batch) is the candidate, the rest is
      // the pool of swap partners.
      for (std::size_t i = 0; i < batch; ++i) {
        std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < batch; ++i) sum += static_cast<double>(word_counts[pool[i]]);
      ++spent;
      ++used;
      if (distance(sum) == 0.0) return std::vector<std::size_t>(pool.begin(), pool.begin() + batch);
      if (pool.size() == batch) continue;
      for (std::size_t step = 0; step < repair_steps && spent < budget; ++step) {
        const std::size_t member = rng.below(batch);
        const std::size_t outside = batch + rng.below(pool.size() - batch);
        const double next = sum - static_cast<double>(word_counts[pool[member]]) +
                            static_cast<double>(word_counts[pool[outside]]);
        ++spent;
        ++used;
        if (distance(next) < distance(sum)) {
          std::swap(pool[member], pool[outside]);
          sum = next;
          if (distance(sum) == 0.0) {
            return std::vector<std::size_t>(pool.begin(), pool.begin() + batch);
          }
        }
      }
    }
    return std::nullopt;
  }
};

}  // namespace

std::vector<TrialAssignment> assign_batch(std::span<const std::size_t> word_counts,
                                          const CorpusState& state, const StudyConfig& config,
                                          std::uint64_t seed) {
  if (word_counts.size() != state.size()) {
    throw ValidationError("word counts and corpus state disagree on the number of stimuli");
  }
  const std::size_t batch = config.batch_size;
  if (batch == 0) throw ValidationError("batch size must be positive");

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state.load(i) < config.annotations_per_stimulus) eligible.push_back(i);
  }
  if (eligible.size() < batch) {
    throw CapacityError("only " + std::to_string(eligible.size()) +
                        " stimuli have annotation capacity left; a batch needs " +
                        std::to_string(batch));
  }

  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(eligible));
  std::stable_sort(eligible.begin(), eligible.end(),
                   [&](std::size_t a, std::size_t b) { return state.load(a) < state.load(b); });

  // tier_ends[t]: prefix of eligible whose load is at most the t-th distinct load.
  std::vector<std::size_t> tier_ends;
  for (std::size_t i = 1; i <= eligible.size(); ++i) {
    if (i == eligible.size() || state.load(eligible[i]) != state.load(eligible[i - 1])) {
      tier_ends.push_back(i);
    }
  }

  double lo = config.min_mean_words * static_cast<double>(batch);
  double hi = config.max_mean_words * static_cast<double>(batch);
  if (config.word_budget == WordBudget::RunningMean) {
    double words = 0.0;
    double trials = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i) {
      words += static_cast<double>(state.load(i)) * static_cast<double>(word_counts[i]);
      trials += static_cast<double>(state.load(i));
    }
    lo = config.min_mean_words * (trials + static_cast<double>(batch)) - words;
    hi = config.max_mean_words * (trials + static_cast<double>(batch)) - words;
  }
  const BatchSearch search{word_counts, lo, hi, batch};
  std::size_t used = 0;
  std::optional<std::vector<std::size_t>> chosen;
  for (std::size_t t = 0; t < tier_ends.size() && !chosen; ++t) {
    if (tier_ends[t] < batch) continue;
    const std::size_t tiers_left = tier_ends.size() - t;
    const std::size_t remaining = config.max_candidate_batches - used;
    const std::size_t budget = std::max<std::size_t>(1, remaining / tiers_left);
    if (remaining == 0) break;
    std::vector<std::size_t> pool(eligible.begin(),
                                  eligible.begin() + static_cast<std::ptrdiff_t>(tier_ends[t]));
    chosen = search.run(std::move(pool), budget, used, rng);
  }
  if (!chosen) {
    const char* scope = config.word_budget == WordBudget::RunningMean ? "running mean" : "mean";
    throw CapacityError("no batch of " + std::to_string(batch) + " stimuli keeping the " + scope +
                        " word count in [" +
                        std::to_string(config.min_mean_words) + ", " +
                        std::to_string(config.max_mean_words) + "] found after " +
                        std::to_string(used) + " candidate batches");
  }

  rng.shuffle(std::span<std::size_t>(*chosen));
  std::vector<TrialAssignment> out;
  out.reserve(batch);
  for (std::size_t s : *chosen) {
    out.push_back(TrialAssignment{s, rng.coin() ? Layout::ARight : Layout::ALeft});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exclusions
// ---------------------------------------------------------------------------

ExclusionSummary apply_exclusions(std::span<TrialRecord> trials,
                                  std::span<const double> word_coverage, double min_coverage) {
  if (trials.size() != word_coverage.size()) {
    throw ValidationError("one coverage value per trial is required");
  }
  ExclusionSummary summary;
  summary.trials = trials.size();
  char reason[64];
  std::snprintf(reason, sizeof reason, "word_coverage_below_%.2f", min_coverage);
  for (std::size_t i = 0; i < trials.size(); ++i) {
    TrialRecord& t = trials[i];
    if (!t.annotated()) {
      t.excluded = true;
      t.exclusion_reason = "abandoned";
      ++summary.abandoned;
    } else if (word_coverage[i] < min_coverage) {
      t.excluded = true;
      t.exclusion_reason = reason;
      ++summary.low_coverage;
    } else {
      t.excluded = false;
      t.exclusion_reason.clear();
    }
  }
  return summary;
}

// ---------------------------------------------------------------------------
// Service state
// ---------------------------------------------------------------------------

struct StudyService::Trial {
  std::size_t stimulus = 0;
  Layout layout = Layout::ALeft;
  std::map<std::uint64_t, std::vector<HoverEvent>> batches;  // by client sequence number
  std::size_t event_count = 0;
  Choice choice = Choice::None;
  std::optional<Rationale> rationale;
};

struct StudyService::Session {
  std::string id;
  std::string participant;
  std::int64_t created_at = 0;
  std::int64_t client_epoch_ms = 0;
  std::vector<Trial> trials;
  std::size_t cursor = 0;
  bool expired = false;
  mutable std::mutex mutex;  // guards trial event batches

  bool complete() const { return cursor >= trials.size(); }
};

// Append-only journal of sessions, event batches and annotations.
class StudyService::Journal {
 public:
  explicit Journal(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  static constexpr const char* kSessions = "sessions.jsonl";
  static constexpr const char* kEvents = "events.jsonl";
  static constexpr const char* kAnnotations = "annotations.jsonl";

  void append(const char* file, const std::string& line) {
    std::lock_guard lock(mutex_);
    std::ofstream& out = stream(file);
    out << line << '\n';
    out.flush();
    if (!out) throw Error("failed to append to " + (dir_ / file).string());
  }

  std::vector<std::string> lines(const char* file) const {
    std::vector<std::string> out;
    std::ifstream in(dir_ / file, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) out.push_back(std::move(line));
    }
    return out;
  }

 private:
  std::ofstream& stream(const char* file) {
    auto it = streams_.find(file);
    if (it == streams_.end()) {
      it = streams_.emplace(file, std::ofstream(dir_ / file, std::ios::binary | std::ios::app)).first;
      if (!it->second) throw Error("cannot open " + (dir_ / file).string());
    }
    return it->second;
  }

  std::filesystem::path dir_;
  std::mutex mutex_;
  std::map<std::string, std::ofstream> streams_;
};

namespace {

std::int64_t system_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string session_name(std::size_t counter) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%06zu", counter + 1);
  return buf;
}

}  // namespace

StudyService::StudyService(std::vector<TokenizedStimulus> stimuli, StudyConfig config,
                           std::optional<std::filesystem::path> data_dir, Clock clock)
    : stimuli_(std::move(stimuli)),
      config_(config),
      clock_(clock ? std::move(clock) : Clock(system_now_ms)),
      state_(stimuli_.size()) {
  for (std::size_t i = 0; i < stimuli_.size(); ++i) {
    if (!stimulus_index_.emplace(stimuli_[i].id(), i).second) {
      throw ValidationError("duplicate stimulus id '" + stimuli_[i].id() + "'");
    }
    word_counts_.push_back(stimuli_[i].word_count());
  }
  if (data_dir) {
    journal_ = std::make_unique<Journal>(*data_dir);
    replay();
  }
}

StudyService::~StudyService() = default;

std::string StudyService::make_trial_id(const std::string& session_id, std::size_t index) const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "-t%02zu", index);
  return session_id + buf;
}

StudyService::Session& StudyService::find_session(const std::string& session_id) const {
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
  return *it->second;
}

void StudyService::replay() {
  for (const std::string& line : journal_->lines(Journal::kSessions)) {
    const json j = detail::parse_json(line, "session journal entry");
    const std::string type = detail::string_field(j, "type", "session journal entry");
    if (type == "expired") {
      Session& s = find_session(detail::string_field(j, "session_id", "expiry"));
      for (const Trial& t : s.trials) {
        if (t.choice == Choice::None) --state_.reserved[t.stimulus];
      }
      s.expired = true;
      continue;
    }
    auto session = std::make_unique<Session>();
    session->id = detail::string_field(j, "session_id", "session");
    session->participant = detail::string_field(j, "participant_id", "session");
    session->created_at = detail::int_field(j, "created_at", "session");
    session->client_epoch_ms = detail::int_field(j, "client_epoch_ms", "session");
    for (const json& t : detail::field(j, "trials", "session")) {
      const std::string id = detail::string_field(t, "stimulus_id", "session trial");
      const auto found = stimulus_index_.find(id);
      if (found == stimulus_index_.end()) {
        throw ValidationError("journal references unknown stimulus '" + id + "'");
      }
      Trial trial;
      trial.stimulus = found->second;
      trial.layout = parse_layout(detail::string_field(t, "layout", "session trial"));
      ++state_.reserved[trial.stimulus];
      session->trials.push_back(std::move(trial));
    }
    creation_order_.push_back(session.get());
    sessions_.emplace(session->id, std::move(session));
  }
  for (const std::string& line : journal_->lines(Journal::kAnnotations)) {
    const json j = detail::parse_json(line, "annotation journal entry");
    Session& s = find_session(detail::string_field(j, "session_id", "annotation"));
    Trial& t = s.trials.at(detail::uint_field(j, "trial", "annotation"));
    t.choice = parse_choice(detail::string_field(j, "choice", "annotation"));
    t.rationale = parse_rationale(detail::string_field(j, "rationale", "annotation"));
    --state_.reserved[t.stimulus];
    ++state_.completed[t.stimulus];
    ++s.cursor;
  }
  for (const std::string& line : journal_->lines(Journal::kEvents)) {
    const json j = detail::parse_json(line, "event journal entry");
    Session& s = find_session(detail::string_field(j, "session_id", "event batch"));
    Trial& t = s.trials.at(detail::uint_field(j, "trial", "event batch"));
    std::vector<HoverEvent> events;
    for (const json& e : detail::field(j, "events", "event batch")) {
      events.push_back(detail::event_from_json(e));
    }
    t.event_count += events.size();
    t.batches.emplace(detail::uint_field(j, "seq", "event batch"), std::move(events));
  }
}

std::size_t StudyService::expire_locked(std::int64_t now) {
  std::size_t released = 0;
  for (Session* s : creation_order_) {
    if (s->expired || s->complete() || now - s->created_at < config_.reservation_ttl_ms) continue;
    if (journal_) {
      ordered_json j;
      j["type"] = "expired";
      j["session_id"] = s->id;
      j["at"] = now;
      journal_->append(Journal::kSessions, detail::dump(j));
    }
    for (const Trial& t : s->trials) {
      if (t.choice == Choice::None) {
        --state_.reserved[t.stimulus];
        ++released;
      }
    }
    s->expired = true;
  }
  return released;
}

std::size_t StudyService::expire_reservations() {
  std::unique_lock lock(mutex_);
  return expire_locked(clock_());
}

SessionInfo StudyService::create_session(const std::string& participant_id,
                                         std::int64_t client_epoch_ms) {
  if (participant_id.empty()) throw ValidationError("participant_id must not be empty");
  std::unique_lock lock(mutex_);
  const std::int64_t now = clock_();
  expire_locked(now);

  const std::size_t counter = creation_order_.size();
  const auto assignment =
      assign_batch(word_counts_, state_, config_, mix_seed(config_.seed, counter));

  auto session = std::make_unique<Session>();
  session->id = session_name(counter);
  session->participant = participant_id;
  session->created_at = now;
  session->client_epoch_ms = client_epoch_ms;
  for (const TrialAssignment& a : assignment) {
    Trial t;
    t.stimulus = a.stimulus;
    t.layout = a.layout;
    session->trials.push_back(std::move(t));
  }

  if (journal_) {
    ordered_json j;
    j["type"] = "created";
    j["session_id"] = session->id;
    j["participant_id"] = session->participant;
    j["created_at"] = session->created_at;
    j["client_epoch_ms"] = session->client_epoch_ms;
    ordered_json trials = ordered_json::array();
    for (const Trial& t : session->trials) {
      trials.push_back(ordered_json{{"stimulus_id", stimuli_[t.stimulus].id()},
                                    {"layout", std::string(to_string(t.layout))}});
    }
    j["trials"] = std::move(trials);
    journal_->append(Journal::kSessions, detail::dump(j));
  }
  for (const Trial& t : session->trials) ++state_.reserved[t.stimulus];

  const std::string id = session->id;
  creation_order_.push_back(session.get());
  sessions_.emplace(id, std::move(session));
  lock.unlock();
  return this->session(id);
}

IngestAck StudyService::ingest_events(const std::string& session_id, std::size_t trial,
                                      std::uint64_t seq, const std::vector<HoverEvent>& events) {
  std::shared_lock lock(mutex_);
  Session& s = find_session(session_id);
  std::lock_guard session_lock(s.mutex);
  if (trial >= s.trials.size()) {
    throw NotFoundError("session '" + session_id + "' has no trial " + std::to_string(trial));
  }
  if (trial > s.cursor) {
    throw NotFoundError("trial " + std::to_string(trial) + " of session '" + session_id +
                        "' is not open yet");
  }
  if (s.expired) throw ConflictError("session '" + session_id + "' has expired");

  Trial& t = s.trials[trial];
  if (t.batches.contains(seq)) return IngestAck{t.event_count, true};

  validate_events(events);
  const TokenizedStimulus& stim = stimuli_[t.stimulus];
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].char_index >= stim.char_count(events[i].section)) {
      throw ValidationError("event " + std::to_string(i) + " references character " +
                                std::to_string(events[i].char_index) + " beyond " +
                                std::string(to_string(events[i].section)),
                            i);
    }
  }

  if (journal_) {
    ordered_json j;
    j["session_id"] = session_id;
    j["trial"] = trial;
    j["seq"] = seq;
    ordered_json arr = ordered_json::array();
    for (const HoverEvent& e : events) arr.push_back(detail::event_to_json(e));
    j["events"] = std::move(arr);
    journal_->append(Journal::kEvents, detail::dump(j));
  }
  t.event_count += events.size();
  t.batches.emplace(seq, events);
  return IngestAck{t.event_count, false};
}

AnnotationAck StudyService::record_annotation(const std::string& session_id, std::size_t trial,
                                              Choice choice, Rationale rationale) {
  if (choice == Choice::None) throw ValidationError("choice must be ResponseA or ResponseB");
  std::unique_lock lock(mutex_);
  Session& s = find_session(session_id);
  if (trial >= s.trials.size()) {
    throw NotFoundError("session '" + session_id + "' has no trial " + std::to_string(trial));
  }
  if (trial < s.cursor) {
    throw ConflictError("trial " + std::to_string(trial) + " of session '" + session_id +
                        "' is already annotated");
  }
  if (trial > s.cursor) {
    throw NotFoundError("trial " + std::to_string(trial) + " of session '" + session_id +
                        "' is not open yet");
  }
  if (s.expired) throw ConflictError("session '" + session_id + "' has expired");

  Trial& t = s.trials[trial];
  if (journal_) {
    ordered_json j;
    j["session_id"] = session_id;
    j["trial"] = trial;
    j["choice"] = std::string(to_string(choice));
    j["rationale"] = std::string(to_string(rationale));
    j["at"] = clock_();
    journal_->append(Journal::kAnnotations, detail::dump(j));
  }
  t.choice = choice;
  t.rationale = rationale;
  --state_.reserved[t.stimulus];
  ++state_.completed[t.stimulus];
  ++s.cursor;
  return AnnotationAck{s.cursor, s.complete(), t.event_count == 0};
}

SessionInfo StudyService::session(const std::string& session_id) const {
  std::shared_lock lock(mutex_);
  const Session& s = find_session(session_id);
  SessionInfo info;
  info.session_id = s.id;
  info.participant_id = s.participant;
  info.created_at = s.created_at;
  info.client_epoch_ms = s.client_epoch_ms;
  info.cursor = s.cursor;
  info.expired = s.expired;
  for (std::size_t k = 0; k < s.trials.size(); ++k) {
    const Trial& t = s.trials[k];
    info.trials.push_back(SessionTrialInfo{k, make_trial_id(s.id, k), stimuli_[t.stimulus].id(),
                                           t.layout, t.choice != Choice::None});
  }
  return info;
}

const TokenizedStimulus& StudyService::stimulus(const std::string& stimulus_id) const {
  const auto it = stimulus_index_.find(stimulus_id);
  if (it == stimulus_index_.end()) throw NotFoundError("unknown stimulus '" + stimulus_id + "'");
  return stimuli_[it->second];
}

CorpusState StudyService::corpus_state() const {
  std::shared_lock lock(mutex_);
  return state_;
}

std::vector<TrialRecord> StudyService::export_trials() const {
  std::shared_lock lock(mutex_);
  std::vector<TrialRecord> out;
  for (const Session* s : creation_order_) {
    std::lock_guard session_lock(s->mutex);
    for (std::size_t k = 0; k < s->trials.size(); ++k) {
      const Trial& t = s->trials[k];
      TrialRecord r;
      r.trial_id = make_trial_id(s->id, k);
      r.participant_id = s->participant;
      r.session_id = s->id;
      r.stimulus_id = stimuli_[t.stimulus].id();
      r.order = k;
      r.layout = t.layout;
      for (const auto& [seq, batch] : t.batches) {
        r.events.insert(r.events.end(), batch.begin(), batch.end());
      }
      std::stable_sort(r.events.begin(), r.events.end(),
                       [](const HoverEvent& a, const HoverEvent& b) { return a.enter_ms < b.enter_ms; });
      r.choice = t.choice;
      r.rationale = t.rationale;
      if (!r.events.empty()) {
        std::int64_t last = r.events.front().exit_ms;
        for (const HoverEvent& e : r.events) last = std::max(last, e.exit_ms);
        r.started_at = s->client_epoch_ms + r.events.front().enter_ms;
        r.ended_at = s->client_epoch_ms + last;
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string StudyService::export_jsonl() const {
  std::string out;
  for (const TrialRecord& r : export_trials()) {
    out += trial_to_json_line(r);
    out += '\n';
  }
  return out;
}

}  // namespace readtrace
