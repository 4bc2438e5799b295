#include "readtrace/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <tuple>

#include "json_util.hpp"
#include "readtrace/error.hpp"
#include "readtrace/serialization.hpp"

namespace readtrace {

using detail::ordered_json;

StimulusCatalog::StimulusCatalog(std::vector<TokenizedStimulus> stimuli)
    : stimuli_(std::move(stimuli)) {
  for (std::size_t i = 0; i < stimuli_.size(); ++i) {
    if (!index_.emplace(stimuli_[i].id(), i).second) {
      throw ValidationError("duplicate stimulus id '" + stimuli_[i].id() + "'");
    }
  }
}

const TokenizedStimulus& StimulusCatalog::at(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw ValidationError("unknown stimulus '" + id + "'");
  return stimuli_[it->second];
}

ProcessedCorpus process_corpus(std::vector<TrialRecord> trials, const StimulusCatalog& catalog,
                               const AnalysisConfig& config) {
  ProcessedCorpus out;
  out.trials.reserve(trials.size());
  std::vector<double> coverage;
  coverage.reserve(trials.size());
  for (TrialRecord& t : trials) {
    const TokenizedStimulus& stimulus = catalog.at(t.stimulus_id);
    TrialAnalysis a = analyze_trial(t, stimulus);
    if (a.consolidated.malformed()) ++out.malformed_trials;
    coverage.push_back(a.word_coverage.overall);
    out.trials.push_back(ProcessedTrial{std::move(t), std::move(a)});
  }
  std::vector<TrialRecord> records;
  records.reserve(out.trials.size());
  for (ProcessedTrial& p : out.trials) records.push_back(std::move(p.record));
  out.exclusions = apply_exclusions(records, coverage, config.min_coverage);
  for (std::size_t i = 0; i < records.size(); ++i) out.trials[i].record = std::move(records[i]);
  return out;
}

std::string analysis_records_jsonl(const ProcessedCorpus& corpus) {
  std::string out;
  for (const ProcessedTrial& p : corpus.trials) {
    out += analysis_to_json_line(p.record, p.analysis);
    out += '\n';
  }
  return out;
}

const ReportedTest* AgreementReport::find(const std::string& name) const {
  for (const ReportedTest& t : tests) {
    if (t.result.test_name == name) return &t;
  }
  return nullptr;
}

namespace {

using Table = std::vector<std::vector<std::int64_t>>;

double rate(std::size_t hits, std::size_t n) {
  return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

// Attempts a test and files it under its family, or records why it failed.
class TestCollector {
 public:
  explicit TestCollector(AgreementReport& report) : report_(report) {}

  void family(std::string name, std::size_t size) {
    flush();
    family_ = std::move(name);
    family_size_ = size;
  }

  void run(const std::string& name, const std::function<ReportedTest()>& body) {
    try {
      ReportedTest t = body();
      t.result.test_name = name;
      pending_.push_back(std::move(t));
    } catch (const Error& e) {
      report_.failures.push_back(FailedTest{name, e.what()});
    }
  }

  void flush() {
    if (pending_.empty()) return;
    std::vector<stats::TestResult> results;
    for (const ReportedTest& t : pending_) results.push_back(t.result);
    results = stats::bonferroni(std::move(results), family_size_);
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      pending_[i].result = results[i];
      pending_[i].family = family_;
      pending_[i].family_size = family_size_;
      report_.tests.push_back(std::move(pending_[i]));
    }
    pending_.clear();
  }

 private:
  AgreementReport& report_;
  std::string family_;
  std::size_t family_size_ = 1;
  std::vector<ReportedTest> pending_;
};

// 2 x 2 table with rows {feature, no feature} and columns {agree, disagree};
// the group summaries carry the feature rate within each column.
ReportedTest binary_feature_test(const Table& table, const std::string& feature) {
  ReportedTest t;
  t.result = stats::chi_square_independence(table);
  t.row_labels = {feature, "not_" + feature};
  t.column_labels = {"agree", "disagree"};
  for (std::size_t c = 0; c < 2; ++c) {
    const auto n = static_cast<std::size_t>(table[0][c] + table[1][c]);
    t.result.groups.push_back(stats::GroupSummary{t.column_labels[c], n,
                                                  rate(static_cast<std::size_t>(table[0][c]), n),
                                                  0.0});
  }
  return t;
}

ReportedTest agreement_t_test(const GroupedValues& values, stats::VarianceModel model) {
  ReportedTest t;
  t.result = stats::t_test_independent(values.agree, values.disagree, model);
  t.result.groups[0].name = "agree";
  t.result.groups[1].name = "disagree";
  return t;
}

DecileProfile decile_profile(const std::vector<const TrialMetrics*>& metrics, Role role) {
  DecileProfile p;
  std::array<std::size_t, 10> skipped{};
  for (const TrialMetrics* m : metrics) {
    for (const SkipPosition& s : m->skip_positions) {
      if (s.role != role) continue;
      const auto decile = std::min<std::size_t>(9, static_cast<std::size_t>(s.position * 10.0));
      ++p.words[decile];
      if (s.skipped) ++skipped[decile];
    }
  }
  for (std::size_t d = 0; d < 10; ++d) p.skip_rate[d] = rate(skipped[d], p.words[d]);
  return p;
}

}  // namespace

AnalysisReport analyze(std::vector<TrialRecord> trials, const StimulusCatalog& catalog,
                       const AnalysisConfig& config,
                       const std::map<std::string, double>* similarity) {
  std::sort(trials.begin(), trials.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.stimulus_id, a.participant_id, a.trial_id) <
           std::tie(b.stimulus_id, b.participant_id, b.trial_id);
  });
  const ProcessedCorpus corpus = process_corpus(std::move(trials), catalog, config);

  std::vector<AnnotatedTrial> retained;
  std::vector<std::size_t> source;  // index into corpus.trials
  for (std::size_t i = 0; i < corpus.trials.size(); ++i) {
    const ProcessedTrial& p = corpus.trials[i];
    if (p.record.excluded || !p.analysis.metrics) continue;
    AnnotatedTrial a;
    a.trial_id = p.record.trial_id;
    a.participant_id = p.record.participant_id;
    a.stimulus_id = p.record.stimulus_id;
    a.chosen = p.record.choice == Choice::ResponseA ? Section::ResponseA : Section::ResponseB;
    a.rationale = *p.record.rationale;
    a.layout = p.record.layout;
    a.metrics = *p.analysis.metrics;
    retained.push_back(std::move(a));
    source.push_back(i);
  }

  const PairSet pairs = build_pairs(retained);
  std::map<std::string, std::size_t> per_stimulus;
  for (const AnnotatedTrial& a : retained) ++per_stimulus[a.stimulus_id];
  const auto paired_stimuli = std::count_if(per_stimulus.begin(), per_stimulus.end(),
                                            [](const auto& kv) { return kv.second >= 2; });
  if (paired_stimuli < 2) {
    throw ValidationError("insufficient data: need at least two stimuli with two or more "
                          "retained annotations, found " +
                          std::to_string(paired_stimuli));
  }

  AnalysisReport report;
  AgreementReport& agreement = report.agreement;
  agreement.pairs = pairs.pairs.size();
  agreement.agreeing_pairs = pairs.agreeing();
  agreement.disagreeing_pairs = pairs.disagreeing();
  agreement.skipped_stimuli = pairs.skipped;

  // Alpha over response identity, one row per stimulus.
  stats::LabelMatrix labels;
  {
    std::map<std::string, std::vector<std::optional<int>>> rows;
    for (const AnnotatedTrial& a : retained) {
      rows[a.stimulus_id].push_back(a.chosen == Section::ResponseA ? 0 : 1);
    }
    for (auto& [id, row] : rows) labels.items.push_back(std::move(row));
    agreement.alpha_items = labels.items.size();
    try {
      agreement.alpha = stats::krippendorff_alpha(labels);
    } catch (const Error& e) {
      agreement.alpha_error = e.what();
    }
  }

  TestCollector tests(agreement);
  const std::span<const AnnotatedTrial> members(retained);

  tests.family("categorical", 6);
  tests.run("reread_any_vs_agreement", [&] {
    return binary_feature_test(
        membership_table(pairs, members, 2,
                         [](const AnnotatedTrial& a) { return a.metrics.reread_any() ? 0u : 1u; }),
        "reread_any");
  });
  tests.run("reread_response_vs_agreement", [&] {
    return binary_feature_test(
        membership_table(pairs, members, 2,
                         [](const AnnotatedTrial& a) { return a.metrics.reread_response() ? 0u : 1u; }),
        "reread_response");
  });
  tests.run("loop_vs_agreement", [&] {
    return binary_feature_test(
        membership_table(pairs, members, 2,
                         [](const AnnotatedTrial& a) { return a.metrics.loop ? 0u : 1u; }),
        "loop");
  });
  tests.run("shared_rationale_vs_agreement", [&] {
    return binary_feature_test(
        pair_table(pairs, 2, [](const PairObservation& p) { return p.shared_rationale ? 0u : 1u; }),
        "shared_rationale");
  });
  tests.run("rationale_vs_agreement", [&] {
    const Table full = membership_table(pairs, members, kAllRationales.size(),
                                        [](const AnnotatedTrial& a) {
                                          return static_cast<std::size_t>(a.rationale);
                                        });
    ReportedTest t;
    Table used;
    for (std::size_t r = 0; r < full.size(); ++r) {
      if (full[r][0] + full[r][1] == 0) continue;
      used.push_back(full[r]);
      t.row_labels.emplace_back(to_string(kAllRationales[r]));
    }
    t.result = stats::chi_square_independence(used);
    t.column_labels = {"agree", "disagree"};
    return t;
  });
  tests.run("position_bias", [&] {
    std::array<std::int64_t, 2> sides{};
    for (const AnnotatedTrial& a : retained) ++sides[a.chosen == left_section(a.layout) ? 0 : 1];
    ReportedTest t;
    const std::array<double, 2> fair{0.5, 0.5};
    t.result = stats::chi_square_goodness(sides, fair);
    t.row_labels = {"observed"};
    t.column_labels = {"left", "right"};
    return t;
  });

  tests.family("continuous", 4);
  tests.run("path_length_by_agreement", [&] {
    return agreement_t_test(member_values(pairs, members,
                                          [](const AnnotatedTrial& a) {
                                            return static_cast<double>(a.metrics.path_length);
                                          }),
                            config.variance);
  });
  tests.run("ms_per_word_by_agreement", [&] {
    return agreement_t_test(
        member_values(pairs, members,
                      [](const AnnotatedTrial& a) { return a.metrics.ms_per_word_responses; }),
        config.variance);
  });
  tests.run("word_coverage_by_agreement", [&] {
    return agreement_t_test(
        member_values(pairs, members,
                      [](const AnnotatedTrial& a) { return a.metrics.word_coverage; }),
        config.variance);
  });
  tests.run("focus_overlap_by_agreement", [&] {
    return agreement_t_test(
        pair_values(pairs, [](const PairObservation& p) { return p.focus_overlap; }),
        config.variance);
  });

  tests.family("reading", 2);
  tests.run("skipped_words_chosen_vs_rejected", [&] {
    std::vector<double> chosen, rejected;
    for (const AnnotatedTrial& a : retained) {
      chosen.push_back(static_cast<double>(a.metrics.skipped_chosen));
      rejected.push_back(static_cast<double>(a.metrics.skipped_rejected));
    }
    ReportedTest t;
    t.result = stats::t_test_paired(chosen, rejected);
    t.result.groups[0].name = "chosen";
    t.result.groups[1].name = "rejected";
    return t;
  });
  tests.run("coverage_responses_vs_prompt", [&] {
    std::vector<double> responses, prompt;
    for (const AnnotatedTrial& a : retained) {
      responses.push_back(a.metrics.coverage_responses);
      prompt.push_back(a.metrics.coverage_prompt);
    }
    ReportedTest t;
    t.result = stats::t_test_paired(responses, prompt);
    t.result.groups[0].name = "responses";
    t.result.groups[1].name = "prompt";
    return t;
  });
  tests.flush();

  // Behavioral summary over retained trials.
  BehaviorSummary& b = report.behavior;
  b.trials_total = corpus.trials.size();
  b.trials_retained = retained.size();
  b.exclusions = corpus.exclusions;
  b.malformed_trials = corpus.malformed_trials;
  const std::size_t n = retained.size();
  std::size_t rp = 0, rc = 0, rr = 0, ra = 0, rresp = 0, loops = 0, last_chosen = 0;
  std::vector<double> path, cov, cov_p, cov_c, cov_r, cov_resp, rate_ms, skip_c, skip_r;
  std::vector<const TrialMetrics*> metrics;
  std::size_t aligned = 0, labelled = 0;
  for (const AnnotatedTrial& a : retained) {
    const TrialMetrics& m = a.metrics;
    metrics.push_back(&m);
    rp += m.reread_prompt;
    rc += m.reread_chosen;
    rr += m.reread_rejected;
    rresp += m.reread_response();
    loops += m.loop;
    if (m.reread_any()) {
      ++ra;
      if (m.last_section == Role::Chosen) ++last_chosen;
    }
    path.push_back(static_cast<double>(m.path_length));
    cov.push_back(m.word_coverage);
    cov_p.push_back(m.coverage_prompt);
    cov_c.push_back(m.coverage_chosen);
    cov_r.push_back(m.coverage_rejected);
    cov_resp.push_back(m.coverage_responses);
    rate_ms.push_back(m.ms_per_word_responses);
    skip_c.push_back(static_cast<double>(m.skipped_chosen));
    skip_r.push_back(static_cast<double>(m.skipped_rejected));
    if (const auto label = catalog.at(a.stimulus_id).source_label()) {
      ++labelled;
      if (*label == a.chosen) ++aligned;
    }
  }
  b.reread_prompt = rate(rp, n);
  b.reread_chosen = rate(rc, n);
  b.reread_rejected = rate(rr, n);
  b.reread_any = rate(ra, n);
  b.reread_response = rate(rresp, n);
  if (ra > 0) b.last_chosen_among_rereaders = rate(last_chosen, ra);
  b.loop_rate = rate(loops, n);
  b.path_length_mean = stats::mean(path);
  b.path_length_sd = stats::sample_sd(path);
  b.coverage_overall = stats::mean(cov);
  b.coverage_prompt = stats::mean(cov_p);
  b.coverage_chosen = stats::mean(cov_c);
  b.coverage_rejected = stats::mean(cov_r);
  b.coverage_responses = stats::mean(cov_resp);
  b.ms_per_word_mean = stats::mean(rate_ms);
  b.skipped_chosen_mean = stats::mean(skip_c);
  b.skipped_rejected_mean = stats::mean(skip_r);
  b.chosen_profile = decile_profile(metrics, Role::Chosen);
  b.rejected_profile = decile_profile(metrics, Role::Rejected);
  b.pair_agreement = rate(pairs.agreeing(), pairs.pairs.size());
  if (labelled > 0) b.source_label_alignment = rate(aligned, labelled);

  if (similarity != nullptr && !similarity->empty()) {
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [id, value] : per_stimulus) {
      const auto it = similarity->find(id);
      if (it != similarity->end()) ranked.emplace_back(it->second, id);
    }
    std::sort(ranked.begin(), ranked.end());
    constexpr std::size_t kQuantiles = 4;
    std::map<std::string, std::size_t> quantile_of;
    std::vector<SimilarityBin> bins(std::min(kQuantiles, ranked.size()));
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const std::size_t q = i * bins.size() / ranked.size();
      quantile_of[ranked[i].second] = q;
      SimilarityBin& bin = bins[q];
      if (bin.stimuli == 0) bin.min_similarity = ranked[i].first;
      bin.quantile = q + 1;
      bin.max_similarity = ranked[i].first;
      ++bin.stimuli;
    }
    std::vector<std::size_t> rereads(bins.size(), 0);
    for (const AnnotatedTrial& a : retained) {
      const auto it = quantile_of.find(a.stimulus_id);
      if (it == quantile_of.end()) continue;
      ++bins[it->second].trials;
      if (a.metrics.reread_response()) ++rereads[it->second];
    }
    for (std::size_t q = 0; q < bins.size(); ++q) {
      bins[q].response_reread_rate = rate(rereads[q], bins[q].trials);
    }
    b.similarity = std::move(bins);
  }
  return report;
}

namespace {

ordered_json nullable(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); }

ordered_json test_json(const ReportedTest& t, double level) {
  const stats::TestResult& r = t.result;
  ordered_json j;
  j["test_name"] = r.test_name;
  j["family"] = t.family;
  j["bonferroni_m"] = t.family_size;
  j["statistic"] = r.statistic;
  j["df"] = r.df;
  j["p_raw"] = r.p_raw;
  j["p_adjusted"] = r.p_adjusted;
  j["significant"] = r.significant(level);
  if (!r.groups.empty()) {
    ordered_json groups;
    for (const stats::GroupSummary& g : r.groups) {
      groups[g.name] = ordered_json{{"n", g.n}, {"mean", g.mean}, {"sd", g.sd}};
    }
    j["groups"] = std::move(groups);
  }
  if (!r.counts.empty()) {
    j["table"] = ordered_json{{"rows", t.row_labels}, {"columns", t.column_labels},
                              {"counts", r.counts}};
  }
  return j;
}

ordered_json exclusions_json(const ExclusionSummary& e) {
  return ordered_json{{"trials", e.trials},
                      {"low_coverage", e.low_coverage},
                      {"abandoned", e.abandoned},
                      {"rate", e.rate()}};
}

ordered_json profile_json(const DecileProfile& p) {
  return ordered_json{{"skip_rate", p.skip_rate}, {"words", p.words}};
}

}  // namespace

std::string agreement_to_json(const AgreementReport& report, const AnalysisConfig& config) {
  ordered_json j;
  j["alpha"] = nullable(report.alpha);
  if (!report.alpha_error.empty()) j["alpha_error"] = report.alpha_error;
  j["alpha_items"] = report.alpha_items;
  ordered_json tests = ordered_json::array();
  for (const ReportedTest& t : report.tests) tests.push_back(test_json(t, config.significance));
  j["tests"] = std::move(tests);
  ordered_json failures = ordered_json::array();
  for (const FailedTest& f : report.failures) {
    failures.push_back(ordered_json{{"test_name", f.test_name}, {"error", f.error}});
  }
  j["errors"] = std::move(failures);
  ordered_json skipped = ordered_json::array();
  for (const SkippedStimulus& s : report.skipped_stimuli) {
    skipped.push_back(ordered_json{{"stimulus_id", s.stimulus_id}, {"annotations", s.annotations}});
  }
  j["pair_counts"] = ordered_json{{"pairs", report.pairs},
                                  {"agreeing", report.agreeing_pairs},
                                  {"disagreeing", report.disagreeing_pairs},
                                  {"skipped_stimuli", std::move(skipped)}};
  j["config"] = ordered_json{
      {"significance", config.significance},
      {"correction", "bonferroni, per test family"},
      {"independent_t", config.variance == stats::VarianceModel::Pooled ? "pooled" : "welch"},
      {"unit_of_analysis", "annotator-pair membership"},
      {"alpha_labels", "chosen response identity (ResponseA/ResponseB)"},
      {"min_word_coverage", config.min_coverage},
      {"fixation_window_ms", ordered_json::array({FixationWindow{}.min_ms, FixationWindow{}.max_ms})},
      {"min_visit_ms", kMinVisitMs},
      {"focus_min_bin", kFocusMinBin}};
  return detail::dump_pretty(j);
}

std::string behavior_to_json(const BehaviorSummary& b) {
  ordered_json j;
  j["trials_total"] = b.trials_total;
  j["trials_retained"] = b.trials_retained;
  j["exclusions"] = exclusions_json(b.exclusions);
  j["malformed_trials"] = b.malformed_trials;
  j["reread_rates"] = ordered_json{{"prompt", b.reread_prompt},
                                   {"chosen", b.reread_chosen},
                                   {"rejected", b.reread_rejected},
                                   {"any", b.reread_any},
                                   {"response", b.reread_response}};
  j["last_section_chosen_among_rereaders"] = nullable(b.last_chosen_among_rereaders);
  j["loop_rate"] = b.loop_rate;
  j["path_length"] = ordered_json{{"mean", b.path_length_mean}, {"sd", b.path_length_sd}};
  j["coverage"] = ordered_json{{"overall", b.coverage_overall},
                               {"prompt", b.coverage_prompt},
                               {"chosen", b.coverage_chosen},
                               {"rejected", b.coverage_rejected},
                               {"responses", b.coverage_responses}};
  j["ms_per_word_responses"] = b.ms_per_word_mean;
  j["skipped_words"] =
      ordered_json{{"chosen_mean", b.skipped_chosen_mean}, {"rejected_mean", b.skipped_rejected_mean}};
  j["skip_profile"] =
      ordered_json{{"chosen", profile_json(b.chosen_profile)}, {"rejected", profile_json(b.rejected_profile)}};
  j["pair_agreement"] = b.pair_agreement;
  j["source_label_alignment"] = nullable(b.source_label_alignment);
  if (!b.similarity.empty()) {
    ordered_json sim = ordered_json::array();
    for (const SimilarityBin& s : b.similarity) {
      sim.push_back(ordered_json{{"quantile", s.quantile},
                                 {"min_similarity", s.min_similarity},
                                 {"max_similarity", s.max_similarity},
                                 {"stimuli", s.stimuli},
                                 {"trials", s.trials},
                                 {"response_reread_rate", s.response_reread_rate}});
    }
    j["similarity_quantiles"] = std::move(sim);
  }
  return detail::dump_pretty(j);
}

std::string render_summary(const AnalysisReport& report) {
  const BehaviorSummary& b = report.behavior;
  const AgreementReport& a = report.agreement;
  std::string out;
  char line[256];
  const auto emit = [&](const char* fmt, auto... args) {
    std::snprintf(line, sizeof line, fmt, args...);
    out += line;
  };
  emit("trials            %zu (retained %zu, excluded %zu: %zu low coverage, %zu abandoned)\n",
       b.trials_total, b.trials_retained, b.exclusions.excluded(), b.exclusions.low_coverage,
       b.exclusions.abandoned);
  if (a.alpha) {
    emit("alpha             %.4f over %zu items\n", *a.alpha, a.alpha_items);
  } else {
    emit("alpha             undefined (%s)\n", a.alpha_error.c_str());
  }
  emit("pairs             %zu (%zu agree, %zu disagree)\n", a.pairs, a.agreeing_pairs,
       a.disagreeing_pairs);
  emit("re-read rate      prompt %.3f  chosen %.3f  rejected %.3f  any %.3f\n", b.reread_prompt,
       b.reread_chosen, b.reread_rejected, b.reread_any);
  if (b.last_chosen_among_rereaders) {
    emit("last = chosen     %.3f of re-reading trials\n", *b.last_chosen_among_rereaders);
  }
  emit("loop rate         %.3f\n", b.loop_rate);
  emit("path length       %.2f (sd %.2f)\n", b.path_length_mean, b.path_length_sd);
  emit("coverage          overall %.3f  prompt %.3f  responses %.3f\n", b.coverage_overall,
       b.coverage_prompt, b.coverage_responses);
  emit("ms/word responses %.2f\n", b.ms_per_word_mean);
  emit("skipped words     chosen %.2f  rejected %.2f\n", b.skipped_chosen_mean,
       b.skipped_rejected_mean);
  out += "\ntest                                 statistic       df     p_raw     p_adj\n";
  for (const ReportedTest& t : a.tests) {
    emit("%-34s %11.4f %8.2f %9.4g %9.4g%s\n", t.result.test_name.c_str(), t.result.statistic,
         t.result.df, t.result.p_raw, t.result.p_adjusted, t.result.significant() ? " *" : "");
  }
  for (const FailedTest& f : a.failures) {
    emit("%-34s not computed: %s\n", f.test_name.c_str(), f.error.c_str());
  }
  out += "\nskip rate by decile   chosen  rejected\n";
  for (std::size_t d = 0; d < 10; ++d) {
    emit("  %3zu-%3zu%%          %7.3f  %8.3f\n", d * 10, d * 10 + 10,
         b.chosen_profile.skip_rate[d], b.rejected_profile.skip_rate[d]);
  }
  return out;
}

AggregateVector stimulus_aggregate(const ProcessedCorpus& corpus, const TokenizedStimulus& stimulus) {
  std::vector<const ProcessedTrial*> trials;
  for (const ProcessedTrial& p : corpus.trials) {
    if (p.record.stimulus_id == stimulus.id() && !p.record.excluded) trials.push_back(&p);
  }
  if (trials.empty()) {
    throw NotFoundError("stimulus '" + stimulus.id() + "' has no retained trial");
  }
  std::sort(trials.begin(), trials.end(), [](const ProcessedTrial* a, const ProcessedTrial* b) {
    return a->record.trial_id < b->record.trial_id;
  });
  std::vector<BinnedVector> bins;
  std::vector<std::string> labels;
  for (const ProcessedTrial* p : trials) {
    bins.push_back(p->analysis.bins);
    labels.push_back(p->record.participant_id);
  }
  return aggregate_bins(bins, labels);
}

}  // namespace readtrace
