#include "readtrace/serialization.hpp"

#include <fstream>
#include <istream>
#include <sstream>

#include "json_util.hpp"

namespace readtrace {

namespace detail {

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed " + std::string(what) + ": " + e.what());
  }
}

const json& field(const json& object, std::string_view key, std::string_view what) {
  if (!object.is_object()) throw ValidationError(std::string(what) + " is not a JSON object");
  const auto it = object.find(key);
  if (it == object.end()) {
    throw ValidationError(std::string(what) + " is missing field '" + std::string(key) + "'");
  }
  return *it;
}

std::string string_field(const json& object, std::string_view key, std::string_view what) {
  const json& v = field(object, key, what);
  if (!v.is_string()) {
    throw ValidationError(std::string(what) + " field '" + std::string(key) +
                          "' must be a string");
  }
  return v.get<std::string>();
}

std::int64_t int_field(const json& object, std::string_view key, std::string_view what) {
  const json& v = field(object, key, what);
  if (!v.is_number_integer()) {
    throw ValidationError(std::string(what) + " field '" + std::string(key) +
                          "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t uint_field(const json& object, std::string_view key, std::string_view what) {
  const std::int64_t v = int_field(object, key, what);
  if (v < 0) {
    throw ValidationError(std::string(what) + " field '" + std::string(key) +
                          "' must be non-negative");
  }
  return static_cast<std::uint64_t>(v);
}

HoverEvent event_from_json(const json& object) {
  HoverEvent e;
  e.section = parse_section(string_field(object, "section", "event"));
  e.char_index = static_cast<std::size_t>(uint_field(object, "char_index", "event"));
  e.enter_ms = int_field(object, "enter_ms", "event");
  e.exit_ms = int_field(object, "exit_ms", "event");
  return e;
}

ordered_json event_to_json(const HoverEvent& e) {
  ordered_json j;
  j["section"] = std::string(to_string(e.section));
  j["char_index"] = e.char_index;
  j["enter_ms"] = e.enter_ms;
  j["exit_ms"] = e.exit_ms;
  return j;
}

ordered_json trial_to_json(const TrialRecord& t) {
  ordered_json j;
  j["trial_id"] = t.trial_id;
  j["participant_id"] = t.participant_id;
  j["session_id"] = t.session_id;
  j["stimulus_id"] = t.stimulus_id;
  j["order"] = t.order;
  j["layout"] = std::string(to_string(t.layout));
  ordered_json events = ordered_json::array();
  for (const HoverEvent& e : t.events) events.push_back(event_to_json(e));
  j["events"] = std::move(events);
  j["choice"] = t.annotated() ? ordered_json(std::string(to_string(t.choice))) : ordered_json();
  j["rationale"] = t.rationale ? ordered_json(std::string(to_string(*t.rationale))) : ordered_json();
  j["started_at"] = t.started_at;
  j["ended_at"] = t.ended_at;
  j["excluded"] = t.excluded;
  j["exclusion_reason"] = t.exclusion_reason;
  return j;
}

TrialRecord trial_from_json(const json& j) {
  constexpr std::string_view what = "trial record";
  TrialRecord t;
  t.trial_id = string_field(j, "trial_id", what);
  t.participant_id = string_field(j, "participant_id", what);
  t.stimulus_id = string_field(j, "stimulus_id", what);
  if (j.contains("session_id")) t.session_id = string_field(j, "session_id", what);
  if (j.contains("order")) t.order = static_cast<std::size_t>(uint_field(j, "order", what));
  t.layout = parse_layout(string_field(j, "layout", what));
  const json& events = field(j, "events", what);
  if (!events.is_array()) throw ValidationError("trial record field 'events' must be an array");
  t.events.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    try {
      t.events.push_back(event_from_json(events[i]));
    } catch (const ValidationError& e) {
      throw ValidationError("event " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  const auto choice = j.find("choice");
  if (choice != j.end() && !choice->is_null()) t.choice = parse_choice(choice->get<std::string>());
  const auto rationale = j.find("rationale");
  if (rationale != j.end() && !rationale->is_null()) {
    t.rationale = parse_rationale(rationale->get<std::string>());
  }
  if (j.contains("started_at")) t.started_at = int_field(j, "started_at", what);
  if (j.contains("ended_at")) t.ended_at = int_field(j, "ended_at", what);
  if (j.contains("excluded")) t.excluded = field(j, "excluded", what).get<bool>();
  if (j.contains("exclusion_reason")) t.exclusion_reason = string_field(j, "exclusion_reason", what);
  validate_trial(t);
  return t;
}

ordered_json metrics_to_json(const TrialMetrics& m) {
  ordered_json j;
  j["reread_prompt"] = m.reread_prompt;
  j["reread_chosen"] = m.reread_chosen;
  j["reread_rejected"] = m.reread_rejected;
  j["last_section"] =
      m.last_section ? ordered_json(std::string(to_string(*m.last_section))) : ordered_json();
  j["loop"] = m.loop;
  j["response_switches"] = m.response_switches;
  j["path_length"] = m.path_length;
  j["ms_per_word_responses"] = m.ms_per_word_responses;
  j["word_coverage"] = m.word_coverage;
  j["coverage_prompt"] = m.coverage_prompt;
  j["coverage_chosen"] = m.coverage_chosen;
  j["coverage_rejected"] = m.coverage_rejected;
  j["coverage_responses"] = m.coverage_responses;
  j["skipped_chosen"] = m.skipped_chosen;
  j["skipped_rejected"] = m.skipped_rejected;
  ordered_json positions = ordered_json::array();
  for (const SkipPosition& p : m.skip_positions) {
    positions.push_back(
        ordered_json{{"role", std::string(to_string(p.role))}, {"position", p.position},
                     {"skipped", p.skipped}});
  }
  j["skip_positions"] = std::move(positions);
  j["focus_set"] = m.focus_set;
  return j;
}

}  // namespace detail

using detail::json;
using detail::ordered_json;

namespace {

template <typename T, typename Parse>
std::vector<T> read_lines(std::istream& in, std::string_view what, Parse parse) {
  std::vector<T> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(line));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(what) + " line " + std::to_string(number) + ": " +
                                e.what(),
                            number);
    }
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

}  // namespace

StimulusRecord parse_stimulus_line(std::string_view line) {
  constexpr std::string_view what = "stimulus record";
  const json j = detail::parse_json(line, what);
  StimulusRecord r;
  r.id = detail::string_field(j, "id", what);
  r.prompt = detail::string_field(j, "prompt", what);
  r.response_a = detail::string_field(j, "response_a", what);
  r.response_b = detail::string_field(j, "response_b", what);
  const auto label = j.find("source_label");
  if (label != j.end() && !label->is_null()) r.source_label = parse_section(label->get<std::string>());
  return r;
}

std::string stimulus_to_json_line(const StimulusRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["prompt"] = r.prompt;
  j["response_a"] = r.response_a;
  j["response_b"] = r.response_b;
  if (r.source_label) j["source_label"] = std::string(to_string(*r.source_label));
  return detail::dump(j);
}

std::vector<TokenizedStimulus> read_stimuli(std::istream& in) {
  return read_lines<TokenizedStimulus>(in, "stimulus file", [](const std::string& line) {
    return tokenize_stimulus(parse_stimulus_line(line));
  });
}

std::vector<TokenizedStimulus> load_stimuli(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_stimuli(in);
}

HoverEvent parse_hover_event(std::string_view object_json) {
  return detail::event_from_json(detail::parse_json(object_json, "event"));
}

TrialRecord parse_trial_line(std::string_view line) {
  return detail::trial_from_json(detail::parse_json(line, "trial record"));
}

std::string trial_to_json_line(const TrialRecord& trial) {
  return detail::dump(detail::trial_to_json(trial));
}

std::vector<TrialRecord> read_trials(std::istream& in) {
  return read_lines<TrialRecord>(in, "export file",
                                 [](const std::string& line) { return parse_trial_line(line); });
}

std::vector<TrialRecord> load_trials(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_trials(in);
}

std::string analysis_to_json_line(const TrialRecord& t, const TrialAnalysis& a) {
  ordered_json j;
  j["trial_id"] = t.trial_id;
  j["participant_id"] = t.participant_id;
  j["session_id"] = t.session_id;
  j["stimulus_id"] = t.stimulus_id;
  j["layout"] = std::string(to_string(t.layout));
  j["choice"] = t.annotated() ? ordered_json(std::string(to_string(t.choice))) : ordered_json();
  j["rationale"] = t.rationale ? ordered_json(std::string(to_string(*t.rationale))) : ordered_json();
  j["excluded"] = t.excluded;
  j["exclusion_reason"] = t.exclusion_reason;
  j["events"] = t.events.size();
  j["whitespace_events"] = a.consolidated.whitespace_events;
  j["malformed_events"] = a.consolidated.dropped_events;
  const auto fixation_array = [](const std::vector<Fixation>& fixations) {
    ordered_json arr = ordered_json::array();
    for (const Fixation& f : fixations) arr.push_back(ordered_json::array({f.word_index, f.duration_ms}));
    return arr;
  };
  j["fixations"] = fixation_array(a.consolidated.fixations);
  j["cleaned_fixations"] = fixation_array(a.cleaned);
  j["durations"] = a.durations.totals;
  j["bins"] = a.bins.bins;
  ordered_json path = ordered_json::array();
  for (const SectionVisit& v : a.path.visits) {
    path.push_back(ordered_json{{"section", std::string(to_string(v.section))},
                                {"enter_ms", v.enter_ms},
                                {"exit_ms", v.exit_ms}});
  }
  j["path"] = std::move(path);
  j["word_coverage"] = a.word_coverage.overall;
  j["metrics"] = a.metrics ? detail::metrics_to_json(*a.metrics) : ordered_json();
  return detail::dump(j);
}

std::string metrics_to_json(const TrialMetrics& metrics) {
  return detail::dump(detail::metrics_to_json(metrics));
}

std::map<std::string, double> read_similarities(std::istream& in) {
  std::map<std::string, double> out;
  const auto rows = read_lines<std::pair<std::string, double>>(
      in, "similarity file", [](const std::string& line) {
        constexpr std::string_view what = "similarity record";
        const json j = detail::parse_json(line, what);
        const json& v = detail::field(j, "similarity", what);
        if (!v.is_number()) throw ValidationError("similarity must be a number");
        return std::make_pair(detail::string_field(j, "stimulus_id", what), v.get<double>());
      });
  for (const auto& [id, value] : rows) out[id] = value;
  return out;
}

std::map<std::string, double> load_similarities(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_similarities(in);
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace readtrace
