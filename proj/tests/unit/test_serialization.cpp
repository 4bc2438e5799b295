#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "readtrace/error.hpp"
#include "readtrace/metrics.hpp"
#include "readtrace/random.hpp"
#include "readtrace/serialization.hpp"
#include "simulator.hpp"

using namespace readtrace;
using nlohmann::json;

namespace {

TrialRecord sample_trial() {
  TrialRecord t;
  t.trial_id = "T1";
  t.participant_id = "P1";
  t.session_id = "S000001";
  t.stimulus_id = "stim";
  t.order = 4;
  t.layout = Layout::ARight;
  t.events = {{Section::Prompt, 0, 0, 200}, {Section::ResponseB, 3, 250, 400}};
  t.choice = Choice::ResponseB;
  t.rationale = Rationale::LessHarmful;
  t.started_at = 1700000000000;
  t.ended_at = 1700000000400;
  return t;
}

void check_same(const TrialRecord& a, const TrialRecord& b) {
  CHECK(a.trial_id == b.trial_id);
  CHECK(a.participant_id == b.participant_id);
  CHECK(a.session_id == b.session_id);
  CHECK(a.stimulus_id == b.stimulus_id);
  CHECK(a.order == b.order);
  CHECK(a.layout == b.layout);
  CHECK(a.events == b.events);
  CHECK(a.choice == b.choice);
  CHECK(a.rationale == b.rationale);
  CHECK(a.started_at == b.started_at);
  CHECK(a.ended_at == b.ended_at);
  CHECK(a.excluded == b.excluded);
  CHECK(a.exclusion_reason == b.exclusion_reason);
}

}  // namespace

TEST_CASE("trial records round-trip") {
  const TrialRecord t = sample_trial();
  const std::string line = trial_to_json_line(t);
  CHECK(line.find('\n') == std::string::npos);
  check_same(parse_trial_line(line), t);
  CHECK(trial_to_json_line(parse_trial_line(line)) == line);

  TrialRecord open = t;
  open.choice = Choice::None;
  open.rationale.reset();
  const TrialRecord back = parse_trial_line(trial_to_json_line(open));
  CHECK_FALSE(back.annotated());
  CHECK_FALSE(back.rationale.has_value());
}

TEST_CASE("random trial records round-trip") {
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    TrialRecord t;
    t.trial_id = "T" + std::to_string(i);
    t.participant_id = "P" + std::to_string(rng.below(20));
    t.stimulus_id = "s\"" + std::to_string(rng.below(5)) + "é";
    t.layout = rng.coin() ? Layout::ALeft : Layout::ARight;
    std::int64_t now = 0;
    for (std::size_t k = rng.below(30); k > 0; --k) {
      const std::int64_t d = static_cast<std::int64_t>(rng.below(500));
      t.events.push_back({static_cast<Section>(rng.below(3)), rng.below(400), now, now + d});
      now += d + static_cast<std::int64_t>(rng.below(50));
    }
    if (rng.coin()) {
      t.choice = rng.coin() ? Choice::ResponseA : Choice::ResponseB;
      t.rationale = static_cast<Rationale>(rng.below(5));
    }
    t.excluded = rng.coin();
    t.exclusion_reason = t.excluded ? "abandoned" : "";
    check_same(parse_trial_line(trial_to_json_line(t)), t);
  }
}

TEST_CASE("trial parse errors") {
  SUBCASE("malformed json") { CHECK_THROWS_AS(parse_trial_line("{"), ValidationError); }
  SUBCASE("missing field") {
    json j = json::parse(trial_to_json_line(sample_trial()));
    j.erase("participant_id");
    CHECK_THROWS_AS(parse_trial_line(j.dump()), ValidationError);
  }
  SUBCASE("unknown layout") {
    json j = json::parse(trial_to_json_line(sample_trial()));
    j["layout"] = "B-left";
    CHECK_THROWS_AS(parse_trial_line(j.dump()), ValidationError);
  }
  SUBCASE("choice without rationale") {
    json j = json::parse(trial_to_json_line(sample_trial()));
    j["rationale"] = nullptr;
    CHECK_THROWS_AS(parse_trial_line(j.dump()), ValidationError);
  }
  SUBCASE("bad event names its index") {
    json j = json::parse(trial_to_json_line(sample_trial()));
    j["events"][1]["section"] = "Footer";
    try {
      parse_trial_line(j.dump());
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      REQUIRE(e.index().has_value());
      CHECK(*e.index() == 1);
    }
  }
}

TEST_CASE("streams report the failing line") {
  std::istringstream in(trial_to_json_line(sample_trial()) + "\n\n" + "not json\n");
  try {
    read_trials(in);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    REQUIRE(e.index().has_value());
    CHECK(*e.index() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("stimulus records round-trip") {
  StimulusRecord r{"id-1", "Human: hi\nthere", "Assistant: a b", "Assistant: c", Section::ResponseB};
  const StimulusRecord back = parse_stimulus_line(stimulus_to_json_line(r));
  CHECK(back.id == r.id);
  CHECK(back.prompt == r.prompt);
  CHECK(back.response_a == r.response_a);
  CHECK(back.response_b == r.response_b);
  CHECK(back.source_label == r.source_label);

  r.source_label.reset();
  CHECK_FALSE(parse_stimulus_line(stimulus_to_json_line(r)).source_label.has_value());

  std::istringstream in(stimulus_to_json_line(r) + "\n" + R"({"id":"x","prompt":"a","response_a":"  ","response_b":"c"})" + "\n");
  CHECK_THROWS_AS(read_stimuli(in), ValidationError);
}

TEST_CASE("hover events") {
  const HoverEvent e =
      parse_hover_event(R"({"section":"ResponseA","char_index":5,"enter_ms":10,"exit_ms":30})");
  CHECK(e == HoverEvent{Section::ResponseA, 5, 10, 30});
  CHECK_THROWS_AS(parse_hover_event(R"({"section":"ResponseA","char_index":-1,"enter_ms":0,"exit_ms":1})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_hover_event(R"({"section":"ResponseA","char_index":1,"enter_ms":"0","exit_ms":1})"),
                  ValidationError);
}

TEST_CASE("similarity files") {
  std::istringstream in(R"({"stimulus_id":"a","similarity":0.25})"
                        "\n"
                        R"({"stimulus_id":"b","similarity":1})"
                        "\n");
  const auto sims = read_similarities(in);
  REQUIRE(sims.size() == 2);
  CHECK(sims.at("a") == 0.25);
  CHECK(sims.at("b") == 1.0);
  std::istringstream bad(R"({"stimulus_id":"a","similarity":"high"})");
  CHECK_THROWS_AS(read_similarities(bad), ValidationError);
}

TEST_CASE("analysis records carry the pipeline stages") {
  Rng rng(3);
  const TokenizedStimulus stim = testkit::random_stimulus(rng, "s", 10, 10, 10);
  TrialRecord t = sample_trial();
  t.stimulus_id = "s";
  t.events = testkit::EventScript(stim).read_range(Section::Prompt, 0, 10, 300).events();
  const TrialAnalysis a = analyze_trial(t, stim);
  const json j = json::parse(analysis_to_json_line(t, a));
  for (const char* key : {"trial_id", "stimulus_id", "choice", "fixations", "cleaned_fixations",
                          "durations", "bins", "metrics"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(j["durations"].size() == stim.word_count());
  CHECK(j["bins"].size() == stim.word_count());
}

TEST_CASE("write_file replaces content") {
  std::string pattern = (std::filesystem::temp_directory_path() / "readtrace-io-XXXXXX").string();
  REQUIRE(mkdtemp(pattern.data()) != nullptr);
  const std::filesystem::path dir = pattern;
  write_file(dir / "out.txt", "first");
  write_file(dir / "out.txt", "second");
  CHECK(read_file(dir / "out.txt") == "second");
  CHECK_FALSE(std::filesystem::exists(dir / "out.txt.tmp"));
  CHECK_THROWS_AS(read_file(dir / "missing.txt"), ValidationError);
  std::filesystem::remove_all(dir);
}
