#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "readtrace/error.hpp"
#include "readtrace/prepare.hpp"
#include "readtrace/random.hpp"
#include "simulator.hpp"

using namespace readtrace;

namespace {

// 100 ordinary pairs, one 10,000-word outlier and one pair of one-liners.
std::vector<SourceItem> source_corpus() {
  Rng rng(21);
  std::vector<SourceItem> out;
  for (std::size_t i = 0; i < 100; ++i) {
    out.push_back(SourceItem{"item-" + std::to_string(i), testkit::random_text(rng, 10 + rng.below(30)),
                             testkit::random_text(rng, 20 + rng.below(150)),
                             testkit::random_text(rng, 20 + rng.below(150))});
  }
  out.push_back(SourceItem{"outlier", testkit::random_text(rng, 20), testkit::random_text(rng, 10000),
                           testkit::random_text(rng, 40)});
  out.push_back(SourceItem{"short", "Human: thanks", "Sounds good.", "No problem"});
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("nearest-rank percentile") {
  const std::vector<std::size_t> v{15, 20, 35, 40, 50};
  CHECK(nearest_rank_percentile(v, 5) == 15);
  CHECK(nearest_rank_percentile(v, 30) == 20);
  CHECK(nearest_rank_percentile(v, 40) == 20);
  CHECK(nearest_rank_percentile(v, 50) == 35);
  CHECK(nearest_rank_percentile(v, 100) == 50);
  CHECK_THROWS_AS(nearest_rank_percentile({}, 50), ValidationError);
  CHECK_THROWS_AS(nearest_rank_percentile(v, 0), ValidationError);
}

TEST_CASE("filters drop the outlier and the one-liners") {
  const auto source = source_corpus();
  const PreparedStimuli p = prepare_stimuli(source, 5, 50);
  const SamplingManifest& m = p.manifest;
  REQUIRE(p.stimuli.size() == 50);
  std::set<std::string> ids;
  for (const auto& s : p.stimuli) ids.insert(s.id);
  CHECK(ids.size() == 50);
  CHECK_FALSE(ids.contains("outlier"));
  CHECK_FALSE(ids.contains("short"));
  CHECK(m.dropped_short == 1);
  CHECK(m.dropped_percentile >= 1);
  CHECK(m.dropped_invalid == 0);
  CHECK(m.source_total == source.size());
  CHECK(m.dropped_invalid + m.dropped_percentile + m.dropped_short + m.not_sampled + m.sampled ==
        m.source_total);

  // Every survivor is at or below the cutoff.
  for (const auto& s : p.stimuli) {
    CHECK(count_words(s.prompt) + count_words(s.response_a) + count_words(s.response_b) <=
          m.percentile_cutoff);
  }
}

TEST_CASE("ten items with one outlier") {
  Rng rng(2);
  std::vector<SourceItem> source;
  for (std::size_t i = 0; i < 9; ++i) {
    source.push_back(SourceItem{"i" + std::to_string(i), testkit::random_text(rng, 15),
                                testkit::random_text(rng, 40 + i), testkit::random_text(rng, 40)});
  }
  source.push_back(SourceItem{"outlier", "Human: tell me everything", testkit::random_text(rng, 10000),
                              testkit::random_text(rng, 40)});
  const PreparedStimuli p = prepare_stimuli(source, 1, 9);
  CHECK(p.manifest.dropped_percentile == 1);
  CHECK(p.manifest.percentile_cutoff == 15 + 48 + 40);
  for (const auto& s : p.stimuli) CHECK(s.id != "outlier");
}

TEST_CASE("a response pair with one long side survives") {
  std::vector<SourceItem> source = source_corpus();
  source.back().chosen = "Sounds good, I will send the file tomorrow.";
  const PreparedStimuli p = prepare_stimuli(source, 5, 50);
  CHECK(p.manifest.dropped_short == 0);
}

TEST_CASE("empty sections are invalid") {
  std::vector<SourceItem> source = source_corpus();
  source.push_back(SourceItem{"blank", "Human: hi", " \n ", "Assistant: hello there friend"});
  const PreparedStimuli p = prepare_stimuli(source, 5, 10);
  CHECK(p.manifest.dropped_invalid == 1);
}

TEST_CASE("sampling is deterministic in the seed") {
  const auto source = source_corpus();
  const auto a = prepare_stimuli(source, 9, 40);
  const auto b = prepare_stimuli(source, 9, 40);
  const auto c = prepare_stimuli(source, 10, 40);
  CHECK(manifest_to_json(a.manifest) == manifest_to_json(b.manifest));
  std::vector<std::string> ia, ib, ic;
  for (const auto& s : a.stimuli) ia.push_back(s.id + s.response_a);
  for (const auto& s : b.stimuli) ib.push_back(s.id + s.response_a);
  for (const auto& s : c.stimuli) ic.push_back(s.id + s.response_a);
  CHECK(ia == ib);
  CHECK(ia != ic);
}

TEST_CASE("source labels follow the chosen response") {
  const auto source = source_corpus();
  const auto p = prepare_stimuli(source, 3, 60);
  std::size_t b_side = 0;
  for (const auto& s : p.stimuli) {
    const auto it = std::find_if(source.begin(), source.end(),
                                 [&](const SourceItem& i) { return i.id == s.id; });
    REQUIRE(it != source.end());
    REQUIRE(s.source_label.has_value());
    const std::string& chosen = *s.source_label == Section::ResponseA ? s.response_a : s.response_b;
    const std::string& rejected = *s.source_label == Section::ResponseA ? s.response_b : s.response_a;
    CHECK(chosen == it->chosen);
    CHECK(rejected == it->rejected);
    b_side += *s.source_label == Section::ResponseB;
  }
  CHECK(b_side > 0);
  CHECK(b_side < 60);
}

TEST_CASE("length statistics are recomputed from the sample") {
  const auto p = prepare_stimuli(source_corpus(), 4, 30);
  std::vector<double> chosen, total;
  for (const auto& s : p.stimuli) {
    const std::string& c = *s.source_label == Section::ResponseA ? s.response_a : s.response_b;
    chosen.push_back(static_cast<double>(count_words(c)));
    total.push_back(static_cast<double>(count_words(s.prompt) + count_words(s.response_a) +
                                        count_words(s.response_b)));
  }
  CHECK(p.manifest.chosen.mean == doctest::Approx(mean_of(chosen)).epsilon(1e-12));
  CHECK(p.manifest.total.mean == doctest::Approx(mean_of(total)).epsilon(1e-12));
  CHECK(p.manifest.total.max == static_cast<std::size_t>(*std::max_element(total.begin(), total.end())));
  double ss = 0.0;
  const double m = mean_of(chosen);
  for (double x : chosen) ss += (x - m) * (x - m);
  CHECK(p.manifest.chosen.sd == doctest::Approx(std::sqrt(ss / 29.0)).epsilon(1e-12));
  CHECK(render_length_table(p.manifest).find("chosen") != std::string::npos);
}

TEST_CASE("asking for more than survives reports the available count") {
  const auto source = source_corpus();
  const auto all = prepare_stimuli(source, 1, 1).manifest;
  const std::size_t available = all.sampled + all.not_sampled;
  try {
    prepare_stimuli(source, 1, available + 1);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("only " + std::to_string(available)) != std::string::npos);
  }
  CHECK(prepare_stimuli(source, 1, available).stimuli.size() == available);
}

TEST_CASE("source lines") {
  std::istringstream in("{\"prompt\":\"a\",\"chosen\":\"b\",\"rejected\":\"c\"}\n"
                        "\n"
                        "{\"id\":7,\"prompt\":\"a\",\"chosen\":\"b\",\"rejected\":\"c\"}\n");
  const auto items = read_source(in);
  REQUIRE(items.size() == 2);
  CHECK(items[0].id == "src-000001");
  CHECK(items[1].id == "7");
  std::istringstream bad("{\"prompt\":\"a\",\"chosen\":\"b\"}\n");
  CHECK_THROWS_AS(read_source(bad), ValidationError);
}
