#include "readtrace/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "readtrace/error.hpp"

namespace readtrace {

namespace {

constexpr int kMaxBin = 5;

void append_escaped(std::string& out, std::string_view text) {
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
}

std::string format_opacity(double opacity) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", opacity);
  return buf;
}

std::string format_mean(double mean) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", mean);
  return buf;
}

void render_section(std::string& out, const TokenizedStimulus& stimulus,
                    const AggregateVector& aggregate, Section section, const char* title) {
  out += "<section class=\"";
  out += to_string(section);
  out += "\">\n<h2>";
  out += title;
  out += "</h2>\n<div class=\"text\">";
  const std::string_view text = stimulus.text(section);
  // Byte offset of every code point, plus the end.
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) offsets.push_back(i);
  }
  offsets.push_back(text.size());
  std::size_t cursor = 0;
  for (const Word& w : stimulus.words(section)) {
    append_escaped(out, text.substr(cursor, offsets[w.begin] - cursor));
    const double mean = aggregate.means[w.index];
    out += "<span class=\"w\" data-word=\"" + std::to_string(w.index) + "\" title=\"" +
           format_mean(mean) + "\" style=\"background-color:rgba(200,30,30," +
           format_opacity(heatmap_opacity(mean)) + ")\">";
    append_escaped(out, w.text);
    out += "</span>";
    cursor = offsets[w.end];
  }
  append_escaped(out, text.substr(cursor));
  out += "</div>\n</section>\n";
}

}  // namespace

double heatmap_opacity(double mean_bin) {
  if (!(mean_bin > 0.0)) return 0.0;
  return std::min(1.0, mean_bin / kMaxBin);
}

std::string render_heatmap(const TokenizedStimulus& stimulus, const AggregateVector& aggregate) {
  if (aggregate.means.size() != stimulus.word_count()) {
    throw ValidationError("aggregate has " + std::to_string(aggregate.means.size()) +
                          " words, stimulus '" + stimulus.id() + "' has " +
                          std::to_string(stimulus.word_count()));
  }
  std::string out;
  out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>";
  append_escaped(out, stimulus.id());
  out += "</title>\n<style>\n"
         "body{font-family:Georgia,serif;max-width:72em;margin:2em auto;line-height:1.6}\n"
         ".text{white-space:pre-wrap}\n"
         ".responses{display:flex;gap:2em}\n"
         ".responses section{flex:1}\n"
         ".w{border-radius:2px}\n"
         ".legend span{display:inline-block;padding:0 .6em;margin-right:.3em;border:1px solid #ccc}\n"
         "</style>\n</head>\n<body>\n<h1>";
  append_escaped(out, stimulus.id());
  out += "</h1>\n<p class=\"meta\">participants: " + std::to_string(aggregate.participant_count) +
         "</p>\n<div class=\"legend\">mean bin:";
  for (int bin = 0; bin <= kMaxBin; ++bin) {
    out += " <span style=\"background-color:rgba(200,30,30," + format_opacity(heatmap_opacity(bin)) +
           ")\">" + std::to_string(bin) + "</span>";
  }
  out += "</div>\n";
  render_section(out, stimulus, aggregate, Section::Prompt, "Prompt");
  out += "<div class=\"responses\">\n";
  render_section(out, stimulus, aggregate, Section::ResponseA, "Response A");
  render_section(out, stimulus, aggregate, Section::ResponseB, "Response B");
  out += "</div>\n</body>\n</html>\n";
  return out;
}

}  // namespace readtrace
