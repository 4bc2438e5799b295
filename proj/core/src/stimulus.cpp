#include "readtrace/stimulus.hpp"

#include <utility>

#include "readtrace/error.hpp"

namespace readtrace {

namespace {

constexpr std::array<std::string_view, 3> kSectionNames{"Prompt", "ResponseA", "ResponseB"};
constexpr std::array<std::string_view, 3> kRoleNames{"prompt", "chosen", "rejected"};
constexpr std::array<std::string_view, 5> kRationaleNames{"MoreHelpful", "MoreAccurate",
                                                          "MoreConcise", "LessHarmful", "Other"};

template <typename Enum, std::size_t N>
Enum parse_named(std::string_view text, const std::array<std::string_view, N>& names,
                 std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) return static_cast<Enum>(i);
  }
  throw ValidationError("unknown " + std::string(what) + " '" + std::string(text) + "'");
}

// Code point boundaries alongside the decoded text, so surfaces can be cut
// from the original bytes.
struct Decoded {
  std::vector<char32_t> points;
  std::vector<std::size_t> byte_offsets;  // size points + 1
};

Decoded decode_with_offsets(std::string_view text, std::string_view label) {
  Decoded out;
  out.points.reserve(text.size());
  out.byte_offsets.reserve(text.size() + 1);
  std::size_t i = 0;
  const auto bad = [&] {
    throw ValidationError("invalid UTF-8 in " + std::string(label) + " at byte " +
                          std::to_string(i));
  };
  while (i < text.size()) {
    out.byte_offsets.push_back(i);
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      cp = lead & 0x1F;
      extra = 1;
    } else if ((lead & 0xF0) == 0xE0) {
      cp = lead & 0x0F;
      extra = 2;
    } else if ((lead & 0xF8) == 0xF0) {
      cp = lead & 0x07;
      extra = 3;
    } else {
      bad();
    }
    if (i + extra >= text.size() && extra > 0) bad();
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont & 0xC0) != 0x80) bad();
      cp = (cp << 6) | (cont & 0x3F);
    }
    // Overlong forms and surrogates.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      bad();
    }
    out.points.push_back(cp);
    i += extra + 1;
  }
  out.byte_offsets.push_back(text.size());
  return out;
}

}  // namespace

std::string_view to_string(Section s) { return kSectionNames[index_of(s)]; }
std::string_view to_string(Role r) { return kRoleNames[index_of(r)]; }

std::string_view to_string(Layout l) { return l == Layout::ALeft ? "A-left" : "A-right"; }

std::string_view to_string(Choice c) {
  switch (c) {
    case Choice::ResponseA: return "ResponseA";
    case Choice::ResponseB: return "ResponseB";
    case Choice::None: break;
  }
  return "none";
}

std::string_view to_string(Rationale r) { return kRationaleNames[static_cast<std::size_t>(r)]; }

Section parse_section(std::string_view text) {
  return parse_named<Section>(text, kSectionNames, "section");
}

Role parse_role(std::string_view text) { return parse_named<Role>(text, kRoleNames, "role"); }

Layout parse_layout(std::string_view text) {
  if (text == "A-left") return Layout::ALeft;
  if (text == "A-right") return Layout::ARight;
  throw ValidationError("unknown layout '" + std::string(text) + "'");
}

Choice parse_choice(std::string_view text) {
  if (text == "ResponseA") return Choice::ResponseA;
  if (text == "ResponseB") return Choice::ResponseB;
  if (text == "none") return Choice::None;
  throw ValidationError("unknown choice '" + std::string(text) + "'");
}

Rationale parse_rationale(std::string_view text) {
  return parse_named<Rationale>(text, kRationaleNames, "rationale");
}

Role role_of(Section section, Choice choice) {
  if (section == Section::Prompt) return Role::Prompt;
  if (choice == Choice::None) throw ValidationError("role requested for a trial without a choice");
  const bool chosen = (section == Section::ResponseA) == (choice == Choice::ResponseA);
  return chosen ? Role::Chosen : Role::Rejected;
}

Section section_of(Role role, Choice choice) {
  if (role == Role::Prompt) return Section::Prompt;
  if (choice == Choice::None) throw ValidationError("role requested for a trial without a choice");
  const bool a = (role == Role::Chosen) == (choice == Choice::ResponseA);
  return a ? Section::ResponseA : Section::ResponseB;
}

Section left_section(Layout layout) {
  return layout == Layout::ALeft ? Section::ResponseA : Section::ResponseB;
}

Choice choice_for_side(Layout layout, bool left_clicked) {
  const Section left = left_section(layout);
  const Section picked =
      left_clicked ? left : (left == Section::ResponseA ? Section::ResponseB : Section::ResponseA);
  return picked == Section::ResponseA ? Choice::ResponseA : Choice::ResponseB;
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::vector<char32_t> decode_utf8(std::string_view text) {
  return decode_with_offsets(text, "text").points;
}

std::size_t count_words(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char32_t cp : decode_utf8(text)) {
    const bool space = is_unicode_space(cp);
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

TokenizedStimulus::TokenizedStimulus(std::string id, std::string prompt, std::string response_a,
                                     std::string response_b, std::optional<Section> source_label)
    : id_(std::move(id)),
      texts_{std::move(prompt), std::move(response_a), std::move(response_b)},
      source_label_(source_label) {
  for (Section s : kAllSections) {
    const std::size_t si = index_of(s);
    const Decoded decoded = decode_with_offsets(texts_[si], to_string(s));
    auto& map = char_to_word_[si];
    map.assign(decoded.points.size(), -1);
    section_first_[si] = words_.size();

    std::size_t pos = 0;
    const std::size_t n = decoded.points.size();
    while (pos < n) {
      if (is_unicode_space(decoded.points[pos])) {
        ++pos;
        continue;
      }
      std::size_t end = pos;
      while (end < n && !is_unicode_space(decoded.points[end])) ++end;
      const std::size_t global = words_.size();
      const std::size_t b0 = decoded.byte_offsets[pos];
      const std::size_t b1 = decoded.byte_offsets[end];
      words_.push_back(Word{s, global, pos, end, texts_[si].substr(b0, b1 - b0)});
      for (std::size_t c = pos; c < end; ++c) map[c] = static_cast<std::int32_t>(global);
      pos = end;
    }
    section_count_[si] = words_.size() - section_first_[si];
    if (section_count_[si] == 0) {
      throw ValidationError("section " + std::string(to_string(s)) + " of stimulus '" + id_ +
                            "' is empty");
    }
  }
}

std::span<const Word> TokenizedStimulus::words(Section s) const {
  return std::span<const Word>(words_).subspan(section_first_[index_of(s)],
                                               section_count_[index_of(s)]);
}

std::optional<std::size_t> TokenizedStimulus::locate_char(Section s, std::size_t char_index) const {
  const auto& map = char_to_word_[index_of(s)];
  if (char_index >= map.size()) {
    throw ValidationError("character index " + std::to_string(char_index) + " out of range for " +
                          std::string(to_string(s)) + " (length " + std::to_string(map.size()) +
                          ")");
  }
  const std::int32_t w = map[char_index];
  if (w < 0) return std::nullopt;
  return static_cast<std::size_t>(w);
}

StimulusRecord TokenizedStimulus::record() const {
  return StimulusRecord{id_, texts_[0], texts_[1], texts_[2], source_label_};
}

TokenizedStimulus tokenize_stimulus(std::string prompt, std::string response_a,
                                    std::string response_b, std::string id) {
  return TokenizedStimulus(std::move(id), std::move(prompt), std::move(response_a),
                           std::move(response_b));
}

TokenizedStimulus tokenize_stimulus(const StimulusRecord& record) {
  return TokenizedStimulus(record.id, record.prompt, record.response_a, record.response_b,
                           record.source_label);
}

}  // namespace readtrace
