#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace readtrace {

// The three texts of a preference item. ResponseA/ResponseB are identities
// that survive the left/right display randomization.
enum class Section : std::uint8_t { Prompt = 0, ResponseA = 1, ResponseB = 2 };

inline constexpr std::array<Section, 3> kAllSections{Section::Prompt, Section::ResponseA,
                                                     Section::ResponseB};

// A section relative to the annotator's decision.
enum class Role : std::uint8_t { Prompt = 0, Chosen = 1, Rejected = 2 };

enum class Layout : std::uint8_t { ALeft, ARight };

enum class Choice : std::uint8_t { None, ResponseA, ResponseB };

enum class Rationale : std::uint8_t { MoreHelpful, MoreAccurate, MoreConcise, LessHarmful, Other };

inline constexpr std::array<Rationale, 5> kAllRationales{
    Rationale::MoreHelpful, Rationale::MoreAccurate, Rationale::MoreConcise,
    Rationale::LessHarmful, Rationale::Other};

constexpr std::size_t index_of(Section s) { return static_cast<std::size_t>(s); }
constexpr std::size_t index_of(Role r) { return static_cast<std::size_t>(r); }

// Wire names: "Prompt", "ResponseA", "ResponseB", "A-left", "MoreHelpful", ...
std::string_view to_string(Section s);
std::string_view to_string(Role r);
std::string_view to_string(Layout l);
std::string_view to_string(Choice c);
std::string_view to_string(Rationale r);

// Parsers throw ValidationError naming the rejected value.
Section parse_section(std::string_view text);
Role parse_role(std::string_view text);
Layout parse_layout(std::string_view text);
Choice parse_choice(std::string_view text);
Rationale parse_rationale(std::string_view text);

// Role of a section once the annotator has chosen. Throws ValidationError for
// Choice::None.
Role role_of(Section section, Choice choice);
Section section_of(Role role, Choice choice);

// The response shown on the left for a layout, and the inverse mapping used
// when a click on a displayed side is turned into a choice.
Section left_section(Layout layout);
Choice choice_for_side(Layout layout, bool left_clicked);

struct Word {
  Section section;
  std::size_t index;  // stimulus-global, document order
  std::size_t begin;  // section-local code point offset, inclusive
  std::size_t end;    // exclusive
  std::string text;
};

// Raw record of the stimulus file, before tokenization.
struct StimulusRecord {
  std::string id;
  std::string prompt;
  std::string response_a;
  std::string response_b;
  std::optional<Section> source_label;  // originally preferred response, if known
};

// A prompt and two responses split into words. Words are maximal runs of
// non-whitespace code points; character indices are section-local code
// point offsets. Immutable after construction.
class TokenizedStimulus {
 public:
  // Throws ValidationError naming the section when a text has no words, or
  // when a text is not valid UTF-8.
  TokenizedStimulus(std::string id, std::string prompt, std::string response_a,
                    std::string response_b, std::optional<Section> source_label = std::nullopt);

  const std::string& id() const { return id_; }
  const std::string& text(Section s) const { return texts_[index_of(s)]; }
  std::optional<Section> source_label() const { return source_label_; }

  std::span<const Word> words() const { return words_; }
  std::span<const Word> words(Section s) const;
  const Word& word(std::size_t index) const { return words_.at(index); }

  std::size_t word_count() const { return words_.size(); }
  std::size_t word_count(Section s) const { return section_count_[index_of(s)]; }
  // Global index of the first word in a section.
  std::size_t first_word(Section s) const { return section_first_[index_of(s)]; }

  // Length of a section in code points.
  std::size_t char_count(Section s) const { return char_to_word_[index_of(s)].size(); }

  // Word containing the character, or nullopt for whitespace. Throws
  // ValidationError when char_index is past the end of the section.
  std::optional<std::size_t> locate_char(Section s, std::size_t char_index) const;

  StimulusRecord record() const;

 private:
  std::string id_;
  std::array<std::string, 3> texts_;
  std::optional<Section> source_label_;
  std::vector<Word> words_;
  std::array<std::size_t, 3> section_first_{};
  std::array<std::size_t, 3> section_count_{};
  std::array<std::vector<std::int32_t>, 3> char_to_word_;  // -1 for whitespace
};

TokenizedStimulus tokenize_stimulus(std::string prompt, std::string response_a,
                                    std::string response_b, std::string id);
TokenizedStimulus tokenize_stimulus(const StimulusRecord& record);

// Number of whitespace-delimited words in an arbitrary text.
std::size_t count_words(std::string_view text);

// Decodes UTF-8 into code points; throws ValidationError on malformed input.
std::vector<char32_t> decode_utf8(std::string_view text);
bool is_unicode_space(char32_t cp);

}  // namespace readtrace
