#pragma once

// ABC notation front end: splits a source text into tune blocks and flattens
// a tune body onto a grid of equal-length quaver symbols.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tunelz/rational.hpp"

namespace tunelz {

enum class Category { reel, jig, other };

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::reel: return "reel";
    case Category::jig: return "jig";
    case Category::other: return "other";
  }
  return "other";
}

/// Case-insensitive "reel" / "jig"; anything else is Category::other.
inline Category category_from_string(std::string_view s) {
  std::string lower;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (lower == "reel") return Category::reel;
  if (lower == "jig") return Category::jig;
  return Category::other;
}

namespace abc {

/// The 14 pitch letters of the two-octave range.
inline constexpr std::string_view pitch_alphabet = "abcdefgABCDEFG";

constexpr bool is_pitch_letter(char c) { return pitch_alphabet.find(c) != std::string_view::npos; }

/// Quaver grid lengths of standard two-part tunes.
inline constexpr std::size_t reel_length = 128;
inline constexpr std::size_t jig_length = 96;

struct Meter {
  int numerator = 4;
  int denominator = 4;

  Rational value() const { return {numerator, denominator}; }
  friend bool operator==(const Meter&, const Meter&) = default;
};

struct AbcTune {
  int reference_number = 0;
  std::string title;
  std::optional<Meter> meter;  // absent for free meter or a missing M: line
  Rational unit_note_length{1, 8};
  std::string key;
  std::string rhythm;  // R: field, empty when absent
  std::string body;
  std::vector<std::pair<char, std::string>> other_fields;
};

enum class ErrorKind { out_of_range_note, non_quaver_duration, wrong_length, unsupported_construct, malformed_header };

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::out_of_range_note: return "OutOfRangeNote";
    case ErrorKind::non_quaver_duration: return "NonQuaverDuration";
    case ErrorKind::wrong_length: return "WrongLength";
    case ErrorKind::unsupported_construct: return "UnsupportedConstruct";
    case ErrorKind::malformed_header: return "MalformedHeader";
  }
  return "Unknown";
}

struct NormalizationError {
  ErrorKind kind;
  std::string detail;
  std::size_t location = 0;  // offset into the tune body (into the source for header errors)

  std::string message() const {
    return std::string(to_string(kind)) + " at " + std::to_string(location) + ": " + detail;
  }
};

class AbcParseError : public std::runtime_error {
 public:
  explicit AbcParseError(NormalizationError e) : std::runtime_error(e.message()), error_(std::move(e)) {}
  const NormalizationError& error() const { return error_; }

 private:
  NormalizationError error_;
};

struct QuaverSequence {
  std::string symbols;
  Category category = Category::other;

  std::size_t size() const { return symbols.size(); }
};

/// How the two octaves are spelled in the output alphabet.
enum class OctaveCase {
  lower_is_low,  // low octave in lowercase, as in the reference tables
  abc,           // keep ABC spelling: low octave uppercase
};

struct NormalizeOptions {
  bool require_standard_length = true;
  OctaveCase octave_case = OctaveCase::lower_is_low;
};

using ParsedBlock = std::variant<AbcTune, NormalizationError>;
using NormalizeResult = std::variant<QuaverSequence, NormalizationError>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool is_field_line(std::string_view line) {
  return line.size() >= 2 && std::isalpha(static_cast<unsigned char>(line[0])) && line[1] == ':';
}

// Inside a body, A-G and a-g followed by ':' are notes before a repeat sign.
inline bool is_body_field_line(std::string_view line) {
  return is_field_line(line) && std::string_view("ABCDEFGabcdefg").find(line[0]) == std::string_view::npos;
}

inline std::optional<int> parse_int(std::string_view s) {
  s = trim(s);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::pair<int, int>> parse_fraction(std::string_view s) {
  s = trim(s);
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto n = parse_int(s.substr(0, slash));
  auto d = parse_int(s.substr(slash + 1));
  if (!n || !d || *n <= 0 || *d <= 0) return std::nullopt;
  return std::pair{*n, *d};
}

struct Line {
  std::string_view text;
  std::size_t offset;
};

inline std::vector<Line> split_lines(std::string_view src) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos < src.size()) {
    auto nl = src.find('\n', pos);
    if (nl == std::string_view::npos) nl = src.size();
    auto text = src.substr(pos, nl - pos);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    lines.push_back({text, pos});
    pos = nl + 1;
  }
  return lines;
}

inline std::string_view strip_comment(std::string_view line) {
  auto pct = line.find('%');
  return pct == std::string_view::npos ? line : line.substr(0, pct);
}

inline NormalizationError header_error(std::string detail, const Line& line) {
  return {ErrorKind::malformed_header, std::move(detail) + ": \"" + std::string(line.text) + "\"", line.offset};
}

// Parses one block given its lines; the first line is the X: line (or the
// first line of a preamble that contains a K: field but no X:).
inline ParsedBlock parse_block(std::string_view src, const std::vector<Line>& lines, std::size_t first,
                               std::size_t last) {
  AbcTune tune;
  const Line& xline = lines[first];
  if (!(trim(xline.text).starts_with("X:"))) return header_error("tune block lacks an X: field", xline);
  auto ref = parse_int(trim(xline.text).substr(2));
  if (!ref) return header_error("X: field is not an integer", xline);
  tune.reference_number = *ref;

  std::size_t i = first + 1;
  bool have_key = false;
  for (; i < last; ++i) {
    const Line& line = lines[i];
    auto text = trim(strip_comment(line.text));
    if (text.empty()) {
      if (trim(line.text).starts_with("%")) continue;
      return header_error("blank line before K: field", line);
    }
    if (!is_field_line(text)) return header_error("music before K: field", line);
    const char field = text[0];
    const auto value = trim(text.substr(2));
    switch (field) {
      case 'T':
        if (tune.title.empty()) tune.title = std::string(value);
        else tune.other_fields.emplace_back(field, std::string(value));
        break;
      case 'M':
        if (value == "C") tune.meter = Meter{4, 4};
        else if (value == "C|") tune.meter = Meter{2, 2};
        else if (value == "none") tune.meter.reset();
        else if (auto f = parse_fraction(value)) tune.meter = Meter{f->first, f->second};
        else return header_error("unparseable M: field", line);
        break;
      case 'L': {
        auto f = parse_fraction(value);
        if (!f || f->first > f->second) return header_error("unit note length must be a positive fraction <= 1", line);
        tune.unit_note_length = Rational(f->first, f->second);
        break;
      }
      case 'R': tune.rhythm = std::string(value); break;
      case 'K':
        tune.key = std::string(value);
        have_key = true;
        break;
      default: tune.other_fields.emplace_back(field, std::string(value)); break;
    }
    if (have_key) break;
  }
  if (!have_key) return header_error("tune block lacks a K: field", xline);

  const std::size_t body_begin = (i + 1 < last) ? lines[i + 1].offset : (last < lines.size() ? lines[last].offset : src.size());
  const std::size_t body_end = last < lines.size() ? lines[last].offset : src.size();
  tune.body = std::string(src.substr(body_begin, body_end - body_begin));
  return tune;
}

}  // namespace detail

/// Splits `source` into tune blocks. Malformed blocks are reported in place
/// so that one bad tune does not hide the others.
inline std::vector<ParsedBlock> parse_abc_blocks(std::string_view source) {
  using namespace detail;
  std::vector<ParsedBlock> blocks;
  const auto lines = split_lines(source);
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i].text).starts_with("X:")) starts.push_back(i);
  }

  // Free text before the first X: is a file header, unless it carries a K:
  // field, in which case it is a tune with a missing X:.
  const std::size_t preamble_end = starts.empty() ? lines.size() : starts.front();
  for (std::size_t i = 0; i < preamble_end; ++i) {
    if (trim(lines[i].text).starts_with("K:")) {
      blocks.emplace_back(header_error("tune block lacks an X: field", lines[i]));
      break;
    }
  }

  for (std::size_t b = 0; b < starts.size(); ++b) {
    const std::size_t last = b + 1 < starts.size() ? starts[b + 1] : lines.size();
    blocks.push_back(parse_block(source, lines, starts[b], last));
  }
  return blocks;
}

/// All tunes in `source`, in order. Throws AbcParseError on the first
/// malformed block.
inline std::vector<AbcTune> parse_abc(std::string_view source) {
  std::vector<AbcTune> tunes;
  for (auto& block : parse_abc_blocks(source)) {
    if (auto* err = std::get_if<NormalizationError>(&block)) throw AbcParseError(*err);
    tunes.push_back(std::get<AbcTune>(std::move(block)));
  }
  return tunes;
}

namespace detail {

enum class BarKind { plain, section_end, repeat_start, repeat_end, repeat_both };

struct NoteEvent {
  char symbol;
  Rational duration;  // in units of L
  std::size_t offset;
};

struct BarEvent {
  BarKind kind;
  std::size_t offset;
};

struct EndingEvent {
  int number;
  std::size_t offset;
};

using Event = std::variant<NoteEvent, BarEvent, EndingEvent>;

class BodyLexer {
 public:
  BodyLexer(std::string_view body, OctaveCase octave_case) : body_(body), octave_case_(octave_case) {}

  std::variant<std::vector<Event>, NormalizationError> run() {
    while (pos_ < body_.size()) {
      if (auto err = step()) return *std::move(err);
    }
    if (pending_broken_) return fail(ErrorKind::unsupported_construct, "broken rhythm at end of tune", pos_);
    return std::move(events_);
  }

 private:
  using MaybeError = std::optional<NormalizationError>;

  static NormalizationError fail(ErrorKind k, std::string detail, std::size_t at) { return {k, std::move(detail), at}; }

  char peek(std::size_t ahead = 0) const { return pos_ + ahead < body_.size() ? body_[pos_ + ahead] : '\0'; }

  bool at_line_start() const { return pos_ == 0 || body_[pos_ - 1] == '\n'; }

  // Skips to the matching `close`; returns false if the input ends first.
  bool skip_delimited(char close) {
    auto end = body_.find(close, pos_ + 1);
    if (end == std::string_view::npos) return false;
    pos_ = end + 1;
    return true;
  }

  MaybeError field(char name, std::size_t at) {
    if (name == 'V') return fail(ErrorKind::unsupported_construct, "voice change", at);
    if (name == 'M' || name == 'L') {
      return fail(ErrorKind::unsupported_construct, std::string("mid-tune ") + name + ": change", at);
    }
    return std::nullopt;
  }

  MaybeError step() {
    const std::size_t at = pos_;
    const char c = peek();

    if (at_line_start()) {
      auto line_end = body_.find('\n', pos_);
      if (line_end == std::string_view::npos) line_end = body_.size();
      if (is_body_field_line(body_.substr(pos_, line_end - pos_))) {
        if (auto err = field(c, at)) return err;
        pos_ = line_end;
        return std::nullopt;
      }
    }

    if (std::isspace(static_cast<unsigned char>(c)) || c == '\\' || c == '`' || c == 'y' || c == '-' || c == ')') {
      ++pos_;
      return std::nullopt;
    }
    switch (c) {
      case '%': {
        auto nl = body_.find('\n', pos_);
        pos_ = nl == std::string_view::npos ? body_.size() : nl;
        return std::nullopt;
      }
      case '~': case '.': case 'H': case 'T': case 'u': case 'v':
        ++pos_;
        return std::nullopt;
      case '{':
        if (!skip_delimited('}')) return fail(ErrorKind::unsupported_construct, "unterminated grace notes", at);
        return std::nullopt;
      case '"':
        if (!skip_delimited('"')) return fail(ErrorKind::unsupported_construct, "unterminated annotation", at);
        return std::nullopt;
      case '!':
      case '+':
        if (!skip_delimited(c)) return fail(ErrorKind::unsupported_construct, "unterminated decoration", at);
        return std::nullopt;
      case '(':
        if (std::isdigit(static_cast<unsigned char>(peek(1)))) {
          return fail(ErrorKind::non_quaver_duration, "tuplet group", at);
        }
        ++pos_;  // slur
        return std::nullopt;
      case 'z': case 'x': case 'Z': case 'X':
        return fail(ErrorKind::unsupported_construct, "rest", at);
      case '&':
        return fail(ErrorKind::unsupported_construct, "voice overlay", at);
      case '>':
      case '<':
        return broken_rhythm();
      case '[':
        return bracket();
      case '|':
      case ':':
        return bar_line();
      default:
        break;
    }
    if (c == '^' || c == '_' || c == '=' || (std::isalpha(static_cast<unsigned char>(c)) && std::string_view("ABCDEFGabcdefg").find(c) != std::string_view::npos)) {
      return note();
    }
    return fail(ErrorKind::unsupported_construct, std::string("unexpected character '") + c + "'", at);
  }

  MaybeError note() {
    const std::size_t at = pos_;
    while (peek() == '^' || peek() == '_' || peek() == '=') ++pos_;
    const char letter = peek();
    if (std::string_view("ABCDEFGabcdefg").find(letter) == std::string_view::npos || letter == '\0') {
      return fail(ErrorKind::unsupported_construct, "accidental without a note", at);
    }
    ++pos_;
    int octave = std::islower(static_cast<unsigned char>(letter)) ? 1 : 0;
    while (peek() == '\'' || peek() == ',') {
      octave += peek() == '\'' ? 1 : -1;
      ++pos_;
    }
    if (octave < 0 || octave > 1) {
      return fail(ErrorKind::out_of_range_note, "pitch outside the two-octave range", at);
    }

    std::int64_t num = 1;
    std::int64_t den = 1;
    if (std::isdigit(static_cast<unsigned char>(peek()))) num = read_number();
    while (peek() == '/') {
      ++pos_;
      den *= std::isdigit(static_cast<unsigned char>(peek())) ? read_number() : 2;
    }
    if (num == 0 || den == 0) return fail(ErrorKind::non_quaver_duration, "zero-length note", at);

    const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
    const bool lower_out = (octave == 0) == (octave_case_ == OctaveCase::lower_is_low);
    const char symbol = lower_out ? static_cast<char>(std::tolower(static_cast<unsigned char>(upper))) : upper;

    Rational duration(num, den);
    if (pending_broken_) {
      duration = duration * *pending_broken_;
      pending_broken_.reset();
    }
    events_.push_back(NoteEvent{symbol, duration, at});
    return std::nullopt;
  }

  std::int64_t read_number() {
    std::int64_t v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (peek() - '0');
      if (v > 1'000'000) v = 1'000'000;
      ++pos_;
    }
    return v;
  }

  MaybeError broken_rhythm() {
    const std::size_t at = pos_;
    const char dir = peek();
    int n = 0;
    while (peek() == dir) {
      ++n;
      ++pos_;
    }
    if (events_.empty() || !std::holds_alternative<NoteEvent>(events_.back()) || n > 3) {
      return fail(ErrorKind::unsupported_construct, "broken rhythm without a preceding note", at);
    }
    const Rational shortened(1, std::int64_t{1} << n);
    const Rational lengthened = Rational(2) + Rational(-1, std::int64_t{1} << n);
    auto& prev = std::get<NoteEvent>(events_.back());
    prev.duration = prev.duration * (dir == '>' ? lengthened : shortened);
    pending_broken_ = dir == '>' ? shortened : lengthened;
    return std::nullopt;
  }

  MaybeError bracket() {
    const std::size_t at = pos_;
    const char next = peek(1);
    if (next == '|') return bar_line();
    if (std::isdigit(static_cast<unsigned char>(next))) {
      ++pos_;
      return ending(at);
    }
    if (std::isalpha(static_cast<unsigned char>(next)) && peek(2) == ':') {
      if (auto err = field(next, at)) return err;
      if (!skip_delimited(']')) return fail(ErrorKind::unsupported_construct, "unterminated inline field", at);
      return std::nullopt;
    }
    return fail(ErrorKind::unsupported_construct, "chord", at);
  }

  MaybeError ending(std::size_t at) {
    const auto n = read_number();
    if (peek() == ',' || peek() == '-' || (n != 1 && n != 2)) {
      return fail(ErrorKind::unsupported_construct, "only first and second endings are supported", at);
    }
    if (pending_broken_) return fail(ErrorKind::unsupported_construct, "broken rhythm across a bar line", at);
    events_.push_back(EndingEvent{static_cast<int>(n), at});
    return std::nullopt;
  }

  MaybeError bar_line() {
    const std::size_t at = pos_;
    std::string run;
    while (peek() == '|' || peek() == ':' || peek() == ']' || (peek() == '[' && peek(1) == '|')) {
      run += peek();
      ++pos_;
    }
    if (pending_broken_) return fail(ErrorKind::unsupported_construct, "broken rhythm across a bar line", at);

    if (run.find_first_of("|[]") == std::string::npos) {
      if (run == "::") {
        events_.push_back(BarEvent{BarKind::repeat_both, at});
        return std::nullopt;
      }
      return fail(ErrorKind::unsupported_construct, "stray ':'", at);
    }
    const bool closes = run.front() == ':';
    const bool opens = run.back() == ':';
    const auto bars = run.size() - static_cast<std::size_t>(std::count(run.begin(), run.end(), ':'));

    BarKind kind = BarKind::plain;
    if (closes && opens) kind = BarKind::repeat_both;
    else if (closes) kind = BarKind::repeat_end;
    else if (opens) kind = BarKind::repeat_start;
    else if (bars > 1) kind = BarKind::section_end;
    events_.push_back(BarEvent{kind, at});

    if (std::isdigit(static_cast<unsigned char>(peek()))) return ending(pos_);
    if (peek() == '[' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      ++pos_;
      return ending(pos_ - 1);
    }
    return std::nullopt;
  }

  std::string_view body_;
  OctaveCase octave_case_;
  std::size_t pos_ = 0;
  std::vector<Event> events_;
  std::optional<Rational> pending_broken_;
};

// Writes the repeat structure out in full: |: A |1 B :|2 C  ->  A B A C.
inline std::variant<std::vector<NoteEvent>, NormalizationError> expand_repeats(const std::vector<Event>& events) {
  std::vector<NoteEvent> out;
  std::size_t section_start = 0;
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::size_t first_ending = none;

  auto replay = [&](std::size_t from, std::size_t to) {
    for (std::size_t j = from; j < to; ++j) {
      if (auto* n = std::get_if<NoteEvent>(&events[j])) out.push_back(*n);
    }
  };

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (auto* n = std::get_if<NoteEvent>(&e)) {
      out.push_back(*n);
    } else if (auto* end = std::get_if<EndingEvent>(&e)) {
      if (end->number == 1) {
        if (first_ending != none) return NormalizationError{ErrorKind::unsupported_construct, "repeated first ending", end->offset};
        first_ending = i;
      }
    } else {
      const auto& bar = std::get<BarEvent>(e);
      switch (bar.kind) {
        case BarKind::plain: break;
        case BarKind::section_end:
          if (first_ending == none) section_start = i + 1;
          break;
        case BarKind::repeat_start: section_start = i + 1; break;
        case BarKind::repeat_end:
        case BarKind::repeat_both:
          replay(section_start, first_ending == none ? i : first_ending);
          first_ending = none;
          section_start = i + 1;
          break;
      }
    }
  }
  if (first_ending != none) {
    return NormalizationError{ErrorKind::unsupported_construct, "first ending without a closing repeat",
                              std::get<EndingEvent>(events[first_ending]).offset};
  }
  return out;
}

}  // namespace detail

/// Flattens a tune body onto the quaver grid. Every note of k quavers becomes
/// k copies of its pitch letter; accidentals, ornaments and bar lines vanish.
inline NormalizeResult normalize(const AbcTune& tune, const NormalizeOptions& options = {}) {
  detail::BodyLexer lexer(tune.body, options.octave_case);
  auto lexed = lexer.run();
  if (auto* err = std::get_if<NormalizationError>(&lexed)) return *err;

  auto expanded = detail::expand_repeats(std::get<std::vector<detail::Event>>(lexed));
  if (auto* err = std::get_if<NormalizationError>(&expanded)) return *err;

  QuaverSequence seq;
  const Rational quaver(1, 8);
  for (const auto& note : std::get<std::vector<detail::NoteEvent>>(expanded)) {
    const Rational quavers = tune.unit_note_length * note.duration / quaver;
    if (!quavers.is_integer() || quavers.num() < 1) {
      return NormalizationError{ErrorKind::non_quaver_duration,
                                "duration of " + quavers.str() + " quavers is not a whole number", note.offset};
    }
    seq.symbols.append(static_cast<std::size_t>(quavers.num()), note.symbol);
  }

  const bool common_time = tune.meter && tune.meter->value() == Rational(1) && tune.meter->denominator == 4;
  const bool six_eight = tune.meter && tune.meter->numerator == 6 && tune.meter->denominator == 8;
  if (common_time && seq.size() == reel_length) seq.category = Category::reel;
  else if (six_eight && seq.size() == jig_length) seq.category = Category::jig;
  else if (options.require_standard_length) {
    std::string meter = tune.meter ? std::to_string(tune.meter->numerator) + "/" + std::to_string(tune.meter->denominator) : "none";
    return NormalizationError{ErrorKind::wrong_length,
                              std::to_string(seq.size()) + " quavers in meter " + meter +
                                  " (standard lengths: 128 in 4/4, 96 in 6/8)",
                              tune.body.size()};
  }
  return seq;
}

}  // namespace abc
}  // namespace tunelz
