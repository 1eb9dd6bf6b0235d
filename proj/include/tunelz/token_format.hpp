#pragma once

// Text and JSON forms of character token streams.
//
// Text: space-separated tokens. LZ77 literals are bare letters and
// back-references are `[start,length]`; LZ78 tokens are `<phrase><letter>`,
// with a bare letter for phrase 0 and a bare number for a final token that
// has no extension (e.g. `g 1d 1b b 3D ... 31`).

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tunelz/lz.hpp"

namespace tunelz::lz {

class TokenFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `index_base` shifts displayed LZ77 positions (1 reproduces the
/// hand-numbered tables); LZ78 phrase numbers are always counted from 1.
inline std::string to_text(const Lz77Token<char>& tok, std::size_t index_base = 0) {
  if (const auto* lit = std::get_if<Literal<char>>(&tok)) return std::string(1, lit->symbol);
  const auto& ref = std::get<BackRef>(tok);
  return "[" + std::to_string(ref.start + index_base) + "," + std::to_string(ref.length) + "]";
}

inline std::string to_text(const Lz78Token<char>& tok) {
  std::string s = tok.prefix == 0 && tok.extension ? "" : std::to_string(tok.prefix);
  if (tok.extension) s += *tok.extension;
  return s;
}

inline std::string to_text(const TokenStream<char>& stream, std::size_t index_base = 0) {
  std::string out;
  auto sep = [&] {
    if (!out.empty()) out += ' ';
  };
  if (stream.algorithm() == Algorithm::lz77) {
    for (const auto& t : stream.lz77()) {
      sep();
      out += to_text(t, index_base);
    }
  } else {
    for (const auto& t : stream.lz78()) {
      sep();
      out += to_text(t);
    }
  }
  return out;
}

namespace detail {

inline std::size_t read_index(std::string_view s, std::size_t& pos) {
  if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) {
    throw TokenFormatError("expected a number at column " + std::to_string(pos));
  }
  std::size_t v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) v = v * 10 + static_cast<std::size_t>(s[pos++] - '0');
  return v;
}

inline void skip_spaces(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
}

inline bool is_symbol(char c) {
  return !std::isspace(static_cast<unsigned char>(c)) && !std::isdigit(static_cast<unsigned char>(c)) && c != '[' &&
         c != ']' && c != ',';
}

}  // namespace detail

/// Parses the text form written by to_text.
inline TokenStream<char> parse_text(std::string_view text, Algorithm algo, std::size_t index_base = 0) {
  using namespace detail;
  std::size_t pos = 0;
  TokenStream<char> stream;
  if (algo == Algorithm::lz77) {
    std::vector<Lz77Token<char>> toks;
    for (skip_spaces(text, pos); pos < text.size(); skip_spaces(text, pos)) {
      if (text[pos] == '[') {
        ++pos;
        skip_spaces(text, pos);
        const auto start = read_index(text, pos);
        skip_spaces(text, pos);
        if (pos >= text.size() || text[pos] != ',') throw TokenFormatError("expected ',' in back-reference");
        ++pos;
        skip_spaces(text, pos);
        const auto length = read_index(text, pos);
        skip_spaces(text, pos);
        if (pos >= text.size() || text[pos] != ']') throw TokenFormatError("expected ']' in back-reference");
        ++pos;
        if (start < index_base) throw TokenFormatError("position below index base");
        toks.emplace_back(BackRef{start - index_base, length});
      } else if (is_symbol(text[pos])) {
        toks.emplace_back(Literal<char>{text[pos++]});
      } else {
        throw TokenFormatError("unexpected character '" + std::string(1, text[pos]) + "' in LZ77 stream");
      }
    }
    stream.tokens = std::move(toks);
  } else {
    std::vector<Lz78Token<char>> toks;
    for (skip_spaces(text, pos); pos < text.size(); skip_spaces(text, pos)) {
      Lz78Token<char> tok{0, std::nullopt};
      if (std::isdigit(static_cast<unsigned char>(text[pos]))) tok.prefix = read_index(text, pos);
      if (pos < text.size() && is_symbol(text[pos])) tok.extension = text[pos++];
      else if (tok.prefix == 0) throw TokenFormatError("LZ78 token with neither phrase nor symbol");
      if (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) {
        throw TokenFormatError("LZ78 tokens must be separated by spaces");
      }
      toks.push_back(tok);
    }
    stream.tokens = std::move(toks);
  }
  // The text form carries no length; recompute it from the tokens.
  std::size_t n = 0;
  if (algo == Algorithm::lz77) {
    for (const auto& t : stream.lz77()) n += std::holds_alternative<BackRef>(t) ? std::get<BackRef>(t).length : 1;
  } else {
    std::vector<std::size_t> phrase_len{0};
    for (const auto& t : stream.lz78()) {
      if (t.prefix >= phrase_len.size()) throw CorruptStream("phrase index " + std::to_string(t.prefix) + " not yet defined");
      n += phrase_len[t.prefix] + (t.extension ? 1 : 0);
      if (t.extension) phrase_len.push_back(phrase_len[t.prefix] + 1);
    }
  }
  stream.source_length = n;
  return stream;
}

inline nlohmann::json to_json(const TokenStream<char>& stream) {
  nlohmann::json tokens = nlohmann::json::array();
  if (stream.algorithm() == Algorithm::lz77) {
    for (const auto& t : stream.lz77()) {
      if (const auto* lit = std::get_if<Literal<char>>(&t)) tokens.push_back({{"literal", std::string(1, lit->symbol)}});
      else tokens.push_back({{"start", std::get<BackRef>(t).start}, {"length", std::get<BackRef>(t).length}});
    }
  } else {
    for (const auto& t : stream.lz78()) {
      nlohmann::json j{{"prefix", t.prefix}};
      if (t.extension) j["extension"] = std::string(1, *t.extension);
      tokens.push_back(std::move(j));
    }
  }
  return {{"algorithm", std::string(to_string(stream.algorithm()))},
          {"source_length", stream.source_length},
          {"tokens", std::move(tokens)}};
}

inline TokenStream<char> stream_from_json(const nlohmann::json& j) {
  auto one_char = [](const nlohmann::json& v) {
    const auto s = v.get<std::string>();
    if (s.size() != 1) throw TokenFormatError("symbol must be a single character: \"" + s + "\"");
    return s[0];
  };
  try {
    TokenStream<char> stream;
    stream.source_length = j.at("source_length").get<std::size_t>();
    const auto algo = algorithm_from_string(j.at("algorithm").get<std::string>());
    if (algo == Algorithm::lz77) {
      std::vector<Lz77Token<char>> toks;
      for (const auto& t : j.at("tokens")) {
        if (t.contains("literal")) toks.emplace_back(Literal<char>{one_char(t["literal"])});
        else toks.emplace_back(BackRef{t.at("start").get<std::size_t>(), t.at("length").get<std::size_t>()});
      }
      stream.tokens = std::move(toks);
    } else {
      std::vector<Lz78Token<char>> toks;
      for (const auto& t : j.at("tokens")) {
        Lz78Token<char> tok{t.at("prefix").get<std::size_t>(), std::nullopt};
        if (t.contains("extension")) tok.extension = one_char(t["extension"]);
        toks.push_back(tok);
      }
      stream.tokens = std::move(toks);
    }
    return stream;
  } catch (const nlohmann::json::exception& e) {
    throw TokenFormatError(std::string("malformed token stream JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw TokenFormatError(e.what());
  }
}

}  // namespace tunelz::lz
