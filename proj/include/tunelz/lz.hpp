#pragma once

// Lempel-Ziv token coders used as complexity estimators. Both coders count
// tokens rather than bits: a literal, a back-reference and a dictionary entry
// each cost exactly one unit.

#include <concepts>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tunelz/rational.hpp"

namespace tunelz::lz {

enum class Algorithm { lz77, lz78 };

inline std::string_view to_string(Algorithm a) { return a == Algorithm::lz77 ? "lz77" : "lz78"; }

inline Algorithm algorithm_from_string(std::string_view s) {
  if (s == "lz77" || s == "LZ77") return Algorithm::lz77;
  if (s == "lz78" || s == "LZ78") return Algorithm::lz78;
  throw std::invalid_argument("unknown algorithm: " + std::string(s));
}

template <typename Symbol>
struct Literal {
  Symbol symbol;
  friend bool operator==(const Literal&, const Literal&) = default;
};

/// Copy `length` symbols starting at 0-based absolute position `start`. The
/// copy may run into the symbols it is producing.
struct BackRef {
  std::size_t start;
  std::size_t length;
  friend bool operator==(const BackRef&, const BackRef&) = default;
};

template <typename Symbol>
using Lz77Token = std::variant<Literal<Symbol>, BackRef>;

/// Phrase `prefix` (0 = empty phrase) extended by one symbol. Only the last
/// token of a stream may lack the extension.
template <typename Symbol>
struct Lz78Token {
  std::size_t prefix;
  std::optional<Symbol> extension;
  friend bool operator==(const Lz78Token&, const Lz78Token&) = default;
};

template <typename Symbol = char>
struct TokenStream {
  std::variant<std::vector<Lz77Token<Symbol>>, std::vector<Lz78Token<Symbol>>> tokens;
  std::size_t source_length = 0;

  Algorithm algorithm() const { return tokens.index() == 0 ? Algorithm::lz77 : Algorithm::lz78; }
  std::size_t token_count() const {
    return std::visit([](const auto& v) { return v.size(); }, tokens);
  }
  const std::vector<Lz77Token<Symbol>>& lz77() const { return std::get<0>(tokens); }
  const std::vector<Lz78Token<Symbol>>& lz78() const { return std::get<1>(tokens); }
};

class CorruptStream : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UndefinedRatio : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Match {
  std::size_t start = 0;
  std::size_t length = 0;
};

/// Longest prefix of text[pos..] that also starts at some earlier position,
/// allowing the earlier occurrence to overlap pos. Ties go to the smallest
/// start. Runs one Z-style extension pass over the text, O(n).
template <std::equality_comparable Symbol>
Match longest_previous_match(std::span<const Symbol> text, std::size_t pos) {
  const auto pattern = text.subspan(pos);
  const std::size_t m = pattern.size();
  const std::size_t n = text.size();
  Match best;
  if (m == 0 || pos == 0) return best;

  // z[k]: longest common prefix of pattern and pattern[k..].
  std::vector<std::size_t> z(m, 0);
  z[0] = m;
  for (std::size_t k = 1, l = 0, r = 0; k < m; ++k) {
    std::size_t len = k < r ? std::min(z[k - l], r - k) : 0;
    while (k + len < m && pattern[len] == pattern[k + len]) ++len;
    z[k] = len;
    if (k + len > r) {
      l = k;
      r = k + len;
    }
  }

  // [l, r) is the rightmost window of text known to equal pattern[0, r - l).
  for (std::size_t i = 0, l = 0, r = 0; i < pos; ++i) {
    std::size_t len = i < r ? std::min(z[i - l], r - i) : 0;
    while (i + len < n && len < m && text[i + len] == pattern[len]) ++len;
    if (i + len > r) {
      l = i;
      r = i + len;
    }
    if (len > best.length) best = {i, len};
  }
  return best;
}

/// Greedy LZ77 parse over the whole prefix: at each position take the
/// longest earlier match, or a literal when no match of length 2 exists.
template <std::equality_comparable Symbol>
TokenStream<Symbol> compress_lz77(std::span<const Symbol> text) {
  std::vector<Lz77Token<Symbol>> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const Match m = longest_previous_match(text, pos);
    if (m.length >= 2) {
      out.emplace_back(BackRef{m.start, m.length});
      pos += m.length;
    } else {
      out.emplace_back(Literal<Symbol>{text[pos]});
      ++pos;
    }
  }
  return {std::move(out), text.size()};
}

inline TokenStream<char> compress_lz77(std::string_view text) {
  return compress_lz77(std::span<const char>(text.data(), text.size()));
}

/// LZ78 incremental parse. Phrases are numbered from 1 in emission order; a
/// stream that ends inside a known phrase gets a final token without an
/// extension.
template <typename Symbol>
  requires std::totally_ordered<Symbol>
TokenStream<Symbol> compress_lz78(std::span<const Symbol> text) {
  // Node k of the trie is phrase k; node 0 is the empty phrase.
  std::vector<std::map<Symbol, std::size_t>> trie(1);
  std::vector<Lz78Token<Symbol>> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t node = 0;
    while (pos < text.size()) {
      auto it = trie[node].find(text[pos]);
      if (it == trie[node].end()) break;
      node = it->second;
      ++pos;
    }
    if (pos == text.size()) {
      out.push_back({node, std::nullopt});
      break;
    }
    trie[node].emplace(text[pos], trie.size());
    trie.emplace_back();
    out.push_back({node, text[pos]});
    ++pos;
  }
  return {std::move(out), text.size()};
}

inline TokenStream<char> compress_lz78(std::string_view text) {
  return compress_lz78(std::span<const char>(text.data(), text.size()));
}

template <typename Symbol>
TokenStream<Symbol> compress(Algorithm algo, std::span<const Symbol> text) {
  return algo == Algorithm::lz77 ? compress_lz77(text) : compress_lz78(text);
}

inline TokenStream<char> compress(Algorithm algo, std::string_view text) {
  return compress(algo, std::span<const char>(text.data(), text.size()));
}

/// Rebuilds the source symbols. Throws CorruptStream on any token that
/// refers outside what has been decoded so far.
template <typename Symbol>
std::vector<Symbol> decompress(const TokenStream<Symbol>& stream) {
  std::vector<Symbol> out;
  if (stream.algorithm() == Algorithm::lz77) {
    for (const auto& tok : stream.lz77()) {
      if (const auto* lit = std::get_if<Literal<Symbol>>(&tok)) {
        out.push_back(lit->symbol);
        continue;
      }
      const auto& ref = std::get<BackRef>(tok);
      if (ref.length < 2) throw CorruptStream("back-reference shorter than 2");
      if (ref.start >= out.size()) {
        throw CorruptStream("back-reference to position " + std::to_string(ref.start) + " at position " +
                            std::to_string(out.size()));
      }
      // Symbol by symbol so an overlapping copy feeds itself.
      for (std::size_t k = 0; k < ref.length; ++k) out.push_back(out[ref.start + k]);
    }
  } else {
    // phrase k = (parent, last symbol); phrase lengths are recomputed on demand.
    std::vector<std::pair<std::size_t, Symbol>> phrases;
    std::vector<Symbol> scratch;
    const auto& toks = stream.lz78();
    for (std::size_t t = 0; t < toks.size(); ++t) {
      const auto& tok = toks[t];
      if (tok.prefix > phrases.size()) {
        throw CorruptStream("phrase index " + std::to_string(tok.prefix) + " not yet defined");
      }
      if (!tok.extension && t + 1 != toks.size()) throw CorruptStream("token without extension before end of stream");
      scratch.clear();
      for (std::size_t k = tok.prefix; k != 0; k = phrases[k - 1].first) scratch.push_back(phrases[k - 1].second);
      out.insert(out.end(), scratch.rbegin(), scratch.rend());
      if (tok.extension) {
        out.push_back(*tok.extension);
        phrases.emplace_back(tok.prefix, *tok.extension);
      }
    }
  }
  if (out.size() != stream.source_length) {
    throw CorruptStream("decoded " + std::to_string(out.size()) + " symbols, expected " +
                        std::to_string(stream.source_length));
  }
  return out;
}

inline std::string decompress_string(const TokenStream<char>& stream) {
  auto v = decompress(stream);
  return {v.begin(), v.end()};
}

/// source_length / token_count, exactly.
template <typename Symbol>
Rational compression_ratio_exact(const TokenStream<Symbol>& stream) {
  if (stream.token_count() == 0) throw UndefinedRatio("compression ratio of an empty stream");
  return Rational(static_cast<std::int64_t>(stream.source_length), static_cast<std::int64_t>(stream.token_count()));
}

template <typename Symbol>
double compression_ratio(const TokenStream<Symbol>& stream) {
  return compression_ratio_exact(stream).to_double();
}

}  // namespace tunelz::lz
