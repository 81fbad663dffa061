#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "entangle/errors.hpp"
#include "entangle/hash.hpp"
#include "entangle/unicode.hpp"

namespace entangle {

struct EncoderConfig {
  std::uint32_t dim = 1u << 18;
  std::vector<int> word_ngrams = {1, 2};
  std::vector<int> char_ngrams = {2, 3};
  bool signed_hashing = true;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

inline void validate(const EncoderConfig& c) {
  if (c.dim < 2 || (c.dim & (c.dim - 1)) != 0)
    throw ValidationError("encoder dim must be a power of two >= 2");
  if (c.word_ngrams.empty() && c.char_ngrams.empty())
    throw ValidationError("encoder needs at least one n-gram order");
  for (int n : c.word_ngrams)
    if (n < 1) throw ValidationError("n-gram orders must be >= 1");
  for (int n : c.char_ngrams)
    if (n < 1) throw ValidationError("n-gram orders must be >= 1");
}

/// Sparse vector with strictly increasing indices.
struct FeatureVector {
  std::uint32_t dim = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return indices.size(); }

  double norm() const {
    double s = 0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
};

enum class TokenizeMode { WhitespaceLower, Char };

/// WhitespaceLower: lowercase, then split on Unicode whitespace and
/// punctuation. Char: one token per non-whitespace code point, lowercased.
inline std::vector<std::string> tokenize(std::string_view text, TokenizeMode mode) {
  std::vector<std::string> out;
  std::string cur;
  for (char32_t c : unicode::decode(text)) {
    if (mode == TokenizeMode::Char) {
      if (unicode::is_space(c)) continue;
      std::string t;
      unicode::append_utf8(t, unicode::to_lower(c));
      out.push_back(std::move(t));
      continue;
    }
    if (unicode::is_word_char(c)) {
      unicode::append_utf8(cur, unicode::to_lower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

/// Hash of one n-gram: FNV-1a 64 over the UTF-8 bytes of
///   "<kind><order>" 0x1F part 0x1F part ...
/// where kind is 'w' (word n-gram) or 'c' (character n-gram). The feature
/// index is the low bits (h mod dim); the sign is the top bit of mix64(h).
inline std::uint64_t ngram_hash(char kind, int order, const std::vector<std::string_view>& parts) {
  std::string key;
  key += kind;
  key += std::to_string(order);
  for (auto p : parts) {
    key += '\x1f';
    key += p;
  }
  return fnv1a64(key);
}

namespace detail {

inline bool has_spacefree_char(std::string_view token) {
  for (char32_t c : unicode::decode(token))
    if (unicode::is_spacefree_script(c)) return true;
  return false;
}

}  // namespace detail

/// Hashed n-gram features, L2-normalized.
///
/// Word n-grams are taken over the WhitespaceLower tokens. Character n-grams
/// are taken inside each token containing a space-free script character
/// (Han, kana, Hangul, Thai, ...), where a whole run is a single token.
inline FeatureVector featurize(std::string_view text, const EncoderConfig& cfg) {
  std::map<std::uint32_t, double> acc;
  const std::uint64_t mask = cfg.dim - 1;
  auto add = [&](std::uint64_t h) {
    const double sign = (cfg.signed_hashing && (mix64(h) >> 63)) ? -1.0 : 1.0;
    acc[static_cast<std::uint32_t>(h & mask)] += sign;
  };

  const auto toks = tokenize(text, TokenizeMode::WhitespaceLower);
  for (int n : cfg.word_ngrams) {
    if (static_cast<std::size_t>(n) > toks.size()) continue;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
      std::vector<std::string_view> parts(toks.begin() + i, toks.begin() + i + n);
      add(ngram_hash('w', n, parts));
    }
  }
  if (!cfg.char_ngrams.empty()) {
    for (const auto& t : toks) {
      if (!detail::has_spacefree_char(t)) continue;
      const auto chars = tokenize(t, TokenizeMode::Char);
      for (int n : cfg.char_ngrams) {
        if (static_cast<std::size_t>(n) > chars.size()) continue;
        for (std::size_t i = 0; i + n <= chars.size(); ++i) {
          std::vector<std::string_view> parts(chars.begin() + i, chars.begin() + i + n);
          add(ngram_hash('c', n, parts));
        }
      }
    }
  }

  FeatureVector fv;
  fv.dim = cfg.dim;
  double sq = 0;
  for (const auto& [i, v] : acc) {
    if (v == 0.0) continue;
    fv.indices.push_back(i);
    fv.values.push_back(v);
    sq += v * v;
  }
  if (sq > 0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& v : fv.values) v *= inv;
  }
  return fv;
}

inline double dot(const FeatureVector& a, const FeatureVector& b) {
  double s = 0;
  std::size_t i = 0, j = 0;
  while (i < a.nnz() && j < b.nnz()) {
    if (a.indices[i] == b.indices[j]) {
      s += a.values[i++] * b.values[j++];
    } else if (a.indices[i] < b.indices[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

inline nlohmann::ordered_json to_json(const EncoderConfig& c) {
  return {{"dim", c.dim},
          {"word_ngrams", c.word_ngrams},
          {"char_ngrams", c.char_ngrams},
          {"signed_hashing", c.signed_hashing}};
}

inline EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("encoder config must be an object");
  for (const auto& [k, _] : j.items())
    if (k != "dim" && k != "word_ngrams" && k != "char_ngrams" && k != "signed_hashing")
      throw ValidationError("unknown key '" + k + "' in encoder config");
  EncoderConfig c;
  try {
    c.dim = j.value("dim", c.dim);
    c.word_ngrams = j.value("word_ngrams", c.word_ngrams);
    c.char_ngrams = j.value("char_ngrams", c.char_ngrams);
    c.signed_hashing = j.value("signed_hashing", c.signed_hashing);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("encoder config: ") + e.what());
  }
  validate(c);
  return c;
}

}  // namespace entangle
