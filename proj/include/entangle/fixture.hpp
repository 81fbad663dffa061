#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "entangle/corpus.hpp"
#include "entangle/errors.hpp"
#include "entangle/rng.hpp"
#include "entangle/transform.hpp"

namespace entangle {

/// Shape of a synthetic intent corpus.
///
/// Families are laid out in order: `versioned_count` single intents meant for
/// version conflict, `entity_split_count` single intents carrying a pivot
/// entity in half their records, `composite_pairs` two-atom multi-intent
/// families, and plain single intents for the rest of `family_count`.
struct FixtureSpec {
  int family_count = 12;
  int versioned_count = 6;
  int entity_split_count = 3;
  int composite_pairs = 3;
  int records_per_intent = 417;
  int vocab_per_family = 24;
  std::uint64_t seed = 7;

  friend bool operator==(const FixtureSpec&, const FixtureSpec&) = default;
};

inline void validate_fixture_spec(const FixtureSpec& s) {
  if (s.family_count < 0 || s.versioned_count < 0 || s.entity_split_count < 0 || s.composite_pairs < 0 ||
      s.records_per_intent < 0 || s.vocab_per_family < 0)
    throw ValidationError("fixture spec: counts must be >= 0");
  if (s.versioned_count + s.entity_split_count > s.family_count)
    throw ValidationError("fixture spec: versioned_count + entity_split_count exceeds family_count");
  if (s.composite_pairs > s.family_count - s.versioned_count - s.entity_split_count)
    throw ValidationError("fixture spec: composite_pairs exceeds the families left after versioned and split ones");
  if (s.records_per_intent > 0 && s.vocab_per_family < 1)
    throw ValidationError("fixture spec: vocab_per_family must be >= 1 when records are generated");
}

struct FixtureCorpora {
  Corpus train;
  Corpus valid;
  Corpus test;
};

inline std::string fixture_intent_name(int family) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "intent%02d", family);
  return buf;
}

inline std::string fixture_pivot_type(int family) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "slot%02d", family);
  return buf;
}

/// Records per family group in the valid and test splits.
inline int fixture_eval_records(int records_per_intent) { return (records_per_intent + 4) / 5; }

namespace detail {

class WordMaker {
 public:
  explicit WordMaker(Rng& rng) : rng_(rng) {}

  std::string fresh() {
    static constexpr std::string_view kCons = "bdfgklmnprstvz";
    static constexpr std::string_view kVow = "aeiou";
    while (true) {
      const auto syllables = 2 + rng_.uniform_index(2);
      std::string w;
      for (std::uint64_t i = 0; i < syllables; ++i) {
        w += kCons[rng_.uniform_index(kCons.size())];
        w += kVow[rng_.uniform_index(kVow.size())];
      }
      if (used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> fresh(int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(fresh());
    return out;
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

struct FixtureGroup {
  std::vector<LabelId> labels;
  std::vector<std::vector<std::string>> vocabs;  // one per token source
  std::string pivot_type;                        // split families only
  std::vector<std::string> pivot_words;
};

inline std::vector<std::string> draw_tokens(Rng& rng, const FixtureGroup& g) {
  const auto len = 5 + rng.uniform_index(5);
  std::vector<std::string> toks;
  for (std::uint64_t i = 0; i < len; ++i) {
    const auto& vocab = g.vocabs[i % g.vocabs.size()];
    toks.push_back(vocab[rng.uniform_index(vocab.size())]);
  }
  if (g.vocabs.size() > 1) rng.shuffle(toks);
  return toks;
}

inline Record make_record(Rng& rng, const FixtureGroup& g, bool with_pivot) {
  auto toks = draw_tokens(rng, g);
  Record r;
  r.labels = g.labels;
  std::size_t pivot_at = SIZE_MAX;
  std::string pivot;
  if (with_pivot) {
    pivot = g.pivot_words[rng.uniform_index(g.pivot_words.size())];
    pivot_at = rng.uniform_index(toks.size() + 1);
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i <= toks.size(); ++i) {
    if (i == pivot_at) {
      if (!r.text.empty()) {
        r.text += ' ';
        ++offset;
      }
      r.entities.push_back({g.pivot_type, offset, offset + pivot.size(), pivot});
      r.text += pivot;
      offset += pivot.size();
    }
    if (i == toks.size()) break;
    if (!r.text.empty()) {
      r.text += ' ';
      ++offset;
    }
    r.text += toks[i];
    offset += toks[i].size();
  }
  return r;
}

}  // namespace detail

/// Deterministic synthetic corpora with disjoint vocabularies per family.
/// Train holds records_per_intent records per family group; valid and test
/// hold fixture_eval_records(records_per_intent) each. In entity-split
/// families exactly floor(n/2) records of each split carry the pivot entity.
inline FixtureCorpora generate_fixture(const FixtureSpec& spec) {
  validate_fixture_spec(spec);
  auto rng = Rng::derive(spec.seed, "fixture");
  detail::WordMaker words(rng);

  std::vector<detail::FixtureGroup> groups;
  for (int f = 0; f < spec.family_count; ++f) {
    detail::FixtureGroup g;
    const auto name = fixture_intent_name(f);
    const bool split = f >= spec.versioned_count && f < spec.versioned_count + spec.entity_split_count;
    const bool composite = f >= spec.versioned_count + spec.entity_split_count &&
                           f < spec.versioned_count + spec.entity_split_count + spec.composite_pairs;
    if (composite) {
      g.labels = {LabelId(name + "a"), LabelId(name + "b")};
      g.vocabs.push_back(words.fresh(spec.vocab_per_family));
      g.vocabs.push_back(words.fresh(spec.vocab_per_family));
    } else {
      g.labels = {LabelId(name)};
      g.vocabs.push_back(words.fresh(spec.vocab_per_family));
    }
    if (split) {
      g.pivot_type = fixture_pivot_type(f);
      g.pivot_words = words.fresh(3);
    }
    groups.push_back(std::move(g));
  }

  std::vector<LabelId> inventory;
  for (const auto& g : groups) inventory.insert(inventory.end(), g.labels.begin(), g.labels.end());
  inventory = sorted_unique(std::move(inventory));

  auto make_split = [&](Split split, int per_group) {
    Corpus c;
    c.name = "fixture-" + std::string(to_string(split));
    c.split = split;
    c.inventory = inventory;
    for (const auto& g : groups) {
      const int with_count = g.pivot_type.empty() ? 0 : per_group / 2;
      for (int i = 0; i < per_group; ++i) c.records.push_back(detail::make_record(rng, g, i < with_count));
    }
    rng.shuffle(c.records);
    for (std::size_t i = 0; i < c.records.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s-%06zu", std::string(to_string(split)).c_str(), i + 1);
      c.records[i].id = buf;
    }
    validate_corpus(c);
    return c;
  };

  FixtureCorpora out;
  out.train = make_split(Split::Train, spec.records_per_intent);
  out.valid = make_split(Split::Valid, fixture_eval_records(spec.records_per_intent));
  out.test = make_split(Split::Test, fixture_eval_records(spec.records_per_intent));
  return out;
}

/// The plan that turns a fixture into its intended entangled dataset:
/// versioned families get k=2, split families split on their pivot, and
/// every composite pair is split.
inline TransformPlan fixture_plan(const FixtureSpec& spec, std::uint64_t seed) {
  validate_fixture_spec(spec);
  TransformPlan p;
  for (int f = 0; f < spec.versioned_count; ++f) p.version_targets.push_back({fixture_intent_name(f), 2});
  for (int f = spec.versioned_count; f < spec.versioned_count + spec.entity_split_count; ++f)
    p.entity_splits.push_back({fixture_intent_name(f), fixture_pivot_type(f)});
  const int first = spec.versioned_count + spec.entity_split_count;
  for (int f = first; f < first + spec.composite_pairs; ++f) {
    const auto name = fixture_intent_name(f);
    p.composite_targets.push_back({name + "a", name + "b"});
  }
  p.composite_split = spec.composite_pairs > 0;
  p.seed = seed;
  return p;
}

inline nlohmann::ordered_json to_json(const FixtureSpec& s) {
  return {{"family_count", s.family_count},           {"versioned_count", s.versioned_count},
          {"entity_split_count", s.entity_split_count}, {"composite_pairs", s.composite_pairs},
          {"records_per_intent", s.records_per_intent}, {"vocab_per_family", s.vocab_per_family},
          {"seed", s.seed}};
}

inline FixtureSpec fixture_spec_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(j,
                              {"family_count", "versioned_count", "entity_split_count", "composite_pairs",
                               "records_per_intent", "vocab_per_family", "seed"},
                              "fixture");
  FixtureSpec s;
  try {
    s.family_count = j.value("family_count", s.family_count);
    s.versioned_count = j.value("versioned_count", s.versioned_count);
    s.entity_split_count = j.value("entity_split_count", s.entity_split_count);
    s.composite_pairs = j.value("composite_pairs", s.composite_pairs);
    s.records_per_intent = j.value("records_per_intent", s.records_per_intent);
    s.vocab_per_family = j.value("vocab_per_family", s.vocab_per_family);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("fixture: ") + e.what());
  }
  validate_fixture_spec(s);
  return s;
}

}  // namespace entangle
