#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "entangle/corpus.hpp"
#include "entangle/errors.hpp"
#include "entangle/label.hpp"
#include "entangle/rng.hpp"

namespace entangle {

struct VersionTarget {
  std::string intent;
  int versions = 2;
  friend bool operator==(const VersionTarget&, const VersionTarget&) = default;
};

struct EntitySplitTarget {
  std::string intent;
  std::string pivot;
  friend bool operator==(const EntitySplitTarget&, const EntitySplitTarget&) = default;
};

enum class Difficulty { Normal, Easy, Hard };

inline std::string_view to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Normal: return "normal";
    case Difficulty::Easy: return "easy";
    case Difficulty::Hard: return "hard";
  }
  return "?";
}

inline Difficulty parse_difficulty(std::string_view s) {
  if (s == "normal" || s == "Normal") return Difficulty::Normal;
  if (s == "easy" || s == "Easy") return Difficulty::Easy;
  if (s == "hard" || s == "Hard") return Difficulty::Hard;
  throw ValidationError("unknown difficulty mode '" + std::string(s) + "'");
}

struct DifficultySetting {
  Difficulty mode = Difficulty::Normal;
  int k = 1;
  friend bool operator==(const DifficultySetting&, const DifficultySetting&) = default;
};

/// Which families a transformation creates and how.
struct TransformPlan {
  std::vector<VersionTarget> version_targets;
  std::vector<EntitySplitTarget> entity_splits;
  /// Split multi-label records into atoms plus a composite label.
  bool composite_split = false;
  /// Atom sets to split. Empty with composite_split set means every atom set
  /// found in the training corpus (see resolve_composites).
  std::vector<std::vector<std::string>> composite_targets;
  std::optional<DifficultySetting> difficulty;
  std::uint64_t seed = 0;

  friend bool operator==(const TransformPlan&, const TransformPlan&) = default;
};

/// Structural checks that need no corpus.
inline void validate_plan(const TransformPlan& p) {
  std::set<std::string> versioned, split;
  for (const auto& v : p.version_targets) {
    if (v.versions < 1) throw ValidationError("version target '" + v.intent + "': k must be >= 1");
    if (v.intent.empty() || parse_label(v.intent).kind != LabelKind::Atomic)
      throw ValidationError("version target '" + v.intent + "' is not an atomic intent");
    if (!versioned.insert(v.intent).second)
      throw ValidationError("intent '" + v.intent + "' is versioned twice");
  }
  for (const auto& s : p.entity_splits) {
    if (s.intent.empty() || parse_label(s.intent).kind != LabelKind::Atomic)
      throw ValidationError("entity split target '" + s.intent + "' is not an atomic intent");
    if (s.pivot.empty()) throw ValidationError("entity split '" + s.intent + "' has no pivot entity");
    if (!split.insert(s.intent).second)
      throw ValidationError("intent '" + s.intent + "' is split twice");
    if (versioned.count(s.intent))
      throw ValidationError("intent '" + s.intent + "' is both versioned and entity-split");
  }
  for (const auto& atoms : p.composite_targets) {
    const auto comp = composite_label(atoms);
    for (const auto& a : atoms)
      if (versioned.count(a) || split.count(a))
        throw ValidationError("composite '" + comp.str() + "' uses atom '" + a +
                              "', which is also a version or split target");
  }
  if (p.difficulty && p.difficulty->k < 1) throw ValidationError("difficulty k must be >= 1");
}

/// Multi-label atom sets present in a corpus, sorted.
inline std::vector<std::vector<std::string>> detect_composites(const Corpus& c) {
  std::set<std::vector<std::string>> found;
  for (const auto& r : c.records) {
    if (r.labels.size() < 2) continue;
    std::vector<std::string> atoms;
    for (const auto& l : r.labels) atoms.push_back(l.str());
    found.insert(atoms);
  }
  return {found.begin(), found.end()};
}

/// Fills composite_targets from the corpus when the plan asks for every
/// composite, then checks the plan against the corpus.
inline TransformPlan resolve_plan(TransformPlan p, const Corpus& c) {
  if (p.composite_split && p.composite_targets.empty()) p.composite_targets = detect_composites(c);
  if (!p.composite_split) p.composite_targets.clear();
  for (auto& atoms : p.composite_targets) {
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  }
  validate_plan(p);

  const std::set<LabelId> inv(c.inventory.begin(), c.inventory.end());
  std::set<std::string> entity_types;
  for (const auto& r : c.records)
    for (const auto& e : r.entities) entity_types.insert(e.type);
  for (const auto& v : p.version_targets)
    if (!inv.count(LabelId(v.intent)))
      throw ValidationError("plan references missing intent '" + v.intent + "'");
  for (const auto& s : p.entity_splits) {
    if (!inv.count(LabelId(s.intent)))
      throw ValidationError("plan references missing intent '" + s.intent + "'");
    if (!entity_types.count(s.pivot))
      throw ValidationError("pivot entity type '" + s.pivot + "' for intent '" + s.intent +
                            "' does not occur in the corpus");
  }
  for (const auto& atoms : p.composite_targets)
    for (const auto& a : atoms)
      if (!inv.count(LabelId(a)))
        throw ValidationError("plan references missing intent '" + a + "'");
  return p;
}

/// Registry containing exactly the families the plan creates. Composite
/// families come from composite_targets, so resolve the plan first when it
/// relies on auto-detection.
inline FamilyRegistry registry_from_plan(const TransformPlan& p) {
  validate_plan(p);
  FamilyRegistry r;
  for (const auto& v : p.version_targets) {
    auto& fam = r.version_families[v.intent];
    for (int k = 1; k <= v.versions; ++k) fam.push_back(versioned_label(v.intent, k));
  }
  for (const auto& s : p.entity_splits)
    r.split_families[s.intent] =
        SplitFamily{s.pivot, with_label(s.intent, s.pivot), without_label(s.intent, s.pivot), LabelId(s.intent)};
  if (p.composite_split) {
    for (const auto& atoms : p.composite_targets) {
      const auto comp = composite_label(atoms);
      auto& fam = r.composite_families[comp];
      fam.clear();
      for (const auto& a : parse_label(comp).atoms) fam.emplace_back(a);
    }
  }
  r.validate();
  return r;
}

/// Inventory after applying a registry's families: version bases are
/// replaced by their versions, family labels are added; lexicographic.
inline std::vector<LabelId> transformed_inventory(const std::vector<LabelId>& original,
                                                  const FamilyRegistry& r) {
  std::vector<LabelId> out;
  for (const auto& l : original)
    if (!r.version_families.count(l.str())) out.push_back(l);
  for (const auto& l : r.labels()) out.push_back(l);
  return sorted_unique(std::move(out));
}

namespace detail {

inline std::vector<LabelId> current_gold(const Record& r) { return r.gold.empty() ? r.labels : r.gold; }

inline void replace_in_gold(Record& r, const LabelId& old_label, const std::vector<LabelId>& closure) {
  auto gold = current_gold(r);
  std::erase(gold, old_label);
  gold.insert(gold.end(), closure.begin(), closure.end());
  r.gold = sorted_unique(std::move(gold));
}

inline void require_train(const Corpus& c, std::string_view op) {
  if (c.split != Split::Train)
    throw ValidationError(std::string(op) + " applies to training corpora only");
}

}  // namespace detail

/// Relabels every occurrence of a targeted intent i with i@v, v uniform over
/// 1..k. One draw per occurrence, in record order.
inline Corpus apply_version_conflict(Corpus c, const TransformPlan& plan, Rng& rng) {
  detail::require_train(c, "version conflict");
  validate_plan(plan);
  std::map<LabelId, int> targets;
  for (const auto& v : plan.version_targets) {
    if (std::find(c.inventory.begin(), c.inventory.end(), LabelId(v.intent)) == c.inventory.end())
      throw ValidationError("plan references missing intent '" + v.intent + "'");
    targets[LabelId(v.intent)] = v.versions;
  }
  if (targets.empty()) return c;
  for (auto& r : c.records) {
    bool touched = false;
    for (auto& l : r.labels) {
      auto it = targets.find(l);
      if (it == targets.end()) continue;
      const auto k = it->second;
      std::vector<LabelId> family;
      for (int v = 1; v <= k; ++v) family.push_back(versioned_label(l.str(), v));
      const auto chosen = family[rng.uniform_index(static_cast<std::uint64_t>(k))];
      detail::replace_in_gold(r, l, family);
      l = chosen;
      touched = true;
    }
    if (touched) r.labels = sorted_unique(std::move(r.labels));
  }
  std::vector<LabelId> inv;
  for (const auto& l : c.inventory)
    if (!targets.count(l)) inv.push_back(l);
  for (const auto& [l, k] : targets)
    for (int v = 1; v <= k; ++v) inv.push_back(versioned_label(l.str(), v));
  c.inventory = sorted_unique(std::move(inv));
  return c;
}

/// The sub-intent a record belongs to: with_<pivot> iff any entity span of
/// the pivot type is annotated.
inline LabelId applicable_sub_intent(const Record& r, const SplitFamily& f) {
  return r.has_entity(f.pivot) ? f.with : f.without;
}

/// Splits single-intent records of each targeted intent. The training label
/// is uniform over {applicable sub-intent, coarse intent}.
inline Corpus apply_entity_split(Corpus c, const TransformPlan& plan, Rng& rng) {
  detail::require_train(c, "entity split");
  validate_plan(plan);
  std::map<LabelId, SplitFamily> targets;
  for (const auto& s : plan.entity_splits)
    targets[LabelId(s.intent)] =
        SplitFamily{s.pivot, with_label(s.intent, s.pivot), without_label(s.intent, s.pivot), LabelId(s.intent)};
  if (targets.empty()) return c;
  for (auto& r : c.records) {
    if (r.labels.size() != 1) continue;
    auto it = targets.find(r.labels.front());
    if (it == targets.end()) continue;
    const auto sub = applicable_sub_intent(r, it->second);
    detail::replace_in_gold(r, it->second.coarse, {sub, it->second.coarse});
    r.labels = {rng.uniform_index(2) == 0 ? sub : it->second.coarse};
  }
  auto inv = c.inventory;
  for (const auto& [_, f] : targets) {
    inv.push_back(f.with);
    inv.push_back(f.without);
  }
  c.inventory = sorted_unique(std::move(inv));
  return c;
}

/// Relabels each multi-label record whose atom set is targeted with one
/// choice, uniform over its atoms and the composite label.
inline Corpus apply_composite_split(Corpus c, const TransformPlan& plan, Rng& rng) {
  detail::require_train(c, "composite split");
  if (!plan.composite_split) return c;
  const auto targets_list = plan.composite_targets.empty() ? detect_composites(c) : plan.composite_targets;
  std::set<std::vector<std::string>> targets;
  for (auto atoms : targets_list) {
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    targets.insert(std::move(atoms));
  }
  auto inv = c.inventory;
  for (const auto& atoms : targets) inv.push_back(composite_label(atoms));
  for (auto& r : c.records) {
    if (r.labels.size() < 2) continue;
    std::vector<std::string> atoms;
    for (const auto& l : r.labels) atoms.push_back(l.str());
    if (!targets.count(atoms)) continue;
    auto choices = r.labels;
    const auto comp = composite_label(atoms);
    choices.push_back(comp);
    auto gold = detail::current_gold(r);
    gold.push_back(comp);
    r.gold = sorted_unique(std::move(gold));
    r.labels = {choices[rng.uniform_index(choices.size())]};
  }
  c.inventory = sorted_unique(std::move(inv));
  return c;
}

/// Full training-side transformation: version conflict, then entity split,
/// then composite split, all drawing from one stream seeded by plan.seed.
/// The plan must already be resolved against the corpus.
inline Corpus transform_train(const Corpus& c, const TransformPlan& plan) {
  auto rng = Rng::derive(plan.seed, "transform");
  auto out = apply_version_conflict(c, plan, rng);
  out = apply_entity_split(std::move(out), plan, rng);
  out = apply_composite_split(std::move(out), plan, rng);
  return out;
}

/// Gold closure of one record given its original (untransformed) labels.
inline LabelSet record_closure(const Record& r, const FamilyRegistry& reg) {
  LabelSet gold;
  if (r.labels.size() >= 2) {
    bool all_atomic = std::all_of(r.labels.begin(), r.labels.end(),
                                  [](const LabelId& l) { return kind_of(l) == LabelKind::Atomic; });
    if (all_atomic) {
      std::vector<std::string> atoms;
      for (const auto& l : r.labels) atoms.push_back(l.str());
      const auto comp = composite_label(atoms);
      if (reg.composite_families.count(comp)) return expand(comp, reg);
    }
  }
  for (const auto& l : r.labels) {
    if (kind_of(l) == LabelKind::Atomic) {
      if (auto it = reg.version_families.find(l.str()); it != reg.version_families.end()) {
        gold.insert(it->second.begin(), it->second.end());
        continue;
      }
      if (const auto* f = reg.split_family_for_coarse(l); f && r.labels.size() == 1) {
        gold.insert(applicable_sub_intent(r, *f));
        gold.insert(f->coarse);
        continue;
      }
      gold.insert(l);
      continue;
    }
    const auto e = expand(l, reg);
    gold.insert(e.begin(), e.end());
  }
  return gold;
}

/// Replaces each record's labels with its gold expansion closure and sets the
/// inventory to the transformed one.
inline Corpus build_eval_labels(Corpus c, const FamilyRegistry& reg) {
  const auto inv = transformed_inventory(c.inventory, reg);
  const std::set<LabelId> known(inv.begin(), inv.end());
  for (auto& r : c.records) {
    const auto gold = record_closure(r, reg);
    for (const auto& l : gold)
      if (!known.count(l)) throw ValidationError("record '" + r.id + "': unknown label '" + l.str() + "'");
    r.labels.assign(gold.begin(), gold.end());
    r.gold.clear();
  }
  c.inventory = inv;
  return c;
}

/// Restricts a plan to its k most frequent family groups. A group pairs two
/// version families with one merge-friction family (entity split or
/// composite), so Easy/Hard k keeps the top 2k version families and the top
/// k merge-friction families. Ranking is by descending record frequency in
/// `c`, ties broken lexicographically. Normal returns the plan unchanged.
inline TransformPlan difficulty_filter(TransformPlan plan, Difficulty mode, int k, const Corpus& c) {
  if (k < 1) throw ValidationError("difficulty k must be >= 1");
  if (mode == Difficulty::Normal) return plan;
  plan = resolve_plan(std::move(plan), c);

  std::map<std::string, std::size_t> single_freq;
  std::map<std::vector<std::string>, std::size_t> multi_freq;
  for (const auto& r : c.records) {
    if (r.labels.size() == 1) {
      ++single_freq[r.labels.front().str()];
    } else {
      std::vector<std::string> atoms;
      for (const auto& l : r.labels) atoms.push_back(l.str());
      ++multi_freq[atoms];
    }
  }

  struct Ranked {
    std::size_t freq;
    std::string key;
    std::size_t index;
    bool composite;
  };
  auto by_rank = [](const Ranked& a, const Ranked& b) {
    return a.freq != b.freq ? a.freq > b.freq : a.key < b.key;
  };

  std::vector<Ranked> versions;
  for (std::size_t i = 0; i < plan.version_targets.size(); ++i) {
    const auto& t = plan.version_targets[i].intent;
    versions.push_back({single_freq[t], t, i, false});
  }
  std::vector<Ranked> mf;
  for (std::size_t i = 0; i < plan.entity_splits.size(); ++i) {
    const auto& t = plan.entity_splits[i].intent;
    mf.push_back({single_freq[t], t, i, false});
  }
  for (std::size_t i = 0; i < plan.composite_targets.size(); ++i)
    mf.push_back({multi_freq[plan.composite_targets[i]], composite_label(plan.composite_targets[i]).str(), i, true});

  const std::size_t groups = std::max((versions.size() + 1) / 2, mf.size());
  if (static_cast<std::size_t>(k) > groups)
    throw ValidationError("difficulty k=" + std::to_string(k) + " exceeds the " + std::to_string(groups) +
                          " family groups available");

  std::sort(versions.begin(), versions.end(), by_rank);
  std::sort(mf.begin(), mf.end(), by_rank);
  versions.resize(std::min(versions.size(), static_cast<std::size_t>(2 * k)));
  mf.resize(std::min(mf.size(), static_cast<std::size_t>(k)));

  TransformPlan out = plan;
  out.version_targets.clear();
  out.entity_splits.clear();
  out.composite_targets.clear();
  std::vector<std::size_t> vi, si, ci;
  for (const auto& v : versions) vi.push_back(v.index);
  for (const auto& m : mf) (m.composite ? ci : si).push_back(m.index);
  std::sort(vi.begin(), vi.end());
  std::sort(si.begin(), si.end());
  std::sort(ci.begin(), ci.end());
  for (auto i : vi) out.version_targets.push_back(plan.version_targets[i]);
  for (auto i : si) out.entity_splits.push_back(plan.entity_splits[i]);
  for (auto i : ci) out.composite_targets.push_back(plan.composite_targets[i]);
  out.composite_split = !out.composite_targets.empty();
  out.difficulty = DifficultySetting{mode, k};
  return out;
}

/// Label and instance statistics of a transformation.
struct TransformStats {
  std::size_t vc_n = 0;  // versioned labels
  double vc_r = 0.0;     // % of training records carrying a versioned label
  std::size_t mf_n = 0;  // merge-friction labels: split coarse labels and composites
  double mf_r = 0.0;     // % of training records from split or composite families
  std::size_t total_labels = 0;
  double vc_label_pct = 0.0;  // vc_n / total_labels, %
  double mf_label_pct = 0.0;  // mf_n / total_labels, %
  std::map<std::string, std::size_t> split_counts;
};

inline TransformStats transform_stats(const Corpus& before, const Corpus& after, const FamilyRegistry& reg) {
  if (before.records.size() != after.records.size())
    throw ValidationError("transform_stats: corpora have different record counts");
  TransformStats s;
  s.total_labels = after.inventory.size();
  for (const auto& l : after.inventory) {
    const auto p = parse_label(l);
    if (p.kind == LabelKind::Versioned && reg.version_families.count(p.base)) ++s.vc_n;
    if (reg.split_families.count(l.str()) || reg.composite_families.count(l)) ++s.mf_n;
  }
  std::size_t vc_records = 0, mf_records = 0;
  for (std::size_t i = 0; i < after.records.size(); ++i) {
    const auto& a = after.records[i];
    const auto& b = before.records[i];
    if (a.id != b.id) throw ValidationError("transform_stats: record order differs at '" + b.id + "'");
    if (std::any_of(a.labels.begin(), a.labels.end(), [&](const LabelId& l) {
          const auto p = parse_label(l);
          return p.kind == LabelKind::Versioned && reg.version_families.count(p.base);
        }))
      ++vc_records;
    bool mf = false;
    if (b.labels.size() == 1) {
      mf = reg.split_families.count(b.labels.front().str()) > 0;
    } else if (b.labels.size() >= 2) {
      std::vector<std::string> atoms;
      for (const auto& l : b.labels) atoms.push_back(l.str());
      try {
        mf = reg.composite_families.count(composite_label(atoms)) > 0;
      } catch (const ValidationError&) {
        mf = false;
      }
    }
    if (mf) ++mf_records;
  }
  const auto n = after.records.size();
  if (n) {
    s.vc_r = 100.0 * static_cast<double>(vc_records) / static_cast<double>(n);
    s.mf_r = 100.0 * static_cast<double>(mf_records) / static_cast<double>(n);
  }
  if (s.total_labels) {
    s.vc_label_pct = 100.0 * static_cast<double>(s.vc_n) / static_cast<double>(s.total_labels);
    s.mf_label_pct = 100.0 * static_cast<double>(s.mf_n) / static_cast<double>(s.total_labels);
  }
  s.split_counts[std::string(to_string(after.split))] = n;
  return s;
}

inline nlohmann::ordered_json to_json(const TransformStats& s) {
  nlohmann::ordered_json j;
  j["vc_n"] = s.vc_n;
  j["vc_r"] = s.vc_r;
  j["mf_n"] = s.mf_n;
  j["mf_r"] = s.mf_r;
  j["total"] = s.total_labels;
  j["vc_label_pct"] = s.vc_label_pct;
  j["mf_label_pct"] = s.mf_label_pct;
  j["records"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : s.split_counts) j["records"][k] = v;
  return j;
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> keys,
                                std::string_view where) {
  if (!j.is_object()) throw ValidationError(std::string(where) + " must be a JSON object");
  for (const auto& [k, _] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw ValidationError("unknown key '" + k + "' in " + std::string(where));
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const TransformPlan& p) {
  nlohmann::ordered_json j;
  j["version_targets"] = nlohmann::ordered_json::array();
  for (const auto& v : p.version_targets) j["version_targets"].push_back({{"intent", v.intent}, {"k", v.versions}});
  j["entity_splits"] = nlohmann::ordered_json::array();
  for (const auto& s : p.entity_splits) j["entity_splits"].push_back({{"intent", s.intent}, {"pivot", s.pivot}});
  j["composite_split"] = p.composite_split;
  j["composite_targets"] = p.composite_targets;
  if (p.difficulty)
    j["difficulty"] = {{"mode", std::string(to_string(p.difficulty->mode))}, {"k", p.difficulty->k}};
  j["seed"] = p.seed;
  return j;
}

inline TransformPlan plan_from_json(const nlohmann::json& j) {
  detail::reject_unknown_keys(
      j, {"version_targets", "entity_splits", "composite_split", "composite_targets", "difficulty", "seed"}, "plan");
  TransformPlan p;
  try {
    if (j.contains("version_targets"))
      for (const auto& v : j.at("version_targets")) {
        if (v.is_string()) {
          p.version_targets.push_back({v.get<std::string>(), 2});
          continue;
        }
        detail::reject_unknown_keys(v, {"intent", "k"}, "version target");
        p.version_targets.push_back({v.at("intent").get<std::string>(), v.value("k", 2)});
      }
    if (j.contains("entity_splits"))
      for (const auto& s : j.at("entity_splits")) {
        detail::reject_unknown_keys(s, {"intent", "pivot"}, "entity split");
        p.entity_splits.push_back({s.at("intent").get<std::string>(), s.at("pivot").get<std::string>()});
      }
    p.composite_split = j.value("composite_split", false);
    if (j.contains("composite_targets"))
      p.composite_targets = j.at("composite_targets").get<std::vector<std::vector<std::string>>>();
    if (j.contains("difficulty")) {
      const auto& d = j.at("difficulty");
      detail::reject_unknown_keys(d, {"mode", "k"}, "difficulty");
      p.difficulty = DifficultySetting{parse_difficulty(d.at("mode").get<std::string>()), d.value("k", 1)};
    }
    p.seed = j.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("plan: ") + e.what());
  }
  validate_plan(p);
  return p;
}

}  // namespace entangle
