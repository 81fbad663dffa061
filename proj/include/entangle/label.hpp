#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "entangle/errors.hpp"

namespace entangle {

/// Canonical label string.
///
/// Grammar:
///   atomic      name
///   versioned   name@v<k>            k >= 1, no leading zeros
///   sub-intent  name#with_<entity>   name#without_<entity>
///   composite   a&b[&c...]           atoms atomic, sorted, distinct, >= 2
class LabelId {
 public:
  LabelId() = default;
  explicit LabelId(std::string s) : s_(std::move(s)) {}

  const std::string& str() const noexcept { return s_; }
  bool empty() const noexcept { return s_.empty(); }

  friend auto operator<=>(const LabelId&, const LabelId&) = default;
  friend bool operator==(const LabelId&, const LabelId&) = default;

 private:
  std::string s_;
};

using LabelSet = std::set<LabelId>;

inline void to_json(nlohmann::json& j, const LabelId& l) { j = l.str(); }
inline void from_json(const nlohmann::json& j, LabelId& l) { l = LabelId(j.get<std::string>()); }

enum class LabelKind { Atomic, Versioned, SubIntentWith, SubIntentWithout, Composite };

inline std::string_view to_string(LabelKind k) {
  switch (k) {
    case LabelKind::Atomic: return "atomic";
    case LabelKind::Versioned: return "versioned";
    case LabelKind::SubIntentWith: return "sub_intent_with";
    case LabelKind::SubIntentWithout: return "sub_intent_without";
    case LabelKind::Composite: return "composite";
  }
  return "?";
}

struct ParsedLabel {
  std::string base;
  LabelKind kind = LabelKind::Atomic;
  int version = 0;                 // Versioned only
  std::string entity;              // sub-intents only
  std::vector<std::string> atoms;  // Composite only
};

namespace detail {

inline bool parse_version_suffix(std::string_view s, int& k) {
  if (s.empty() || s.size() > 9 || s.front() == '0') return false;
  k = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    k = k * 10 + (c - '0');
  }
  return true;
}

}  // namespace detail

/// Decomposes a canonical label. Unrecognized decorations parse as Atomic;
/// only a malformed composite is an error.
inline ParsedLabel parse_label(std::string_view s) {
  if (s.empty()) throw ValidationError("empty label");
  ParsedLabel out;

  if (s.find('&') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const auto amp = s.find('&', start);
      const auto atom = s.substr(start, amp == std::string_view::npos ? amp : amp - start);
      if (atom.empty()) throw ValidationError("malformed composite label '" + std::string(s) + "': empty atom");
      const auto inner = parse_label(atom);
      if (inner.kind != LabelKind::Atomic)
        throw ValidationError("malformed composite label '" + std::string(s) +
                              "': atom '" + std::string(atom) + "' is decorated");
      if (!out.atoms.empty() && !(out.atoms.back() < atom))
        throw ValidationError("malformed composite label '" + std::string(s) +
                              "': atoms must be sorted and distinct");
      out.atoms.emplace_back(atom);
      if (amp == std::string_view::npos) break;
      start = amp + 1;
    }
    out.base = std::string(s);
    out.kind = LabelKind::Composite;
    return out;
  }

  if (const auto at = s.rfind("@v"); at != std::string_view::npos && at > 0) {
    int k = 0;
    if (detail::parse_version_suffix(s.substr(at + 2), k)) {
      out.base = std::string(s.substr(0, at));
      out.kind = LabelKind::Versioned;
      out.version = k;
      return out;
    }
  }

  if (const auto hash = s.find('#'); hash != std::string_view::npos && hash > 0) {
    const auto rest = s.substr(hash + 1);
    constexpr std::string_view kWith = "with_";
    constexpr std::string_view kWithout = "without_";
    if (rest.starts_with(kWithout) && rest.size() > kWithout.size()) {
      out.base = std::string(s.substr(0, hash));
      out.kind = LabelKind::SubIntentWithout;
      out.entity = std::string(rest.substr(kWithout.size()));
      return out;
    }
    if (rest.starts_with(kWith) && rest.size() > kWith.size()) {
      out.base = std::string(s.substr(0, hash));
      out.kind = LabelKind::SubIntentWith;
      out.entity = std::string(rest.substr(kWith.size()));
      return out;
    }
  }

  out.base = std::string(s);
  return out;
}

inline ParsedLabel parse_label(const LabelId& l) { return parse_label(l.str()); }

inline LabelKind kind_of(const LabelId& l) { return parse_label(l).kind; }

/// Inverse of parse_label.
inline LabelId serialize_label(const ParsedLabel& p) {
  switch (p.kind) {
    case LabelKind::Atomic: return LabelId(p.base);
    case LabelKind::Versioned: return LabelId(p.base + "@v" + std::to_string(p.version));
    case LabelKind::SubIntentWith: return LabelId(p.base + "#with_" + p.entity);
    case LabelKind::SubIntentWithout: return LabelId(p.base + "#without_" + p.entity);
    case LabelKind::Composite: {
      std::string s;
      for (const auto& a : p.atoms) {
        if (!s.empty()) s += '&';
        s += a;
      }
      return LabelId(s);
    }
  }
  return LabelId(p.base);
}

inline LabelId versioned_label(std::string_view base, int k) {
  if (k < 1) throw ValidationError("version index must be >= 1");
  return LabelId(std::string(base) + "@v" + std::to_string(k));
}

inline LabelId with_label(std::string_view base, std::string_view entity) {
  return LabelId(std::string(base) + "#with_" + std::string(entity));
}

inline LabelId without_label(std::string_view base, std::string_view entity) {
  return LabelId(std::string(base) + "#without_" + std::string(entity));
}

/// Canonical composite of a set of atomic labels (sorted, deduplicated).
inline LabelId composite_label(std::vector<std::string> atoms) {
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  if (atoms.size() < 2) throw ValidationError("composite label needs at least two distinct atoms");
  ParsedLabel p;
  p.kind = LabelKind::Composite;
  p.atoms = std::move(atoms);
  for (const auto& a : p.atoms)
    if (parse_label(a).kind != LabelKind::Atomic)
      throw ValidationError("composite atom '" + a + "' is not atomic");
  return serialize_label(p);
}

/// A single intent split on the presence of a pivot entity type. The coarse
/// label keeps the original intent name.
struct SplitFamily {
  std::string pivot;
  LabelId with;
  LabelId without;
  LabelId coarse;
};

enum class FamilyKind { Version, Split, Composite };

inline std::string_view to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::Version: return "version";
    case FamilyKind::Split: return "split";
    case FamilyKind::Composite: return "composite";
  }
  return "?";
}

struct Family {
  FamilyKind kind;
  std::string key;
  std::vector<LabelId> members;
};

/// Ground-truth relations among entangled labels.
class FamilyRegistry {
 public:
  std::map<std::string, std::vector<LabelId>> version_families;
  std::map<std::string, SplitFamily> split_families;
  /// composite label -> its atoms
  std::map<LabelId, std::vector<LabelId>> composite_families;

  bool empty() const noexcept {
    return version_families.empty() && split_families.empty() && composite_families.empty();
  }

  /// Version and split families must not share labels with any other family.
  /// Composite families may share atoms with each other (hotel&taxi and
  /// hotel&train), but not with version or split families.
  void validate() const {
    std::map<LabelId, std::string> owner;
    auto claim = [&](const LabelId& l, const std::string& fam) {
      auto [it, inserted] = owner.emplace(l, fam);
      if (!inserted && it->second != fam)
        throw ValidationError("label '" + l.str() + "' belongs to both " + it->second + " and " + fam);
    };
    for (const auto& [base, members] : version_families) {
      if (members.empty()) throw ValidationError("empty version family '" + base + "'");
      for (const auto& m : members) {
        const auto p = parse_label(m);
        if (p.kind != LabelKind::Versioned || p.base != base)
          throw ValidationError("version family '" + base + "' has foreign member '" + m.str() + "'");
        claim(m, "version family " + base);
      }
    }
    for (const auto& [base, f] : split_families) {
      const std::string fam = "split family " + base;
      if (f.coarse.str() != base || f.with != with_label(base, f.pivot) ||
          f.without != without_label(base, f.pivot))
        throw ValidationError(fam + " is inconsistent");
      claim(f.with, fam);
      claim(f.without, fam);
      claim(f.coarse, fam);
    }
    for (const auto& [comp, atoms] : composite_families) {
      const auto p = parse_label(comp);
      if (p.kind != LabelKind::Composite)
        throw ValidationError("composite family key '" + comp.str() + "' is not a composite label");
      std::vector<LabelId> expect;
      for (const auto& a : p.atoms) expect.emplace_back(a);
      if (expect != atoms)
        throw ValidationError("composite family '" + comp.str() + "' atoms do not match its label");
      claim(comp, "composite family " + comp.str());
      for (const auto& a : atoms) claim(a, "composite atoms");
    }
  }

  /// Every family with its member labels, in a fixed order: version, split,
  /// composite; each keyed lexicographically.
  std::vector<Family> families() const {
    std::vector<Family> out;
    for (const auto& [base, members] : version_families)
      out.push_back({FamilyKind::Version, base, members});
    for (const auto& [base, f] : split_families)
      out.push_back({FamilyKind::Split, base, {f.with, f.without, f.coarse}});
    for (const auto& [comp, atoms] : composite_families) {
      Family fam{FamilyKind::Composite, comp.str(), atoms};
      fam.members.push_back(comp);
      out.push_back(std::move(fam));
    }
    return out;
  }

  /// Every label the registry knows about.
  LabelSet labels() const {
    LabelSet s;
    for (const auto& f : families()) s.insert(f.members.begin(), f.members.end());
    return s;
  }

  const SplitFamily* split_family_for_coarse(const LabelId& l) const {
    auto it = split_families.find(l.str());
    return it == split_families.end() ? nullptr : &it->second;
  }

  bool operator==(const FamilyRegistry& o) const {
    return to_json_obj() == o.to_json_obj();
  }

  nlohmann::ordered_json to_json_obj() const {
    nlohmann::ordered_json j;
    j["format"] = "entangle.registry/1";
    j["version_families"] = nlohmann::ordered_json::object();
    for (const auto& [base, members] : version_families) {
      auto& arr = j["version_families"][base] = nlohmann::ordered_json::array();
      for (const auto& m : members) arr.push_back(m.str());
    }
    j["split_families"] = nlohmann::ordered_json::object();
    for (const auto& [base, f] : split_families) {
      j["split_families"][base] = {{"pivot", f.pivot},
                                   {"with", f.with.str()},
                                   {"without", f.without.str()},
                                   {"composite", f.coarse.str()}};
    }
    j["composite_families"] = nlohmann::ordered_json::object();
    for (const auto& [comp, atoms] : composite_families) {
      auto& arr = j["composite_families"][comp.str()] = nlohmann::ordered_json::array();
      for (const auto& a : atoms) arr.push_back(a.str());
    }
    return j;
  }

  static FamilyRegistry from_json_obj(const nlohmann::json& j) {
    FamilyRegistry r;
    try {
      if (j.value("format", std::string{}) != "entangle.registry/1")
        throw ValidationError("registry: unsupported format tag");
      for (const auto& [base, arr] : j.at("version_families").items())
        for (const auto& m : arr) r.version_families[base].emplace_back(m.get<std::string>());
      for (const auto& [base, o] : j.at("split_families").items())
        r.split_families[base] = SplitFamily{o.at("pivot").get<std::string>(),
                                             LabelId(o.at("with").get<std::string>()),
                                             LabelId(o.at("without").get<std::string>()),
                                             LabelId(o.at("composite").get<std::string>())};
      for (const auto& [comp, arr] : j.at("composite_families").items())
        for (const auto& a : arr) r.composite_families[LabelId(comp)].emplace_back(a.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("registry: ") + e.what());
    }
    r.validate();
    return r;
  }
};

/// Registry-level expansion closure of one label.
///
///   Versioned      -> its whole version family
///   sub-intent     -> {itself, coarse label of its split family}
///   Composite      -> its atoms plus itself
///   anything else  -> {itself}
///
/// The coarse label of a split family expands to itself here; which
/// sub-intent applies is a per-record decision (see build_eval_labels).
inline LabelSet expand(const LabelId& l, const FamilyRegistry& r) {
  const auto p = parse_label(l);
  switch (p.kind) {
    case LabelKind::Versioned: {
      auto it = r.version_families.find(p.base);
      if (it == r.version_families.end() ||
          std::find(it->second.begin(), it->second.end(), l) == it->second.end())
        throw ValidationError("label '" + l.str() + "' has no version family in the registry");
      return LabelSet(it->second.begin(), it->second.end());
    }
    case LabelKind::SubIntentWith:
    case LabelKind::SubIntentWithout: {
      auto it = r.split_families.find(p.base);
      if (it == r.split_families.end() || it->second.pivot != p.entity)
        throw ValidationError("label '" + l.str() + "' has no split family in the registry");
      return {l, it->second.coarse};
    }
    case LabelKind::Composite: {
      auto it = r.composite_families.find(l);
      if (it == r.composite_families.end())
        throw ValidationError("label '" + l.str() + "' has no composite family in the registry");
      LabelSet s(it->second.begin(), it->second.end());
      s.insert(l);
      return s;
    }
    case LabelKind::Atomic: break;
  }
  return {l};
}

}  // namespace entangle

template <>
struct std::hash<entangle::LabelId> {
  std::size_t operator()(const entangle::LabelId& l) const noexcept {
    return std::hash<std::string>{}(l.str());
  }
};
