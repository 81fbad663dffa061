#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "entangle/errors.hpp"
#include "entangle/io.hpp"
#include "entangle/label.hpp"
#include "entangle/unicode.hpp"

namespace entangle {

/// Annotated entity. Offsets count Unicode scalar values, not bytes;
/// `end` is exclusive.
struct EntitySpan {
  std::string type;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

struct Record {
  std::string id;
  std::string text;
  /// Sorted, deduplicated. Exactly one label in a PU training corpus.
  std::vector<LabelId> labels;
  std::vector<EntitySpan> entities;
  /// Expansion closure attached by the transformations; empty when unknown.
  std::vector<LabelId> gold;

  bool has_entity(std::string_view type) const {
    return std::any_of(entities.begin(), entities.end(),
                       [&](const EntitySpan& e) { return e.type == type; });
  }

  friend bool operator==(const Record&, const Record&) = default;
};

enum class Split { Train, Valid, Test };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "valid") return Split::Valid;
  if (s == "test") return Split::Test;
  throw ValidationError("unknown split '" + std::string(s) + "'");
}

struct Corpus {
  std::string name;
  Split split = Split::Train;
  std::vector<Record> records;
  /// Canonical label index order used by the model.
  std::vector<LabelId> inventory;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

inline std::vector<LabelId> sorted_unique(std::vector<LabelId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Sorted unique labels (training and gold) over all records.
inline std::vector<LabelId> inventory_of(const std::vector<Record>& records) {
  std::vector<LabelId> all;
  for (const auto& r : records) {
    all.insert(all.end(), r.labels.begin(), r.labels.end());
    all.insert(all.end(), r.gold.begin(), r.gold.end());
  }
  return sorted_unique(std::move(all));
}

/// Checks a record's own invariants; recomputes nothing. Entity surfaces are
/// filled from the text when empty.
inline void validate_record(Record& r) {
  if (r.id.empty()) throw ValidationError("record with empty id");
  if (r.text.empty()) throw ValidationError("record '" + r.id + "': empty text");
  if (r.labels.empty()) throw ValidationError("record '" + r.id + "': empty label list");
  for (const auto& l : r.labels) {
    try {
      parse_label(l);
    } catch (const ValidationError& e) {
      throw ValidationError("record '" + r.id + "': " + e.what());
    }
  }
  r.labels = sorted_unique(std::move(r.labels));
  r.gold = sorted_unique(std::move(r.gold));
  const auto cps = unicode::decode(r.text);
  for (auto& e : r.entities) {
    if (e.type.empty()) throw ValidationError("record '" + r.id + "': entity with empty type");
    if (!(e.start < e.end && e.end <= cps.size()))
      throw ValidationError("record '" + r.id + "': entity span [" + std::to_string(e.start) + ", " +
                            std::to_string(e.end) + ") out of bounds for text of length " +
                            std::to_string(cps.size()));
    const auto slice = unicode::encode(std::u32string_view(cps).substr(e.start, e.end - e.start));
    if (e.surface.empty()) {
      e.surface = slice;
    } else if (e.surface != slice) {
      throw ValidationError("record '" + r.id + "': entity surface '" + e.surface +
                            "' does not match text slice '" + slice + "'");
    }
  }
}

/// Validates every record and the inventory. An empty inventory is replaced
/// by the sorted unique labels; a given one must cover every label.
inline void validate_corpus(Corpus& c) {
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    validate_record(c.records[i]);
    auto [it, inserted] = seen.emplace(c.records[i].id, i);
    if (!inserted)
      throw ValidationError("duplicate record id '" + c.records[i].id + "' (records " +
                            std::to_string(it->second + 1) + " and " + std::to_string(i + 1) + ")");
  }
  const auto used = inventory_of(c.records);
  if (c.inventory.empty()) {
    c.inventory = used;
    return;
  }
  const auto inv = sorted_unique(c.inventory);
  if (inv.size() != c.inventory.size()) throw ValidationError("inventory contains duplicates");
  for (const auto& l : used)
    if (!std::binary_search(inv.begin(), inv.end(), l))
      throw ValidationError("label '" + l.str() + "' is missing from the inventory");
}

namespace detail {

inline std::vector<LabelId> labels_from_json(const nlohmann::json& j, std::string_view key) {
  if (!j.is_array()) throw ValidationError(std::string(key) + " must be an array of strings");
  std::vector<LabelId> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ValidationError(std::string(key) + " must be an array of strings");
    out.emplace_back(v.get<std::string>());
  }
  return out;
}

inline Record record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("record must be a JSON object");
  static const std::set<std::string> kKeys = {"id", "text", "labels", "entities", "gold"};
  for (const auto& [k, _] : j.items())
    if (!kKeys.count(k)) throw ValidationError("unknown record key '" + k + "'");
  Record r;
  const auto& id = j.at("id");
  const auto& text = j.at("text");
  if (!id.is_string() || !text.is_string()) throw ValidationError("id and text must be strings");
  r.id = id.get<std::string>();
  r.text = text.get<std::string>();
  r.labels = labels_from_json(j.at("labels"), "labels");
  if (j.contains("gold")) r.gold = labels_from_json(j.at("gold"), "gold");
  if (j.contains("entities")) {
    const auto& ents = j.at("entities");
    if (!ents.is_array()) throw ValidationError("entities must be an array");
    for (const auto& e : ents) {
      EntitySpan s;
      s.type = e.at("type").get<std::string>();
      const auto start = e.at("start").get<long long>();
      const auto end = e.at("end").get<long long>();
      if (start < 0 || end < 0)
        throw ValidationError("record '" + r.id + "': negative entity offset");
      s.start = static_cast<std::size_t>(start);
      s.end = static_cast<std::size_t>(end);
      r.entities.push_back(std::move(s));
    }
  }
  return r;
}

}  // namespace detail

/// Parses the canonical line-delimited format from memory.
inline Corpus parse_corpus(std::string_view content, Split split, std::string name = {}) {
  Corpus c;
  c.name = std::move(name);
  c.split = split;
  std::unordered_map<std::string, std::size_t> id_line;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool first_content = true;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    auto line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (first_content && j.is_object() && j.contains("inventory") && !j.contains("id")) {
      first_content = false;
      try {
        c.inventory = detail::labels_from_json(j.at("inventory"), "inventory");
      } catch (const ValidationError& e) {
        throw ParseError(e.what(), line_no);
      }
      continue;
    }
    first_content = false;
    Record r;
    try {
      r = detail::record_from_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad record: ") + e.what(), line_no);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
    auto [it, inserted] = id_line.emplace(r.id, line_no);
    if (!inserted)
      throw ValidationError("duplicate record id '" + r.id + "' on lines " +
                            std::to_string(it->second) + " and " + std::to_string(line_no));
    c.records.push_back(std::move(r));
  }
  validate_corpus(c);
  return c;
}

inline Corpus load_corpus(const std::filesystem::path& path, Split split) {
  return parse_corpus(io::read_file(path), split, path.stem().string());
}

/// Canonical serialization: an inventory header line, then one record per
/// line with keys in the order id, text, labels, [gold,] entities.
inline std::string serialize_corpus(const Corpus& c) {
  std::string out;
  nlohmann::ordered_json head;
  head["inventory"] = nlohmann::ordered_json::array();
  for (const auto& l : c.inventory) head["inventory"].push_back(l.str());
  out += head.dump();
  out += '\n';
  for (const auto& r : c.records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["text"] = r.text;
    j["labels"] = nlohmann::ordered_json::array();
    for (const auto& l : r.labels) j["labels"].push_back(l.str());
    if (!r.gold.empty()) {
      j["gold"] = nlohmann::ordered_json::array();
      for (const auto& l : r.gold) j["gold"].push_back(l.str());
    }
    j["entities"] = nlohmann::ordered_json::array();
    for (const auto& e : r.entities)
      j["entities"].push_back({{"type", e.type}, {"start", e.start}, {"end", e.end}});
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline void save_corpus(const Corpus& c, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize_corpus(c));
}

struct CorpusStats {
  std::size_t record_count = 0;
  std::size_t label_count = 0;
  /// Records carrying each inventory label among their labels.
  std::map<LabelId, std::size_t> label_frequency;
  std::size_t label_assignments = 0;
  double mean_labels_per_record = 0.0;
};

inline CorpusStats corpus_stats(const Corpus& c) {
  CorpusStats s;
  s.record_count = c.records.size();
  s.label_count = c.inventory.size();
  for (const auto& l : c.inventory) s.label_frequency[l] = 0;
  for (const auto& r : c.records) {
    for (const auto& l : r.labels) ++s.label_frequency[l];
    s.label_assignments += r.labels.size();
  }
  if (s.record_count)
    s.mean_labels_per_record = static_cast<double>(s.label_assignments) / s.record_count;
  return s;
}

inline nlohmann::ordered_json to_json(const CorpusStats& s) {
  nlohmann::ordered_json j;
  j["records"] = s.record_count;
  j["labels"] = s.label_count;
  j["label_assignments"] = s.label_assignments;
  j["mean_labels_per_record"] = s.mean_labels_per_record;
  j["label_frequency"] = nlohmann::ordered_json::object();
  for (const auto& [l, n] : s.label_frequency) j["label_frequency"][l.str()] = n;
  return j;
}

}  // namespace entangle
