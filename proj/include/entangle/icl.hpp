#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "entangle/corpus.hpp"
#include "entangle/errors.hpp"
#include "entangle/hash.hpp"
#include "entangle/io.hpp"
#include "entangle/metrics.hpp"
#include "entangle/rng.hpp"
#include "entangle/unicode.hpp"

namespace entangle {

class TransportError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::string_view kIclTaskDescription =
    "Classify the intents of a user utterance. An utterance may express more than one intent. "
    "Answer with every matching intent from the options, separated by commas.";

/// First training record, by id, whose labels contain each inventory label.
inline std::vector<const Record*> demonstrations(const Corpus& train, const std::vector<LabelId>& inventory) {
  std::map<LabelId, const Record*> first;
  for (const auto& r : train.records)
    for (const auto& l : r.labels) {
      auto [it, ins] = first.emplace(l, &r);
      if (!ins && r.id < it->second->id) it->second = &r;
    }
  std::vector<const Record*> out;
  for (const auto& l : inventory) {
    auto it = first.find(l);
    if (it == first.end()) throw ValidationError("label '" + l.str() + "' has no training record to demonstrate it");
    out.push_back(it->second);
  }
  return out;
}

inline std::string build_prompt(const std::vector<const Record*>& demos, const std::vector<LabelId>& inventory,
                                std::string_view query) {
  std::string p(kIclTaskDescription);
  p += "\n\nExamples:\n";
  for (std::size_t i = 0; i < inventory.size(); ++i) {
    p += "Utterance: " + demos[i]->text + "\n";
    p += "Intents: " + inventory[i].str() + "\n\n";
  }
  p += "Options: ";
  for (std::size_t i = 0; i < inventory.size(); ++i) {
    if (i) p += ", ";
    p += inventory[i].str();
  }
  p += "\n\nUtterance: ";
  p += query;
  p += "\nIntents:";
  return p;
}

inline std::string build_prompt(const Corpus& train, const std::vector<LabelId>& inventory, std::string_view query) {
  return build_prompt(demonstrations(train, inventory), inventory, query);
}

inline std::string prompt_key(std::string_view prompt) { return hex64(fnv1a64(prompt)); }

namespace detail {

/// Whether a neighbouring code point lets a match stand as its own word.
/// Masked (0) spaces and punctuation do, '_' does not, and space-free
/// scripts always do.
inline bool word_break(char32_t c) {
  if (c == 0 || unicode::is_spacefree_script(c)) return true;
  return c != U'_' && !unicode::is_word_char(c);
}

}  // namespace detail

/// Case-insensitive option matching, longest option first. Matched spans are
/// masked so an option embedded in a longer matched option is not counted
/// again. Outside space-free scripts a match must not continue a word.
inline std::vector<LabelId> parse_response(std::string_view completion, const std::vector<LabelId>& options) {
  std::u32string text = unicode::decode(unicode::to_lower(completion));
  std::vector<std::pair<std::u32string, const LabelId*>> opts;
  for (const auto& o : options) opts.emplace_back(unicode::decode(unicode::to_lower(o.str())), &o);
  std::stable_sort(opts.begin(), opts.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
    return a.first < b.first;
  });
  std::vector<LabelId> out;
  for (const auto& [o, label] : opts) {
    if (o.empty()) continue;
    bool hit = false;
    for (std::size_t at = text.find(o); at != std::u32string::npos; at = text.find(o, at + 1)) {
      const std::size_t end = at + o.size();
      const bool left_ok =
          at == 0 || detail::word_break(text[at - 1]) || unicode::is_spacefree_script(o.front());
      const bool right_ok =
          end == text.size() || detail::word_break(text[end]) || unicode::is_spacefree_script(o.back());
      if (!left_ok || !right_ok) continue;
      hit = true;
      std::fill(text.begin() + std::ptrdiff_t(at), text.begin() + std::ptrdiff_t(end), char32_t(0));
    }
    if (hit) out.push_back(*label);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// n records drawn without replacement; kept in corpus order.
inline Corpus sample_eval_subset(const Corpus& test, std::size_t n, std::uint64_t seed) {
  if (n > test.records.size())
    throw ValidationError("cannot sample " + std::to_string(n) + " of " + std::to_string(test.records.size()) +
                          " test records");
  auto rng = Rng::derive(seed, "icl-subset");
  auto pick = rng.sample_without_replacement(test.records.size(), n);
  std::sort(pick.begin(), pick.end());
  Corpus out{test.name, test.split, {}, test.inventory};
  for (auto i : pick) out.records.push_back(test.records[i]);
  return out;
}

struct GenerationParams {
  double temperature = 0.0;
  int max_tokens = 64;
  std::string model;
};

class CompletionTransport {
 public:
  virtual ~CompletionTransport() = default;
  /// Must be safe to call concurrently. Throws TransportError on failure.
  virtual std::string send(const std::string& prompt, const GenerationParams& params) = 0;
};

/// Replays completions keyed by prompt hash.
class MockTransport : public CompletionTransport {
 public:
  MockTransport() = default;
  explicit MockTransport(std::map<std::string, std::string> by_key) : by_key_(std::move(by_key)) {}

  static MockTransport from_file(const std::filesystem::path& p) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(io::read_file(p));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("mock transport file '" + p.string() + "': " + e.what());
    }
    if (!j.is_object()) throw ValidationError("mock transport file must map prompt hashes to strings");
    std::map<std::string, std::string> m;
    for (const auto& [k, v] : j.items()) {
      if (!v.is_string()) throw ValidationError("mock completion for '" + k + "' is not a string");
      m[k] = v.get<std::string>();
    }
    return MockTransport(std::move(m));
  }

  void add(const std::string& prompt, std::string completion) { by_key_[prompt_key(prompt)] = std::move(completion); }

  std::string send(const std::string& prompt, const GenerationParams&) override {
    auto it = by_key_.find(prompt_key(prompt));
    if (it == by_key_.end()) throw TransportError("no recorded completion for prompt " + prompt_key(prompt));
    return it->second;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : by_key_) j[k] = v;
    return j;
  }

 private:
  std::map<std::string, std::string> by_key_;
};

class FunctionTransport : public CompletionTransport {
 public:
  explicit FunctionTransport(std::function<std::string(const std::string&)> f) : f_(std::move(f)) {}
  std::string send(const std::string& prompt, const GenerationParams&) override { return f_(prompt); }

 private:
  std::function<std::string(const std::string&)> f_;
};

/// Mock that answers every prompt of `subset` with its gold labels.
inline MockTransport oracle_transport(const Corpus& train, const Corpus& subset, const std::vector<LabelId>& inventory) {
  const auto demos = demonstrations(train, inventory);
  MockTransport t;
  for (const auto& r : subset.records) {
    std::string ans;
    for (const auto& l : r.labels) ans += (ans.empty() ? "" : ", ") + l.str();
    t.add(build_prompt(demos, inventory, r.text), ans);
  }
  return t;
}

struct TranscriptEntry {
  std::size_t index = 0;
  std::string id;
  std::string prompt_hash;
  std::optional<std::string> completion;
  std::string error;
  std::vector<LabelId> predicted;
  std::vector<LabelId> gold;
};

struct IclResult {
  Metrics metrics;
  std::size_t failures = 0;
  std::vector<TranscriptEntry> transcript;
};

/// Sends one prompt per subset record with up to `workers` requests in
/// flight. Results are collected by record index, so the transcript and
/// metrics do not depend on completion order. Failed requests are recorded
/// and left out of the metrics.
inline IclResult run_icl_eval(CompletionTransport& transport, const Corpus& train, const Corpus& subset,
                              const std::vector<LabelId>& inventory, const GenerationParams& params = {},
                              std::size_t workers = 1) {
  if (subset.records.empty()) throw ValidationError("ICL evaluation subset is empty");
  const auto demos = demonstrations(train, inventory);
  const std::size_t n = subset.records.size();
  std::vector<TranscriptEntry> tr(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto& r = subset.records[i];
      auto& e = tr[i];
      e.index = i;
      e.id = r.id;
      e.gold = r.labels;
      const auto prompt = build_prompt(demos, inventory, r.text);
      e.prompt_hash = prompt_key(prompt);
      try {
        e.completion = transport.send(prompt, params);
        e.predicted = parse_response(*e.completion, inventory);
      } catch (const std::exception& ex) {
        e.completion.reset();
        e.error = ex.what();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, n);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  IclResult res;
  MetricAccumulator acc(inventory);
  for (const auto& e : tr) {
    if (!e.completion) {
      ++res.failures;
      continue;
    }
    acc.accumulate(e.predicted, e.gold);
  }
  if (res.failures == n) throw TransportError("all " + std::to_string(n) + " ICL requests failed");
  res.metrics = acc.finalize();
  res.transcript = std::move(tr);
  return res;
}

inline nlohmann::ordered_json to_json(const TranscriptEntry& e) {
  auto labels = [](const std::vector<LabelId>& ls) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& l : ls) a.push_back(l.str());
    return a;
  };
  nlohmann::ordered_json j{{"index", e.index}, {"id", e.id}, {"prompt_hash", e.prompt_hash}};
  if (e.completion) {
    j["completion"] = *e.completion;
    j["predicted"] = labels(e.predicted);
  } else {
    j["error"] = e.error;
  }
  j["gold"] = labels(e.gold);
  return j;
}

inline std::string transcript_jsonl(const std::vector<TranscriptEntry>& tr) {
  std::string out;
  for (const auto& e : tr) out += to_json(e).dump() + "\n";
  return out;
}

}  // namespace entangle
