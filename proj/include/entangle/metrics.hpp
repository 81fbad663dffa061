#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "entangle/errors.hpp"
#include "entangle/label.hpp"

namespace entangle {

struct Metrics {
  double precision = 0, recall = 0, f1 = 0, em = 0;
  std::uint64_t instances = 0;
};

struct LabelReport {
  LabelId label;
  double precision = 0, recall = 0, f1 = 0;
  std::uint64_t correct = 0, predicted = 0, support = 0;
};

inline double safe_div(double a, double b) { return b == 0 ? 0.0 : a / b; }
inline double harmonic(double p, double r) { return p + r == 0 ? 0.0 : 2 * p * r / (p + r); }

/// Micro-averaged counters over a fixed inventory.
class MetricAccumulator {
 public:
  MetricAccumulator() = default;
  explicit MetricAccumulator(std::vector<LabelId> inventory) : inventory_(std::move(inventory)) {
    for (std::size_t i = 0; i < inventory_.size(); ++i) {
      if (!index_.emplace(inventory_[i], i).second)
        throw ValidationError("duplicate label '" + inventory_[i].str() + "' in inventory");
    }
    nc_.assign(inventory_.size(), 0);
    np_.assign(inventory_.size(), 0);
    ng_.assign(inventory_.size(), 0);
  }

  /// Both arguments are treated as sets; duplicates are ignored.
  void accumulate(std::span<const LabelId> pred, std::span<const LabelId> gold) {
    auto p = indices(pred);
    auto g = indices(gold);
    for (auto i : p) ++np_[i];
    for (auto i : g) ++ng_[i];
    std::vector<std::size_t> both;
    std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(both));
    for (auto i : both) ++nc_[i];
    ++m_;
    if (p == g) ++em_hits_;
  }

  void merge(const MetricAccumulator& o) {
    if (o.inventory_ != inventory_) throw ValidationError("cannot merge accumulators over different inventories");
    for (std::size_t i = 0; i < nc_.size(); ++i) {
      nc_[i] += o.nc_[i];
      np_[i] += o.np_[i];
      ng_[i] += o.ng_[i];
    }
    m_ += o.m_;
    em_hits_ += o.em_hits_;
  }

  Metrics finalize() const {
    if (m_ == 0) throw ValidationError("no instances accumulated");
    std::uint64_t c = 0, p = 0, g = 0;
    for (std::size_t i = 0; i < nc_.size(); ++i) {
      c += nc_[i];
      p += np_[i];
      g += ng_[i];
    }
    Metrics r;
    r.precision = safe_div(double(c), double(p));
    r.recall = safe_div(double(c), double(g));
    r.f1 = harmonic(r.precision, r.recall);
    r.em = double(em_hits_) / double(m_);
    r.instances = m_;
    return r;
  }

  std::vector<LabelReport> per_label_report() const {
    if (m_ == 0) throw ValidationError("no instances accumulated");
    std::vector<LabelReport> out;
    out.reserve(inventory_.size());
    for (std::size_t i = 0; i < inventory_.size(); ++i) {
      LabelReport r{inventory_[i]};
      r.correct = nc_[i];
      r.predicted = np_[i];
      r.support = ng_[i];
      r.precision = safe_div(double(nc_[i]), double(np_[i]));
      r.recall = safe_div(double(nc_[i]), double(ng_[i]));
      r.f1 = harmonic(r.precision, r.recall);
      out.push_back(std::move(r));
    }
    return out;
  }

  const std::vector<LabelId>& inventory() const { return inventory_; }
  std::uint64_t instances() const { return m_; }
  std::uint64_t em_hits() const { return em_hits_; }

 private:
  std::vector<std::size_t> indices(std::span<const LabelId> ls) const {
    std::vector<std::size_t> out;
    out.reserve(ls.size());
    for (const auto& l : ls) {
      auto it = index_.find(l);
      if (it == index_.end()) throw ValidationError("label '" + l.str() + "' is not in the inventory");
      out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<LabelId> inventory_;
  std::unordered_map<LabelId, std::size_t> index_;
  std::vector<std::uint64_t> nc_, np_, ng_;
  std::uint64_t m_ = 0, em_hits_ = 0;
};

/// Fraction as a percentage rounded to two decimals.
inline double pct2(double x) { return std::round(x * 10000.0) / 100.0; }

inline nlohmann::ordered_json to_json(const Metrics& m) {
  return {{"precision", pct2(m.precision)},
          {"recall", pct2(m.recall)},
          {"f1", pct2(m.f1)},
          {"em", pct2(m.em)},
          {"instances", m.instances}};
}

inline nlohmann::ordered_json metrics_report(const MetricAccumulator& acc) {
  auto j = to_json(acc.finalize());
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : acc.per_label_report())
    rows.push_back({{"label", r.label.str()},
                    {"precision", pct2(r.precision)},
                    {"recall", pct2(r.recall)},
                    {"f1", pct2(r.f1)},
                    {"support", r.support},
                    {"predicted", r.predicted}});
  j["per_label"] = std::move(rows);
  return j;
}

}  // namespace entangle
