#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "entangle/errors.hpp"
#include "entangle/label.hpp"

namespace entangle {

/// Symmetric label-pair counts of joint prediction; the diagonal holds
/// per-label prediction counts.
struct CooccurrenceMatrix {
  std::vector<LabelId> labels;
  std::vector<std::uint64_t> counts;  // row-major n x n

  std::size_t size() const { return labels.size(); }
  std::uint64_t at(std::size_t a, std::size_t b) const { return counts[a * size() + b]; }
};

inline CooccurrenceMatrix cooccurrence(const std::vector<std::vector<LabelId>>& predictions,
                                       const std::vector<LabelId>& inventory) {
  CooccurrenceMatrix C{inventory, std::vector<std::uint64_t>(inventory.size() * inventory.size(), 0)};
  std::unordered_map<LabelId, std::size_t> idx;
  for (std::size_t i = 0; i < inventory.size(); ++i) idx.emplace(inventory[i], i);
  const std::size_t n = inventory.size();
  for (const auto& pred : predictions) {
    std::vector<std::size_t> ix;
    for (const auto& l : pred) {
      auto it = idx.find(l);
      if (it == idx.end()) throw ValidationError("predicted label '" + l.str() + "' is not in the inventory");
      ix.push_back(it->second);
    }
    std::sort(ix.begin(), ix.end());
    ix.erase(std::unique(ix.begin(), ix.end()), ix.end());
    for (auto a : ix)
      for (auto b : ix) ++C.counts[a * n + b];
  }
  return C;
}

/// d(a,b) = 1 - C[a][b] / max(1, min(C[a][a], C[b][b])), clipped to [0,1].
inline std::vector<double> cooccurrence_distance(const CooccurrenceMatrix& C) {
  const std::size_t n = C.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const double den = std::max<double>(1.0, double(std::min(C.at(a, a), C.at(b, b))));
      d[a * n + b] = std::clamp(1.0 - double(C.at(a, b)) / den, 0.0, 1.0);
    }
  return d;
}

inline constexpr int kNoise = -1;

/// DBSCAN over a precomputed n x n distance matrix. A point's neighborhood
/// includes itself. Points are visited in index order, so cluster ids follow
/// first encounter.
inline std::vector<int> dbscan(const std::vector<double>& dist, std::size_t n, double eps, std::size_t min_pts) {
  if (dist.size() != n * n) throw ValidationError("distance matrix is not n x n");
  if (!(eps > 0 && eps <= 1)) throw ValidationError("eps must be in (0, 1]");
  if (min_pts < 1) throw ValidationError("min_pts must be >= 1");
  auto neighbors = [&](std::size_t p) {
    std::vector<std::size_t> out;
    for (std::size_t q = 0; q < n; ++q)
      if (dist[p * n + q] <= eps) out.push_back(q);
    return out;
  };
  constexpr int kUnvisited = -2;
  std::vector<int> label(n, kUnvisited);
  int next = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (label[p] != kUnvisited) continue;
    auto nb = neighbors(p);
    if (nb.size() < min_pts) {
      label[p] = kNoise;
      continue;
    }
    const int c = next++;
    label[p] = c;
    std::vector<std::size_t> queue(nb.begin(), nb.end());
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const auto q = queue[qi];
      if (label[q] == kNoise) label[q] = c;  // border point
      if (label[q] != kUnvisited) continue;
      label[q] = c;
      auto nq = neighbors(q);
      if (nq.size() >= min_pts) queue.insert(queue.end(), nq.begin(), nq.end());
    }
  }
  return label;
}

struct ClusterAssignment {
  std::vector<LabelId> labels;
  std::vector<int> cluster;
};

/// A family is recovered when all its members share one non-noise cluster
/// and that cluster holds no label that belongs only to other families.
/// `kind` restricts which families are scored; purity always considers the
/// whole registry.
inline double family_recovery(const ClusterAssignment& a, const FamilyRegistry& reg,
                              std::optional<FamilyKind> kind = std::nullopt) {
  const auto fams = reg.families();
  std::map<LabelId, int> cl;
  for (std::size_t i = 0; i < a.labels.size(); ++i) cl[a.labels[i]] = a.cluster[i];
  std::map<LabelId, std::set<std::size_t>> owners;
  for (std::size_t f = 0; f < fams.size(); ++f)
    for (const auto& m : fams[f].members) owners[m].insert(f);
  std::size_t total = 0, recovered = 0;
  for (std::size_t f = 0; f < fams.size(); ++f) {
    if (kind && fams[f].kind != *kind) continue;
    ++total;
    std::optional<int> id;
    bool ok = true;
    for (const auto& m : fams[f].members) {
      auto it = cl.find(m);
      if (it == cl.end() || it->second == kNoise || (id && *id != it->second)) {
        ok = false;
        break;
      }
      id = it->second;
    }
    if (!ok) continue;
    for (std::size_t i = 0; i < a.labels.size() && ok; ++i) {
      if (a.cluster[i] != *id) continue;
      auto ow = owners.find(a.labels[i]);
      if (ow != owners.end() && !ow->second.count(f)) ok = false;
    }
    if (ok) ++recovered;
  }
  if (total == 0) throw ValidationError("registry has no families to score");
  return double(recovered) / double(total);
}

/// Classical MDS: the top two eigenvectors of the double-centered squared
/// distance Gram matrix, scaled by sqrt(eigenvalue). Each axis is oriented so
/// that its largest-magnitude coordinate is positive.
inline std::vector<std::array<double, 2>> mds_coordinates(const std::vector<double>& dist, std::size_t n) {
  std::vector<std::array<double, 2>> out(n, {0.0, 0.0});
  if (n == 0) return out;
  Eigen::MatrixXd D2(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) D2(i, j) = dist[i * n + j] * dist[i * n + j];
  const Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / double(n));
  const Eigen::MatrixXd B = -0.5 * J * D2 * J;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success) throw NumericalError("eigen decomposition failed");
  for (int axis = 0; axis < 2 && axis < int(n); ++axis) {
    const int col = int(n) - 1 - axis;  // eigenvalues ascend
    const double lam = std::max(0.0, es.eigenvalues()(col));
    Eigen::VectorXd v = es.eigenvectors().col(col);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    for (std::size_t i = 0; i < n; ++i) {
      double x = v(Eigen::Index(i)) * std::sqrt(lam);
      if (std::abs(x) < 1e-12) x = 0.0;
      out[i][axis] = x;
    }
  }
  return out;
}

inline std::string cooccurrence_csv(const CooccurrenceMatrix& C) {
  std::string out = "row,col,count\n";
  for (std::size_t a = 0; a < C.size(); ++a)
    for (std::size_t b = 0; b < C.size(); ++b)
      out += C.labels[a].str() + "," + C.labels[b].str() + "," + std::to_string(C.at(a, b)) + "\n";
  return out;
}

inline std::string coordinates_csv(const std::vector<LabelId>& labels,
                                   const std::vector<std::array<double, 2>>& xy) {
  std::string out = "label,x,y\n";
  char buf[64];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f\n", xy[i][0], xy[i][1]);
    out += labels[i].str() + buf;
  }
  return out;
}

inline nlohmann::ordered_json to_json(const ClusterAssignment& a) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < a.labels.size(); ++i) j[a.labels[i].str()] = a.cluster[i];
  return j;
}

}  // namespace entangle
