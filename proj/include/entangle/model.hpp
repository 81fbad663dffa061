#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "entangle/corpus.hpp"
#include "entangle/encoder.hpp"
#include "entangle/errors.hpp"
#include "entangle/io.hpp"
#include "entangle/losses.hpp"
#include "entangle/metrics.hpp"
#include "entangle/rng.hpp"

namespace entangle {

enum class OptimizerKind { Sgd, SgdMomentum, Adam };
enum class TrainMode { Pu, UpperBound };

inline std::string_view to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::SgdMomentum: return "sgd_momentum";
    case OptimizerKind::Adam: return "adam";
  }
  return "?";
}

inline OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "sgd_momentum") return OptimizerKind::SgdMomentum;
  if (s == "adam") return OptimizerKind::Adam;
  throw ValidationError("unknown optimizer '" + std::string(s) + "'");
}

inline std::string_view to_string(TrainMode m) { return m == TrainMode::Pu ? "pu" : "upper_bound"; }

inline TrainMode parse_train_mode(std::string_view s) {
  if (s == "pu") return TrainMode::Pu;
  if (s == "upper_bound") return TrainMode::UpperBound;
  throw ValidationError("unknown training mode '" + std::string(s) + "'");
}

struct TrainConfig {
  int epochs = 20;
  std::size_t batch_size = 512;
  double learning_rate = 2e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::Pu;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline void validate(const TrainConfig& c) {
  if (c.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (c.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(c.learning_rate > 0) || !std::isfinite(c.learning_rate)) throw ValidationError("learning_rate must be > 0");
  if (!(c.momentum >= 0 && c.momentum < 1)) throw ValidationError("momentum must be in [0, 1)");
  if (!(c.adam_beta1 >= 0 && c.adam_beta1 < 1) || !(c.adam_beta2 >= 0 && c.adam_beta2 < 1))
    throw ValidationError("adam betas must be in [0, 1)");
  if (!(c.adam_eps > 0)) throw ValidationError("adam_eps must be > 0");
}

/// W is |L| x D row-major; b has |L| entries.
struct ModelParameters {
  std::vector<LabelId> inventory;
  EncoderConfig encoder;
  std::vector<float> W;
  std::vector<float> b;

  std::size_t rows() const { return inventory.size(); }
  std::size_t dim() const { return encoder.dim; }

  friend bool operator==(const ModelParameters&, const ModelParameters&) = default;
};

inline ModelParameters zero_parameters(std::vector<LabelId> inventory, const EncoderConfig& enc) {
  validate(enc);
  ModelParameters p;
  p.inventory = std::move(inventory);
  p.encoder = enc;
  p.W.assign(p.rows() * p.dim(), 0.0f);
  p.b.assign(p.rows(), 0.0f);
  return p;
}

inline void validate(const ModelParameters& p) {
  if (p.W.size() != p.rows() * p.dim() || p.b.size() != p.rows())
    throw ValidationError("parameter shape does not match inventory and encoder dim");
  for (float w : p.W)
    if (!std::isfinite(w)) throw NumericalError("non-finite weight");
  for (float w : p.b)
    if (!std::isfinite(w)) throw NumericalError("non-finite bias");
}

struct ForwardResult {
  std::vector<double> logits;
  std::vector<double> probs;
};

/// s = W x + b (unclipped); probabilities use the clipped sigmoid.
inline std::vector<double> logits(const ModelParameters& p, const FeatureVector& fv) {
  if (fv.dim != p.dim())
    throw ValidationError("feature dim " + std::to_string(fv.dim) + " does not match model dim " +
                          std::to_string(p.dim()));
  std::vector<double> s(p.rows());
  for (std::size_t l = 0; l < p.rows(); ++l) {
    const float* row = p.W.data() + l * p.dim();
    double acc = p.b[l];
    for (std::size_t k = 0; k < fv.nnz(); ++k) acc += double(row[fv.indices[k]]) * fv.values[k];
    s[l] = acc;
  }
  return s;
}

inline ForwardResult forward(const ModelParameters& p, const FeatureVector& fv) {
  ForwardResult r;
  r.logits = logits(p, fv);
  r.probs.reserve(r.logits.size());
  for (double s : r.logits) r.probs.push_back(sigmoid(s));
  return r;
}

/// Labels with p > 0.5, strictly; in inventory order.
inline std::vector<LabelId> predict(const ModelParameters& p, const FeatureVector& fv) {
  std::vector<LabelId> out;
  const auto s = logits(p, fv);
  for (std::size_t l = 0; l < s.size(); ++l)
    if (sigmoid(s[l]) > 0.5) out.push_back(p.inventory[l]);
  return out;
}

inline std::vector<LabelId> predict(const ModelParameters& p, std::string_view text) {
  return predict(p, featurize(text, p.encoder));
}

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  /// Negative when no validation records were given.
  double valid_f1 = -1;
};

struct TrainResult {
  ModelParameters params;
  std::vector<EpochRecord> history;
};

namespace detail {

inline std::unordered_map<LabelId, std::size_t> label_index(const std::vector<LabelId>& inv) {
  std::unordered_map<LabelId, std::size_t> m;
  for (std::size_t i = 0; i < inv.size(); ++i) m.emplace(inv[i], i);
  return m;
}

inline std::vector<std::size_t> to_indices(const std::vector<LabelId>& ls,
                                           const std::unordered_map<LabelId, std::size_t>& idx,
                                           const std::string& id) {
  std::vector<std::size_t> out;
  for (const auto& l : ls) {
    auto it = idx.find(l);
    if (it == idx.end()) throw ValidationError("record '" + id + "': label '" + l.str() + "' not in inventory");
    out.push_back(it->second);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

inline Metrics evaluate(const ModelParameters& p, const Corpus& c) {
  MetricAccumulator acc(p.inventory);
  for (const auto& r : c.records) acc.accumulate(predict(p, r.text), r.labels);
  return acc.finalize();
}

/// Mini-batch training. Instances are visited in an order drawn from the
/// "shuffle" stream each epoch; the batch gradient is the mean of instance
/// gradients summed in visit order. Negative samples come from a separate
/// "negatives" stream.
inline TrainResult train(const Corpus& train_set, const Corpus& valid, const EncoderConfig& enc,
                         const LossConfig& loss_cfg, const TrainConfig& cfg) {
  validate(enc);
  validate(loss_cfg);
  validate(cfg);
  if (train_set.records.empty()) throw ValidationError("training corpus is empty");
  if (!valid.records.empty() && valid.inventory != train_set.inventory)
    throw ValidationError("training and validation corpora have different inventories");

  TrainResult res;
  res.params = zero_parameters(train_set.inventory, enc);
  auto& P = res.params;
  const std::size_t L = P.rows(), D = P.dim();
  if (L == 0) throw ValidationError("empty label inventory");

  const auto idx = detail::label_index(P.inventory);
  std::vector<FeatureVector> feats;
  std::vector<std::vector<std::size_t>> positives;
  feats.reserve(train_set.records.size());
  for (const auto& r : train_set.records) {
    feats.push_back(featurize(r.text, enc));
    const auto& ls = (cfg.mode == TrainMode::UpperBound && !r.gold.empty()) ? r.gold : r.labels;
    positives.push_back(detail::to_indices(ls, idx, r.id));
  }

  std::vector<double> gW(L * D, 0.0), gb(L, 0.0);
  std::vector<float> m1, m2;
  if (cfg.optimizer != OptimizerKind::Sgd) m1.assign(L * D + L, 0.0f);
  if (cfg.optimizer == OptimizerKind::Adam) m2.assign(L * D + L, 0.0f);
  std::vector<std::uint8_t> touched(D, 0);
  std::vector<std::uint32_t> touched_cols;

  Rng shuffle_rng = Rng::derive(cfg.seed, "shuffle");
  Rng neg_rng = Rng::derive(cfg.seed, "negatives");
  std::vector<std::size_t> order(feats.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::uint64_t step = 0;
  double bc1 = 1, bc2 = 1;  // Adam bias corrections for the current step

  auto apply = [&](std::size_t k, double g, float& w) {
    switch (cfg.optimizer) {
      case OptimizerKind::Sgd: w = float(double(w) - cfg.learning_rate * g); break;
      case OptimizerKind::SgdMomentum: {
        const double v = cfg.momentum * m1[k] + g;
        m1[k] = float(v);
        w = float(double(w) - cfg.learning_rate * v);
        break;
      }
      case OptimizerKind::Adam: {
        // zero moments with zero gradient give a zero update
        if (g == 0.0 && m1[k] == 0.0f && m2[k] == 0.0f) return;
        const double a = cfg.adam_beta1 * m1[k] + (1 - cfg.adam_beta1) * g;
        const double v = cfg.adam_beta2 * m2[k] + (1 - cfg.adam_beta2) * g * g;
        m1[k] = float(a);
        m2[k] = float(v);
        const double ah = a / bc1;
        const double vh = v / bc2;
        w = float(double(w) - cfg.learning_rate * ah / (std::sqrt(vh) + cfg.adam_eps));
        break;
      }
    }
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_b = 1.0 / double(end - start);
      for (std::size_t oi = start; oi < end; ++oi) {
        const std::size_t i = order[oi];
        const auto& fv = feats[i];
        const auto s = logits(P, fv);
        const auto lr = instance_loss(loss_cfg, s, positives[i], neg_rng);
        if (!std::isfinite(lr.value))
          throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", record '" +
                               train_set.records[i].id + "'");
        epoch_loss += lr.value;
        for (std::size_t l = 0; l < L; ++l) {
          const double g = lr.grad[l] * inv_b;
          if (g == 0.0) continue;
          gb[l] += g;
          double* row = gW.data() + l * D;
          for (std::size_t k = 0; k < fv.nnz(); ++k) row[fv.indices[k]] += g * fv.values[k];
        }
        for (auto c : fv.indices)
          if (!touched[c]) {
            touched[c] = 1;
            touched_cols.push_back(c);
          }
      }
      ++step;
      bc1 = 1 - std::pow(cfg.adam_beta1, double(step));
      bc2 = 1 - std::pow(cfg.adam_beta2, double(step));
      if (cfg.optimizer == OptimizerKind::Adam) {
        for (std::size_t k = 0; k < L * D; ++k) apply(k, gW[k], P.W[k]);
      } else {
        // sgd touches only nonzero gradients; momentum decays everywhere
        if (cfg.optimizer == OptimizerKind::Sgd) {
          for (auto c : touched_cols)
            for (std::size_t l = 0; l < L; ++l) apply(l * D + c, gW[l * D + c], P.W[l * D + c]);
        } else {
          for (std::size_t k = 0; k < L * D; ++k) apply(k, gW[k], P.W[k]);
        }
      }
      for (std::size_t l = 0; l < L; ++l) apply(L * D + l, gb[l], P.b[l]);
      for (auto c : touched_cols) {
        touched[c] = 0;
        for (std::size_t l = 0; l < L; ++l) gW[l * D + c] = 0.0;
      }
      touched_cols.clear();
      std::fill(gb.begin(), gb.end(), 0.0);
      for (float w : P.b)
        if (!std::isfinite(w)) throw NumericalError("non-finite bias at epoch " + std::to_string(epoch));
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / double(order.size());
    if (!std::isfinite(rec.train_loss)) throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
    if (!valid.records.empty()) rec.valid_f1 = evaluate(P, valid).f1;
    res.history.push_back(rec);
  }
  validate(P);
  return res;
}

inline nlohmann::ordered_json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"optimizer", std::string(to_string(c.optimizer))},
          {"momentum", c.momentum},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"seed", c.seed},
          {"mode", std::string(to_string(c.mode))}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c = {}) {
  if (!j.is_object()) throw ValidationError("train config must be an object");
  static const char* keys[] = {"epochs",     "batch_size", "learning_rate", "optimizer", "momentum",
                               "adam_beta1", "adam_beta2", "adam_eps",      "seed",      "mode"};
  for (const auto& [k, _] : j.items())
    if (std::find_if(std::begin(keys), std::end(keys), [&](const char* x) { return k == x; }) == std::end(keys))
      throw ValidationError("unknown key '" + k + "' in train config");
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    c.momentum = j.value("momentum", c.momentum);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    c.seed = j.value("seed", c.seed);
    if (j.contains("mode")) c.mode = parse_train_mode(j.at("mode").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("train config: ") + e.what());
  }
  validate(c);
  return c;
}

inline nlohmann::ordered_json to_json(const EpochRecord& e) {
  nlohmann::ordered_json j{{"epoch", e.epoch}, {"train_loss", e.train_loss}};
  if (e.valid_f1 >= 0) j["valid_f1"] = e.valid_f1;
  return j;
}

// ---- artifact ------------------------------------------------------------
//
// <name>.json  manifest: format, inventory, configs, weight file name, checksum
// <name>.bin   "ENTGLW01", u64 rows, u64 dim, f32 W[rows*dim], f32 b[rows],
//              u64 FNV-1a of every preceding byte; all little-endian

inline constexpr std::string_view kModelFormat = "entangle.model/1";
inline constexpr std::string_view kWeightsMagic = "ENTGLW01";

struct ModelArtifact {
  ModelParameters params;
  LossConfig loss;
  TrainConfig train;
};

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}
inline void put_f32(std::string& out, float f) {
  const auto v = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}
inline std::uint64_t get_u64(std::string_view s, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(s[at + i])) << (8 * i);
  return v;
}
inline float get_f32(std::string_view s, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(s[at + i])) << (8 * i);
  return std::bit_cast<float>(v);
}

}  // namespace detail

inline std::string serialize_weights(const ModelParameters& p) {
  std::string out(kWeightsMagic);
  out.reserve(8 + 16 + 4 * (p.W.size() + p.b.size()) + 8);
  detail::put_u64(out, p.rows());
  detail::put_u64(out, p.dim());
  for (float w : p.W) detail::put_f32(out, w);
  for (float w : p.b) detail::put_f32(out, w);
  detail::put_u64(out, fnv1a64(out));
  return out;
}

inline void parse_weights(std::string_view bytes, ModelParameters& p) {
  if (bytes.size() < 32 || bytes.substr(0, 8) != kWeightsMagic) throw ValidationError("bad weight file magic");
  const auto rows = detail::get_u64(bytes, 8), dim = detail::get_u64(bytes, 16);
  if (rows != p.rows() || dim != p.dim()) throw ValidationError("weight file shape does not match manifest");
  const std::size_t n = rows * dim + rows;
  if (bytes.size() != 24 + 4 * n + 8) throw ValidationError("weight file has the wrong size");
  if (detail::get_u64(bytes, 24 + 4 * n) != fnv1a64(bytes.substr(0, 24 + 4 * n)))
    throw ValidationError("weight file checksum mismatch");
  p.W.resize(rows * dim);
  p.b.resize(rows);
  std::size_t at = 24;
  for (auto& w : p.W) w = detail::get_f32(bytes, at), at += 4;
  for (auto& w : p.b) w = detail::get_f32(bytes, at), at += 4;
  validate(p);
}

inline std::filesystem::path weights_path(const std::filesystem::path& manifest) {
  auto p = manifest;
  p.replace_extension(".bin");
  return p;
}

inline void save_model(const ModelArtifact& a, const std::filesystem::path& manifest) {
  validate(a.params);
  const auto bin = serialize_weights(a.params);
  const auto wp = weights_path(manifest);
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  auto inv = nlohmann::ordered_json::array();
  for (const auto& l : a.params.inventory) inv.push_back(l.str());
  j["inventory"] = inv;
  j["encoder"] = to_json(a.params.encoder);
  j["loss"] = to_json(a.loss);
  j["train"] = to_json(a.train);
  j["weights"] = wp.filename().string();
  j["checksum"] = hex64(fnv1a64(bin));
  io::write_file_atomic(wp, bin);
  io::write_file_atomic(manifest, j.dump(2) + "\n");
}

inline ModelArtifact load_model(const std::filesystem::path& manifest) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("model manifest: " + std::string(e.what()));
  }
  ModelArtifact a;
  try {
    if (j.at("format").get<std::string>() != kModelFormat) throw ValidationError("unsupported model format");
    for (const auto& l : j.at("inventory")) a.params.inventory.emplace_back(l.get<std::string>());
    a.params.encoder = encoder_config_from_json(j.at("encoder"));
    a.loss = loss_config_from_json(j.at("loss"));
    a.train = train_config_from_json(j.at("train"));
    const auto bin = io::read_file(manifest.parent_path() / j.at("weights").get<std::string>());
    if (hex64(fnv1a64(bin)) != j.at("checksum").get<std::string>())
      throw ValidationError("weight file does not match manifest checksum");
    parse_weights(bin, a.params);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("model manifest: " + std::string(e.what()));
  }
  return a;
}

}  // namespace entangle
