#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "entangle/errors.hpp"
#include "entangle/rng.hpp"

namespace entangle {

/// Logits are clipped to +-kLogitClip before any exponential.
inline constexpr double kLogitClip = 30.0;
/// Arguments of log() are floored at kLogFloor.
inline constexpr double kLogFloor = 1e-12;

/// Scalar loss plus its gradient with respect to the logits.
struct LossResult {
  double value = 0.0;
  std::vector<double> grad;
};

namespace detail {

/// Sigmoid pieces for one clipped logit. `dlp`/`dlq` are the derivatives of
/// the floored logs with respect to the unclipped logit, so they vanish
/// where the clip or the floor is active.
struct SigmoidParts {
  double p, q;      // p = sigmoid(s), q = 1 - p, both computed directly
  double lp, lq;    // floored logs
  double dp;        // dp/ds (dq/ds = -dp)
  double dlp, dlq;  // d log p / ds, d log q / ds
};

inline SigmoidParts sigmoid_parts(double s) {
  const bool clipped = std::abs(s) > kLogitClip;
  const double c = std::clamp(s, -kLogitClip, kLogitClip);
  SigmoidParts r;
  r.p = 1.0 / (1.0 + std::exp(-c));
  r.q = 1.0 / (1.0 + std::exp(c));
  r.lp = std::log(std::max(r.p, kLogFloor));
  r.lq = std::log(std::max(r.q, kLogFloor));
  r.dp = clipped ? 0.0 : r.p * r.q;
  r.dlp = (clipped || r.p <= kLogFloor) ? 0.0 : r.q;
  r.dlq = (clipped || r.q <= kLogFloor) ? 0.0 : -r.p;
  return r;
}

inline double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace detail

inline double sigmoid(double s) {
  const double c = std::clamp(s, -kLogitClip, kLogitClip);
  return 1.0 / (1.0 + std::exp(-c));
}

/// l * (1 - beta) + beta / num_labels, elementwise.
inline std::vector<double> smooth_labels(std::span<const double> l, double beta, std::size_t num_labels) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ValidationError("label smoothing beta must be in [0, 1)");
  if (num_labels == 0) throw ValidationError("label smoothing needs at least one label");
  std::vector<double> out(l.size());
  const double add = beta / static_cast<double>(num_labels);
  for (std::size_t i = 0; i < l.size(); ++i) out[i] = l[i] * (1.0 - beta) + add;
  return out;
}

/// Binary cross-entropy summed over labels; targets may be soft.
inline LossResult loss_bce(std::span<const double> logits, std::span<const double> targets) {
  LossResult r;
  r.grad.assign(logits.size(), 0.0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto sp = detail::sigmoid_parts(logits[i]);
    const double t = targets[i];
    r.value -= t * sp.lp + (1.0 - t) * sp.lq;
    r.grad[i] = -(t * sp.dlp + (1.0 - t) * sp.dlq);
  }
  return r;
}

/// Soft-target focal loss summed over labels:
///   -[ t a_pos (1-p)^g log p + (1-t) a_neg p^g log(1-p) ]
/// With g = 0 and a_pos = a_neg = a it is a times BCE.
inline LossResult loss_ls_focal(std::span<const double> logits, std::span<const double> targets, double gamma,
                                double alpha_pos, double alpha_neg) {
  LossResult r;
  r.grad.assign(logits.size(), 0.0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto sp = detail::sigmoid_parts(logits[i]);
    const double t = targets[i];
    const double qg = std::pow(sp.q, gamma);
    const double pg = std::pow(sp.p, gamma);
    r.value -= t * alpha_pos * qg * sp.lp + (1.0 - t) * alpha_neg * pg * sp.lq;
    // d(q^g)/ds = -g q^(g-1) dp, d(p^g)/ds = g p^(g-1) dp
    const double dqg = gamma == 0.0 ? 0.0 : -gamma * std::pow(sp.q, gamma - 1.0) * sp.dp;
    const double dpg = gamma == 0.0 ? 0.0 : gamma * std::pow(sp.p, gamma - 1.0) * sp.dp;
    r.grad[i] = -(t * alpha_pos * (dqg * sp.lp + qg * sp.dlp) + (1.0 - t) * alpha_neg * (dpg * sp.lq + pg * sp.dlq));
  }
  return r;
}

enum class MlceForm {
  /// log(e^s0 + sum_neg e^s_i) + log(e^-s0 + sum_pos e^-s_j)
  Threshold,
  /// log(1 + sum_neg e^s_i * sum_pos e^-s_j), no threshold score.
  Pairwise,
};

/// Multi-label cross-entropy over raw logits; `positive[i]` marks Omega_pos,
/// everything else is Omega_neg. Evaluated with log-sum-exp.
inline LossResult loss_mlce(std::span<const double> logits, std::span<const std::uint8_t> positive, double s0,
                            MlceForm form = MlceForm::Threshold) {
  LossResult r;
  r.grad.assign(logits.size(), 0.0);
  std::vector<double> neg, pos;
  std::vector<std::size_t> neg_idx, pos_idx;
  if (form == MlceForm::Threshold) {
    neg.push_back(s0);
    pos.push_back(-s0);
  }
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (positive[i]) {
      pos.push_back(-logits[i]);
      pos_idx.push_back(i);
    } else {
      neg.push_back(logits[i]);
      neg_idx.push_back(i);
    }
  }
  const std::size_t off = form == MlceForm::Threshold ? 1 : 0;
  if (form == MlceForm::Threshold) {
    const double zn = detail::log_sum_exp(neg);
    const double zp = detail::log_sum_exp(pos);
    r.value = zn + zp;
    for (std::size_t k = 0; k < neg_idx.size(); ++k) r.grad[neg_idx[k]] = std::exp(neg[k + off] - zn);
    for (std::size_t k = 0; k < pos_idx.size(); ++k) r.grad[pos_idx[k]] = -std::exp(pos[k + off] - zp);
    return r;
  }
  if (neg_idx.empty() || pos_idx.empty()) return r;
  const double zn = detail::log_sum_exp(neg);
  const double zp = detail::log_sum_exp(pos);
  const double z = zn + zp;
  // softplus(z) and its derivative sigmoid(z), both stable for large |z|
  r.value = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  const double w = 1.0 / (1.0 + std::exp(-z));
  for (std::size_t k = 0; k < neg_idx.size(); ++k) r.grad[neg_idx[k]] = w * std::exp(neg[k] - zn);
  for (std::size_t k = 0; k < pos_idx.size(); ++k) r.grad[pos_idx[k]] = -w * std::exp(pos[k] - zp);
  return r;
}

/// BCE restricted to the positives (target 1) and the sampled negatives
/// (target 0). Every other label is masked: zero loss, zero gradient.
inline LossResult loss_neg_sample(std::span<const double> logits, std::span<const std::size_t> positives,
                                  std::span<const std::size_t> negatives) {
  LossResult r;
  r.grad.assign(logits.size(), 0.0);
  for (auto i : positives) {
    const auto sp = detail::sigmoid_parts(logits[i]);
    r.value -= sp.lp;
    r.grad[i] = -sp.dlp;
  }
  for (auto i : negatives) {
    const auto sp = detail::sigmoid_parts(logits[i]);
    r.value -= sp.lq;
    r.grad[i] = -sp.dlq;
  }
  return r;
}

/// `count` distinct label indices drawn uniformly from [0, num_labels)
/// minus the positives; returned sorted.
inline std::vector<std::size_t> sample_negatives(Rng& rng, std::span<const std::size_t> positives,
                                                 std::size_t num_labels, std::size_t count) {
  std::vector<std::uint8_t> is_pos(num_labels, 0);
  for (auto p : positives) {
    if (p >= num_labels) throw ValidationError("positive label index out of range");
    is_pos[p] = 1;
  }
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < num_labels; ++i)
    if (!is_pos[i]) pool.push_back(i);
  if (count > pool.size())
    throw ValidationError("cannot sample " + std::to_string(count) + " negatives from " +
                          std::to_string(pool.size()) + " candidates");
  std::vector<std::size_t> out;
  for (auto k : rng.sample_without_replacement(pool.size(), count)) out.push_back(pool[k]);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::size_t> sample_negatives(Rng& rng, std::size_t positive, std::size_t num_labels,
                                                 std::size_t count) {
  const std::size_t pos[1] = {positive};
  return sample_negatives(rng, std::span<const std::size_t>(pos, 1), num_labels, count);
}

enum class LossKind { Bce, NegSample, LsFocal, Mlce };

inline std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::Bce: return "bce";
    case LossKind::NegSample: return "neg_sample";
    case LossKind::LsFocal: return "ls_focal";
    case LossKind::Mlce: return "mlce";
  }
  return "?";
}

inline LossKind parse_loss_kind(std::string_view s) {
  if (s == "bce") return LossKind::Bce;
  if (s == "neg_sample") return LossKind::NegSample;
  if (s == "ls_focal") return LossKind::LsFocal;
  if (s == "mlce") return LossKind::Mlce;
  throw ValidationError("unknown loss kind '" + std::string(s) + "'");
}

/// Loss hyperparameters. Defaults follow the published settings: gamma 4,
/// alpha_neg 1e-5, alpha_pos 0.99999, s0 0, one negative sample.
struct LossConfig {
  LossKind kind = LossKind::Bce;
  double beta = 0.1;
  double gamma = 4.0;
  double alpha_pos = 0.99999;
  double alpha_neg = 0.00001;
  double s0 = 0.0;
  std::size_t neg_count = 1;
  /// Optional proportion of |L|; when > 0 it overrides neg_count after
  /// rounding (at least one negative).
  double neg_ratio = 0.0;

  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

inline void validate(const LossConfig& c) {
  if (!(c.beta >= 0.0 && c.beta < 1.0)) throw ValidationError("beta must be in [0, 1)");
  if (!(c.gamma >= 0.0)) throw ValidationError("gamma must be >= 0");
  if (!(c.alpha_pos >= 0.0 && c.alpha_pos <= 1.0) || !(c.alpha_neg >= 0.0 && c.alpha_neg <= 1.0))
    throw ValidationError("alpha_pos and alpha_neg must be in [0, 1]");
  if (!std::isfinite(c.s0)) throw ValidationError("s0 must be finite");
  if (c.kind == LossKind::NegSample && c.neg_count < 1 && c.neg_ratio <= 0.0)
    throw ValidationError("neg_count must be >= 1");
  if (c.neg_ratio < 0.0 || c.neg_ratio > 1.0) throw ValidationError("neg_ratio must be in [0, 1]");
}

/// Negatives per instance for a label space of size num_labels.
inline std::size_t effective_neg_count(const LossConfig& c, std::size_t num_labels) {
  if (c.neg_ratio > 0.0)
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(c.neg_ratio * static_cast<double>(num_labels))));
  return c.neg_count;
}

/// Loss of one instance given its positive label indices. `rng` is only
/// drawn from by neg_sample.
inline LossResult instance_loss(const LossConfig& cfg, std::span<const double> logits,
                                std::span<const std::size_t> positives, Rng& rng) {
  const std::size_t n = logits.size();
  switch (cfg.kind) {
    case LossKind::Bce:
    case LossKind::LsFocal: {
      std::vector<double> t(n, 0.0);
      for (auto p : positives) t[p] = 1.0;
      if (cfg.kind == LossKind::Bce) return loss_bce(logits, t);
      const auto ls = smooth_labels(t, cfg.beta, n);
      return loss_ls_focal(logits, ls, cfg.gamma, cfg.alpha_pos, cfg.alpha_neg);
    }
    case LossKind::Mlce: {
      std::vector<std::uint8_t> mask(n, 0);
      for (auto p : positives) mask[p] = 1;
      return loss_mlce(logits, mask, cfg.s0);
    }
    case LossKind::NegSample: {
      const auto want = effective_neg_count(cfg, n);
      const auto avail = n - std::min(n, positives.size());
      const auto negs = sample_negatives(rng, positives, n, std::min(want, avail));
      return loss_neg_sample(logits, positives, negs);
    }
  }
  throw ValidationError("unhandled loss kind");
}

inline nlohmann::ordered_json to_json(const LossConfig& c) {
  return {{"kind", std::string(to_string(c.kind))},
          {"beta", c.beta},
          {"gamma", c.gamma},
          {"alpha_pos", c.alpha_pos},
          {"alpha_neg", c.alpha_neg},
          {"s0", c.s0},
          {"neg_count", c.neg_count},
          {"neg_ratio", c.neg_ratio}};
}

inline LossConfig loss_config_from_json(const nlohmann::json& j, LossConfig c = {}) {
  if (!j.is_object()) throw ValidationError("loss config must be an object");
  for (const auto& [k, _] : j.items())
    if (k != "kind" && k != "beta" && k != "gamma" && k != "alpha_pos" && k != "alpha_neg" && k != "s0" &&
        k != "neg_count" && k != "neg_ratio")
      throw ValidationError("unknown key '" + k + "' in loss config");
  try {
    if (j.contains("kind")) c.kind = parse_loss_kind(j.at("kind").get<std::string>());
    c.beta = j.value("beta", c.beta);
    c.gamma = j.value("gamma", c.gamma);
    c.alpha_pos = j.value("alpha_pos", c.alpha_pos);
    c.alpha_neg = j.value("alpha_neg", c.alpha_neg);
    c.s0 = j.value("s0", c.s0);
    c.neg_count = j.value("neg_count", c.neg_count);
    c.neg_ratio = j.value("neg_ratio", c.neg_ratio);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("loss config: ") + e.what());
  }
  validate(c);
  return c;
}

}  // namespace entangle
