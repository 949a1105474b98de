#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "mlmprep/error.hpp"

namespace mlmprep {

// Continued-pretraining hyperparameters. Only the schedule is computed here;
// the optimizer fields exist so every setting has a typed home.
struct TrainConfig {
  double lr_peak = 1e-4;
  double warmup_frac = 0.08;
  std::uint64_t total_steps = 1;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-6;
  double weight_decay = 0.01;
  std::uint64_t batch_size = 16;
  std::uint64_t grad_accum = 4;
  std::uint64_t epochs = 2;

  void validate() const {
    if (!(warmup_frac >= 0.0 && warmup_frac < 1.0)) throw InvalidConfig("warmup_frac must be in [0, 1)");
    if (!(lr_peak > 0.0)) throw InvalidConfig("lr_peak must be > 0");
    if (total_steps < 1) throw InvalidConfig("total_steps must be >= 1");
    if (!(beta1 > 0.0 && beta1 < beta2 && beta2 < 1.0)) throw InvalidConfig("need 0 < beta1 < beta2 < 1");
    if (!(epsilon > 0.0)) throw InvalidConfig("epsilon must be > 0");
  }
};

// round-half-up(warmup_frac * total_steps)
inline std::uint64_t warmup_steps(const TrainConfig& c) {
  return static_cast<std::uint64_t>(std::floor(c.warmup_frac * static_cast<double>(c.total_steps) + 0.5));
}

// Linear warmup from 0 to lr_peak, then half-cosine decay to exactly 0 at
// total_steps (no floor).
inline double lr_at(std::uint64_t step, const TrainConfig& c) {
  if (step > c.total_steps) {
    throw StepOutOfRange("step " + std::to_string(step) + " > total_steps " + std::to_string(c.total_steps));
  }
  const auto warmup = warmup_steps(c);
  if (step == c.total_steps) return 0.0;
  if (step < warmup) return c.lr_peak * static_cast<double>(step) / static_cast<double>(warmup);
  const double progress = static_cast<double>(step - warmup) / static_cast<double>(c.total_steps - warmup);
  return c.lr_peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

inline std::uint64_t effective_batch(const TrainConfig& c) { return c.batch_size * c.grad_accum; }

struct LrSample {
  std::uint64_t step;
  double lr;
};

// Evenly spaced samples over [0, total_steps], both ends included. Sample
// steps are rounded to integers; resolution is capped at total_steps + 1 so
// no step repeats.
inline std::vector<LrSample> emit_schedule(const TrainConfig& c, std::uint64_t resolution) {
  if (resolution < 2) throw InvalidConfig("resolution must be >= 2");
  c.validate();
  const std::uint64_t n = std::min(resolution, c.total_steps + 1);
  std::vector<LrSample> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    // Integer arithmetic keeps the grid exact: round(i * N / (n - 1)).
    const auto num = static_cast<unsigned __int128>(i) * c.total_steps;
    const auto den = static_cast<unsigned __int128>(n - 1);
    const auto step = static_cast<std::uint64_t>((2 * num + den) / (2 * den));
    out.push_back({step, lr_at(step, c)});
  }
  return out;
}

}  // namespace mlmprep
