#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "aesthnet/core/error.hpp"

namespace aesthnet {

enum class LrScheduleKind {
  kConstant,
  kStaircaseExponential,   // lr0 * base^floor(step / decay_steps)
  kContinuousExponential,  // lr0 * base^(step / decay_steps)
};

inline std::string to_string(LrScheduleKind k) {
  switch (k) {
    case LrScheduleKind::kConstant: return "constant";
    case LrScheduleKind::kStaircaseExponential: return "staircase";
    case LrScheduleKind::kContinuousExponential: return "continuous";
  }
  throw ConfigError("unknown schedule kind");
}

inline LrScheduleKind parse_schedule_kind(const std::string& s) {
  if (s == "constant") return LrScheduleKind::kConstant;
  if (s == "staircase") return LrScheduleKind::kStaircaseExponential;
  if (s == "continuous") return LrScheduleKind::kContinuousExponential;
  throw ConfigError("unknown lr schedule '" + s + "'");
}

struct StageConfig {
  int stage_id = 1;
  double lr0 = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::size_t epochs = 5;
  std::size_t batch_size = 64;
  std::vector<std::string> trainable;  // layer names receiving updates
  LrScheduleKind schedule = LrScheduleKind::kConstant;
  std::size_t decay_steps = 125;
  double decay_base = 0.5;

  /// Head-only warm-up on a frozen backbone.
  static StageConfig stage1_defaults() {
    StageConfig c;
    c.stage_id = 1;
    c.lr0 = 0.001;
    c.epochs = 5;
    c.trainable = {"fc1", "fc2", "output"};
    c.schedule = LrScheduleKind::kConstant;
    return c;
  }

  /// Fine-tuning with the top two convs of block 4 unfrozen and a halving
  /// staircase every 125 steps.
  static StageConfig stage2_defaults() {
    StageConfig c;
    c.stage_id = 2;
    c.lr0 = 0.0001;
    c.epochs = 3;
    c.trainable = {"block4_conv2", "block4_conv3", "fc1", "fc2", "output"};
    c.schedule = LrScheduleKind::kStaircaseExponential;
    c.decay_steps = 125;
    c.decay_base = 0.5;
    return c;
  }
};

/// Stage-local learning rate; steps count from zero at each stage start.
inline double lr_schedule(const StageConfig& stage, std::uint64_t step) {
  switch (stage.schedule) {
    case LrScheduleKind::kConstant:
      return stage.lr0;
    case LrScheduleKind::kStaircaseExponential:
      return stage.lr0 *
             std::pow(stage.decay_base,
                      static_cast<double>(step / stage.decay_steps));
    case LrScheduleKind::kContinuousExponential:
      return stage.lr0 * std::pow(stage.decay_base,
                                  static_cast<double>(step) /
                                      static_cast<double>(stage.decay_steps));
  }
  throw ConfigError("unknown schedule kind");
}

}  // namespace aesthnet
